"""Data model and axiom checks for modular fusion rules and modular symbols.

Everything at the level of fusion matrices, the unnormalized S-matrix and
twists is verified in exact cyclotomic arithmetic.  The only floating-point
paths are Frobenius-Perron branch selection (`is_unitary_symbol`) and the
sign bit that fixes the central charge mod 8.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import mpmath
import numpy as np

from .cyclo import Cyclotomic, lcm, rational, units_mod

ONE = rational(1)
ZERO = rational(0)


class NotAFusionRule(ValueError):
    def __init__(self, i, j, k, value, reason):
        self.indices = (i, j, k)
        self.value = value
        super().__init__(f"n[{i},{j}]^{k} = {value}: {reason}")


class IndicatorOutOfRange(ValueError):
    def __init__(self, k, value):
        self.label = k
        self.value = value
        super().__init__(f"Frobenius-Schur indicator nu_{k} = {value} not in {{0, +1, -1}}")


class NonTorsionTwist(ValueError):
    def __init__(self, i):
        self.label = i
        super().__init__(f"twist theta_{i} is not a root of unity")


class NotRational(ValueError):
    pass


# ----------------------------------------------------------------------
# reports


@dataclass
class Report:
    """Outcome of a verification sweep: named sub-checks with pass/fail."""

    name: str
    items: list = field(default_factory=list)

    def add(self, label, ok, detail=""):
        self.items.append((label, bool(ok), detail))

    @property
    def ok(self):
        return all(ok for _, ok, _ in self.items)

    @property
    def failures(self):
        return [(label, detail) for label, ok, detail in self.items if not ok]

    def to_json(self):
        return {
            "name": self.name,
            "ok": self.ok,
            "checks": [
                {"check": label, "ok": ok, **({"detail": detail} if detail else {})}
                for label, ok, detail in self.items
            ],
        }

    def __str__(self):
        lines = [f"[{ 'PASS' if self.ok else 'FAIL' }] {self.name}"]
        for label, ok, detail in self.items:
            mark = "ok" if ok else "FAIL"
            lines.append(f"  {mark:4} {label}" + (f"  ({detail})" if detail and not ok else ""))
        return "\n".join(lines)


# ----------------------------------------------------------------------
# matrix helpers over Cyclotomic


def mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    out = [[ZERO] * p for _ in range(n)]
    for i in range(n):
        for k in range(m):
            x = a[i][k]
            if x.is_zero():
                continue
            row = b[k]
            for j in range(p):
                if not row[j].is_zero():
                    out[i][j] = out[i][j] + x * row[j]
    return out

def mat_scale(a, s):
    return [[x * s for x in row] for row in a]

def mat_eq(a, b):
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))

def mat_conj(a):
    return [[x.conj() for x in row] for row in a]

def mat_apply(a, f):
    return [[f(x) for x in row] for row in a]

def identity_matrix(n):
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]

def det_exact(a):
    """Exact determinant by fraction-free elimination on a small matrix."""
    n = len(a)
    if n == 1:
        return a[0][0]
    total = ZERO
    import itertools
    for perm in itertools.permutations(range(n)):
        sign = 1
        seen = list(perm)
        for i in range(n):
            for j in range(i + 1, n):
                if seen[i] > seen[j]:
                    sign = -sign
        term = rational(sign)
        for i in range(n):
            term = term * a[i][perm[i]]
        total = total + term
    return total


# ----------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class LabelSet:
    size: int
    dual: tuple

    def __post_init__(self):
        n, dual = self.size, self.dual
        if n < 1:
            raise ValueError("rank must be at least 1")
        if len(dual) != n or sorted(dual) != list(range(n)):
            raise ValueError("dual must be a permutation of the labels")
        if dual[0] != 0:
            raise ValueError("the trivial label must be self-dual")
        for i in range(n):
            if dual[dual[i]] != i:
                raise ValueError("dual must be an involution")

    def charge_conjugation(self):
        n = self.size
        return [[ONE if self.dual[j] == i else ZERO for j in range(n)] for i in range(n)]

    def self_dual(self, i):
        return self.dual[i] == i

    def is_self_dual_set(self):
        return all(self.dual[i] == i for i in range(self.size))


class FusionRules:
    """The n fusion matrices N_i; entries rational, integer for realized theories."""

    def __init__(self, labels, matrices, strict=True):
        self.labels = labels
        self.matrices = [[[Fraction(v) for v in row] for row in m] for m in matrices]
        self.strict = strict
        self.validate()

    def n(self, i, j, k):
        return self.matrices[i][j][k]

    @property
    def rank(self):
        return self.labels.size

    def validate(self):
        n = self.rank
        dual = self.labels.dual
        N = self.matrices
        if len(N) != n or any(len(m) != n or any(len(r) != n for r in m) for m in N):
            raise ValueError("need n fusion matrices of shape n x n")
        for j in range(n):
            for k in range(n):
                if N[0][j][k] != (1 if j == k else 0):
                    raise ValueError("N_0 must be the identity")
        for i in range(n):
            for j in range(n):
                if N[i][0][j] != (1 if i == j else 0):
                    raise ValueError("(N_i)_{0j} must be delta_{ij}")
                for k in range(n):
                    v = N[i][j][k]
                    if self.strict and (v.denominator != 1 or v < 0):
                        raise NotAFusionRule(i, j, k, v, "not a nonnegative integer")
                    if v != N[j][i][k]:
                        raise ValueError("fusion coefficients must be symmetric in i, j")
                    if v != N[dual[i]][dual[j]][dual[k]]:
                        raise ValueError("duality symmetry violated")
                    if v != N[i][dual[k]][dual[j]]:
                        raise ValueError("Frobenius reciprocity violated")
        # associativity: N_i N_j = sum_k n_{ij}^k N_k, which also implies commutation
        for i in range(n):
            for j in range(i, n):
                for a in range(n):
                    for b in range(n):
                        lhs = sum(N[i][a][c] * N[j][c][b] for c in range(n))
                        rhs = sum(N[i][j][k] * N[k][a][b] for k in range(n))
                        if lhs != rhs:
                            raise ValueError(f"fusion matrices not associative at ({i},{j})")

    def numpy_matrices(self):
        return [np.array([[float(v) for v in row] for row in m]) for m in self.matrices]

    def words(self):
        """Human-readable nontrivial fusion rules like '1*1 = 0 + 1'."""
        out = []
        for i in range(1, self.rank):
            for j in range(i, self.rank):
                terms = []
                for k in range(self.rank):
                    c = self.n(i, j, k)
                    if c:
                        terms.append((f"{c}*" if c != 1 else "") + str(k))
                out.append(f"{i}*{j} = " + (" + ".join(terms) if terms else "0"))
        return out

    def __eq__(self, other):
        return isinstance(other, FusionRules) and self.labels == other.labels and self.matrices == other.matrices


class SMatrixTilde:
    """Unnormalized S-matrix: symmetric, first row the quantum dimensions."""

    def __init__(self, labels, entries):
        self.labels = labels
        self.entries = [[Cyclotomic.promote(x) for x in row] for row in entries]
        self._lam = None
        self.validate()

    @property
    def rank(self):
        return self.labels.size

    def validate(self):
        n = self.rank
        s = self.entries
        dual = self.labels.dual
        if len(s) != n or any(len(r) != n for r in s):
            raise ValueError("S-tilde must be n x n")
        if s[0][0] != ONE:
            raise ValueError("s~_{00} must be 1")
        for i in range(n):
            if s[i][0].is_zero():
                raise ValueError(f"quantum dimension d_{i} must be nonzero")
            for j in range(n):
                if s[i][j] != s[j][i]:
                    raise ValueError("S-tilde must be symmetric")
                if s[i][dual[j]] != s[i][j].conj():
                    raise ValueError("s~_{i,dual(j)} must equal conj(s~_{ij})")
        dsq = self.dsq()
        for i in range(n):
            for j in range(n):
                acc = ZERO
                for k in range(n):
                    acc = acc + s[i][k] * s[j][k].conj()
                if acc != (dsq if i == j else ZERO):
                    raise ValueError("S-tilde rows are not orthogonal with norm D^2")

    def dims(self):
        return [self.entries[i][0] for i in range(self.rank)]

    def dsq(self):
        acc = ZERO
        for i in range(self.rank):
            d = self.entries[i][0]
            acc = acc + d * d
        return acc

    def lam(self):
        """Eigenvalue table lambda_{ia} = s~_{ia} / s~_{0a}."""
        if self._lam is None:
            n = self.rank
            inv0 = [self.entries[0][a].inverse() for a in range(n)]
            self._lam = [[self.entries[i][a] * inv0[a] for a in range(n)] for i in range(n)]
        return self._lam

    def numpy(self, prec=53):
        with mpmath.workprec(prec):
            return [[x.embed(prec) for x in row] for row in self.entries]

    def complex_matrix(self):
        return np.array([[complex(x.embed(60)) for x in row] for row in self.entries])

    def is_real(self):
        return all(x.is_real() for row in self.entries for x in row)

    def conductor(self):
        n = 1
        for row in self.entries:
            for x in row:
                n = lcm(n, x.minimize_conductor().n)
        return n

    def __eq__(self, other):
        return (
            isinstance(other, SMatrixTilde)
            and self.labels == other.labels
            and mat_eq(self.entries, other.entries)
        )


class TwistVector:
    def __init__(self, theta):
        self.theta = [Cyclotomic.promote(t) for t in theta]

    def validate(self, labels):
        if len(self.theta) != labels.size:
            raise ValueError("need one twist per label")
        if self.theta[0] != ONE:
            raise ValueError("theta_0 must be 1")
        for i, t in enumerate(self.theta):
            if t.conj() * t != ONE:
                raise ValueError(f"theta_{i} must be unimodular")
            if self.theta[labels.dual[i]] != t:
                raise ValueError("twists must agree on dual labels")

    def t_matrix(self):
        n = len(self.theta)
        return [[self.theta[i] if i == j else ZERO for j in range(n)] for i in range(n)]

    def order(self):
        o = 1
        for t in self.theta:
            k = t.root_of_unity_order()
            if k is None:
                return None
            o = lcm(o, k)
        return o

    def __eq__(self, other):
        return isinstance(other, TwistVector) and all(
            a == b for a, b in zip(self.theta, other.theta)
        )

    def __hash__(self):
        return hash(tuple(self.theta))

    def __repr__(self):
        return "Diag(" + ", ".join(repr(t) for t in self.theta) + ")"


@dataclass
class ModularSymbol:
    fusion: FusionRules
    stilde: SMatrixTilde
    s00_sign: int
    twists: TwistVector

    def __post_init__(self):
        if self.s00_sign not in (1, -1):
            raise ValueError("s00_sign must be +1 or -1")
        self.twists.validate(self.stilde.labels)

    @staticmethod
    def from_stilde(stilde, twists, s00_sign=1, strict=True):
        fusion = verlinde(stilde, strict=strict)
        return ModularSymbol(fusion, stilde, s00_sign, TwistVector(twists))

    @property
    def rank(self):
        return self.stilde.rank


@dataclass
class DerivedQuantities:
    Dsq: Cyclotomic
    Dplus: Cyclotomic
    Dminus: Cyclotomic
    lam: list
    nu: list
    c: Fraction
    A: list


# ----------------------------------------------------------------------
# operations


def verlinde(stilde, strict=True):
    """Fusion coefficients n_{ij}^k = (1/D^2) sum_m s~_im s~_jm conj(s~_km) / d_m."""
    n = stilde.rank
    s = stilde.entries
    dsq_inv = stilde.dsq().inverse()
    dim_inv = [s[m][0].inverse() for m in range(n)]
    dual = [None] * n
    mats = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            for k in range(n):
                acc = ZERO
                for m in range(n):
                    acc = acc + s[i][m] * s[j][m] * s[k][m].conj() * dim_inv[m]
                acc = acc * dsq_inv
                if not acc.is_rational():
                    raise NotAFusionRule(i, j, k, acc, "not rational")
                v = acc.as_rational()
                if strict and (v.denominator != 1 or v < 0):
                    raise NotAFusionRule(i, j, k, v, "not a nonnegative integer")
                mats[i][j][k] = v
                mats[j][i][k] = v
    for i in range(n):
        hits = [k for k in range(n) if mats[i][k][0] != 0]
        if len(hits) != 1 or mats[i][hits[0]][0] != 1:
            raise NotAFusionRule(i, 0, 0, mats[i][i][0], "duality row is not a permutation")
        dual[i] = hits[0]
    labels = LabelSet(n, tuple(dual))
    if tuple(dual) != stilde.labels.dual:
        raise NotAFusionRule(0, 0, 0, 0, "derived duality disagrees with S-tilde labels")
    return FusionRules(labels, mats, strict=strict)


def check_eigen_relation(stilde, fusion):
    """N_i . S~ = S~ . Lambda_i for every i, exactly."""
    report = Report("eigen-relation")
    n = stilde.rank
    s = stilde.entries
    lam = stilde.lam()
    first_fail = None
    for i in range(n):
        for a in range(n):
            for j in range(n):
                lhs = ZERO
                for k in range(n):
                    c = fusion.n(i, j, k)
                    if c:
                        lhs = lhs + rational(c) * s[k][a]
                if lhs != s[j][a] * lam[i][a]:
                    first_fail = (i, a)
                    break
            if first_fail:
                break
        if first_fail:
            break
    report.add("N_i S~ = S~ Lambda_i", first_fail is None,
               f"first failure at (i, a) = {first_fail}" if first_fail else "")
    return report


def gauss_sums(sym):
    """D_+ and D_- for a modular symbol."""
    dims = sym.stilde.dims()
    theta = sym.twists.theta
    dplus = ZERO
    dminus = ZERO
    for d, t in zip(dims, theta):
        dsq = d * d
        dplus = dplus + t * dsq
        dminus = dminus + t.conj() * dsq
    return dplus, dminus


def check_modular_symbol(sym):
    """Unnormalized twist equation, S~^2 = D^2 C, and the balance identity."""
    report = Report("modular-symbol")
    s = sym.stilde.entries
    n = sym.rank
    dsq = sym.stilde.dsq()
    dplus, dminus = gauss_sums(sym)
    t = sym.twists.t_matrix()
    lhs = mat_mul(mat_mul(mat_mul(mat_mul(t, s), t), s), t)
    rhs = mat_scale(s, dplus)
    report.add("T S~ T S~ T = D+ S~", mat_eq(lhs, rhs))
    ssq = mat_mul(s, s)
    c_mat = mat_scale(sym.stilde.labels.charge_conjugation(), dsq)
    report.add("S~^2 = D^2 C", mat_eq(ssq, c_mat))
    report.add("D+ D- = D^2", dplus * dminus == dsq)
    return report


def twist_ring_identity(sym):
    """theta_i theta_j s~_ij = sum_k n_{dual(i),j}^k d_k theta_k, exactly."""
    report = Report("twist-ring-identity")
    n = sym.rank
    s = sym.stilde.entries
    dims = sym.stilde.dims()
    theta = sym.twists.theta
    dual = sym.stilde.labels.dual
    ok = True
    where = None
    for i in range(n):
        for j in range(n):
            lhs = theta[i] * theta[j] * s[i][j]
            rhs = ZERO
            for k in range(n):
                c = sym.fusion.n(dual[i], j, k)
                if c:
                    rhs = rhs + rational(c) * dims[k] * theta[k]
            if lhs != rhs:
                ok = False
                where = (i, j)
                break
        if not ok:
            break
    report.add("theta_i theta_j s~_ij = sum_k n_{i^,j}^k d_k theta_k", ok,
               f"fails at (i,j) = {where}" if where else "")
    return report


def a_matrix(fusion):
    """A_{ij} = 2 n_{i,dual(i)}^j n_{ij}^i + n_{ii}^j n_{j,dual(i)}^i (integer matrix)."""
    n = fusion.rank
    dual = fusion.labels.dual
    A = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            v = 2 * fusion.n(i, dual[i], j) * fusion.n(i, j, i) + fusion.n(i, i, j) * fusion.n(
                j, dual[i], i
            )
            if v.denominator != 1:
                raise NotAFusionRule(i, j, i, v, "A-matrix entry not integral")
            A[i][j] = int(v)
    return A


def vafa_check(sym):
    """Root-of-unity exponent arithmetic for prod_j theta_j^{A_ij} = theta_i^{(4/3) sum_j A_ij}."""
    report = Report("vafa")
    n = sym.rank
    exps = []
    for i, th in enumerate(sym.twists.theta):
        e = th.root_of_unity_exponent()
        if e is None:
            raise NonTorsionTwist(i)
        exps.append(e)
    m = 1
    for order, _ in exps:
        m = lcm(m, order)
    e = [k * (m // order) for order, k in exps]  # theta_i = e^{2 pi i e_i / m}
    A = a_matrix(sym.fusion)
    for i in range(n):
        row_sum = sum(A[i])
        lhs = sum(A[i][j] * e[j] for j in range(n))
        if (4 * row_sum) % 3 == 0:
            ok = (lhs - (4 * row_sum // 3) * e[i]) % m == 0
        else:
            ok = (3 * lhs - 4 * row_sum * e[i]) % (3 * m) == 0
        report.add(f"label {i}", ok)
    return report


def fs_indicators(sym):
    """Frobenius-Schur indicators nu_k; 0 for non-self-dual k, otherwise +-1."""
    n = sym.rank
    s = sym.stilde
    dims = s.dims()
    theta = sym.twists.theta
    dsq_inv = s.dsq().inverse()
    th_sq = [t * t for t in theta]
    th_minus_sq = [t.conj() * t.conj() for t in theta]
    nu = []
    for k in range(n):
        acc = ZERO
        for i in range(n):
            for j in range(n):
                c = sym.fusion.n(k, j, i)
                if c:
                    acc = acc + rational(c) * dims[i] * dims[j] * th_sq[i] * th_minus_sq[j]
        acc = acc * dsq_inv
        if not acc.is_rational():
            raise IndicatorOutOfRange(k, acc)
        v = acc.as_rational()
        if v not in (0, 1, -1):
            raise IndicatorOutOfRange(k, v)
        expected_zero = sym.stilde.labels.dual[k] != k
        if expected_zero and v != 0:
            raise IndicatorOutOfRange(k, v)
        nu.append(int(v))
    return nu


def central_charge(sym, precision=128):
    """Topological central charge c (rational mod 8) from D_+ s_00 = e^{pi i c / 4}.

    The square e^{pi i c / 2} = D_+^2 / D^2 is classified exactly as a root of
    unity, pinning c mod 4; the remaining mod-8 bit comes from the sign of the
    real number D_+ e^{-pi i c / 4}, evaluated at `precision` bits.
    """
    dplus, dminus = gauss_sums(sym)
    dsq = sym.stilde.dsq()
    if dplus * dminus != dsq:
        raise NotRational("balance identity fails; central charge undefined")
    w = dplus * dplus * dsq.inverse()
    e = w.root_of_unity_exponent()
    if e is None:
        raise NotRational(f"D_+^2 / D^2 = {w} is not a root of unity")
    order, k = e
    c = Fraction(4 * k, order) % 4  # candidate c mod 4
    # disambiguate mod 8: D_+ e^{-pi i c/4} = +-D with D > 0
    with mpmath.workprec(precision):
        val = dplus.embed(precision) * mpmath.e ** (-1j * mpmath.pi * mpmath.mpf(
            c.numerator) / (4 * c.denominator))
        if mpmath.re(val) < 0:
            c += 4
    if sym.s00_sign == -1:
        c += 4
    return c % 8


def label_distinguishability(stilde):
    """No two columns of the eigenvalue table agree (Prop: labels are separated)."""
    report = Report("label-distinguishability")
    lam = stilde.lam()
    n = stilde.rank
    clash = None
    for j in range(n):
        for k in range(j + 1, n):
            if all(lam[i][j] == lam[i][k] for i in range(n)):
                clash = (j, k)
                break
        if clash:
            break
    report.add("eigenvalue columns pairwise distinct", clash is None,
               f"columns {clash} coincide" if clash else "")
    return report


def is_unitary_symbol(sym, tol=1e-9):
    """True iff each quantum dimension is the Frobenius-Perron eigenvalue of N_i."""
    dims = sym.stilde.dims()
    for i, m in enumerate(sym.fusion.numpy_matrices()):
        fp = max(abs(ev) for ev in np.linalg.eigvals(m))
        d = complex(dims[i].embed(60))
        if abs(d.imag) > tol or abs(d.real - fp) > tol:
            return False
    return True


def exact_total_order(stilde):
    """For odd rank, the exact element delta with delta^2 = +-D^2.

    det(S~) = u D^n with u in {+-1, +-i}; for odd n = 2r + 1 this gives
    delta = det(S~) / (D^2)^r in the field, with delta^2 = u^2 D^2.
    Returns (delta, sign) with delta^2 = sign * D^2.
    """
    n = stilde.rank
    if n % 2 == 0:
        raise ValueError("exact total order only defined for odd rank")
    r = n // 2
    det = det_exact(stilde.entries)
    delta = det * stilde.dsq().inverse() ** r
    dsq = stilde.dsq()
    if delta * delta == dsq:
        return delta, 1
    if delta * delta == -dsq:
        return delta, -1
    raise ValueError("determinant is not +-(i) D^n; not a modular fusion rule")


def derived_quantities(sym):
    dplus, dminus = gauss_sums(sym)
    return DerivedQuantities(
        Dsq=sym.stilde.dsq(),
        Dplus=dplus,
        Dminus=dminus,
        lam=sym.stilde.lam(),
        nu=fs_indicators(sym),
        c=central_charge(sym),
        A=a_matrix(sym.fusion),
    )


# ----------------------------------------------------------------------
# modular-data JSON

def symbol_to_json(sym):
    return {
        "labels": {"size": sym.rank, "dual": list(sym.stilde.labels.dual)},
        "stilde": [[x.to_json() for x in row] for row in sym.stilde.entries],
        "twists": [t.to_json() for t in sym.twists.theta],
        "s00_sign": sym.s00_sign,
    }


def symbol_from_json(obj, strict=True):
    labels = LabelSet(obj["labels"]["size"], tuple(obj["labels"]["dual"]))
    stilde = SMatrixTilde(
        labels, [[Cyclotomic.from_json(x) for x in row] for row in obj["stilde"]]
    )
    twists = [Cyclotomic.from_json(t) for t in obj["twists"]]
    sym = ModularSymbol.from_stilde(
        stilde, twists, s00_sign=obj.get("s00_sign", 1), strict=strict
    )
    if "fusion" in obj:
        given = [[[Fraction(v) for v in row] for row in m] for m in obj["fusion"]]
        if given != sym.fusion.matrices:
            raise NotAFusionRule(0, 0, 0, 0, "supplied fusion rules disagree with Verlinde")
    return sym
