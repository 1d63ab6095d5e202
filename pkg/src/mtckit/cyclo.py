"""Exact arithmetic in cyclotomic fields Q(zeta_N).

Elements are stored in the power basis {zeta_N^k : 0 <= k < phi(N)},
i.e. as integer polynomials reduced modulo the N-th cyclotomic polynomial,
over a common positive denominator.  This gives a canonical form with
decidable equality.  Conductors are normalized to never be congruent to
2 mod 4 (Q(zeta_m) = Q(zeta_2m) for odd m), so each element has a unique
minimal conductor.

Values are immutable; all operations return new objects.
"""

from __future__ import annotations

import functools
from fractions import Fraction
from math import gcd

import mpmath


class NotCoprime(ValueError):
    """galois_apply called with an exponent not coprime to the conductor."""


class DivisionByZero(ZeroDivisionError):
    """Exact inverse of zero requested."""


def lcm(a, b):
    return a * b // gcd(a, b)


def _divisors(n):
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def euler_phi(n):
    result = n
    p, m = 2, n
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def units_mod(n):
    """Units of Z/nZ in ascending order."""
    if n == 1:
        return [1]
    return [l for l in range(1, n) if gcd(l, n) == 1]


@functools.lru_cache(maxsize=None)
def cyclotomic_polynomial(n):
    """Coefficients of Phi_n(x), ascending degree, as a tuple of ints."""
    # Phi_n = (x^n - 1) / prod_{d | n, d < n} Phi_d, by exact division.
    poly = [-1] + [0] * (n - 1) + [1]
    for d in _divisors(n):
        if d == n:
            continue
        div = cyclotomic_polynomial(d)
        poly = _polydiv_exact(poly, list(div))
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return tuple(poly)


def _polydiv_exact(num, den):
    """Exact quotient of integer polynomials (den monic, remainder zero)."""
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(num) - len(den), -1, -1):
        c = num[i + len(den) - 1]
        out[i] = c
        if c:
            for j, dj in enumerate(den):
                num[i + j] -= c * dj
    assert all(c == 0 for c in num[: len(den) - 1])
    return out


@functools.lru_cache(maxsize=None)
def _reduction_rows(n):
    """Representation of zeta_n^k, phi(n) <= k < n, in the power basis."""
    phi = euler_phi(n)
    poly = cyclotomic_polynomial(n)
    rows = []
    # zeta^phi = -(poly[0] + poly[1] z + ... + poly[phi-1] z^{phi-1})
    prev = [-c for c in poly[:phi]]
    rows.append(tuple(prev))
    for _ in range(phi + 1, n):
        nxt = [0] + prev[:-1]
        top = prev[-1]
        if top:
            for j in range(phi):
                nxt[j] -= top * poly[j]
        rows.append(tuple(nxt))
        prev = nxt
    return rows


def _reduce_modphi(vec, n):
    """Reduce an exponent vector of length <= n to the power basis."""
    phi = euler_phi(n)
    if len(vec) <= phi:
        return list(vec) + [0] * (phi - len(vec))
    rows = _reduction_rows(n)
    out = list(vec[:phi])
    for k in range(phi, len(vec)):
        c = vec[k]
        if c:
            row = rows[k - phi]
            for j in range(phi):
                out[j] += c * row[j]
    return out


def _normalize_conductor(n):
    return n // 2 if n % 4 == 2 else n


class Cyclotomic:
    """An exact element of Q(zeta_n) in canonical form."""

    __slots__ = ("n", "den", "num", "_min")

    def __init__(self, n, num, den, _reduced=False):
        if not _reduced:
            raise TypeError("use the Cyclotomic.* constructors")
        self.n = n
        self.num = num
        self.den = den
        self._min = None

    @staticmethod
    def _make(n, num_list, den):
        """Normalize an integer coefficient list / denominator pair."""
        num_list = _reduce_modphi(num_list, n)
        if den < 0:
            den = -den
            num_list = [-c for c in num_list]
        g = den
        for c in num_list:
            g = gcd(g, c)
            if g == 1:
                break
        if g > 1:
            den //= g
            num_list = [c // g for c in num_list]
        if all(c == 0 for c in num_list):
            return Cyclotomic(1, (0,), 1, _reduced=True)
        return Cyclotomic(n, tuple(num_list), den, _reduced=True)

    # ------------------------------------------------------------------
    # constructors

    @staticmethod
    def rational(q):
        q = Fraction(q)
        return Cyclotomic._make(1, [q.numerator], q.denominator)

    @staticmethod
    def zeta(n, k=1):
        """The root of unity e^{2 pi i k / n}."""
        if n < 1:
            raise ValueError("conductor must be positive")
        k %= n
        if n % 4 == 2:
            # zeta_{2m} = -zeta_m^{(m+1)/2} for odd m
            m = n // 2
            sign = -1 if k % 2 else 1
            vec = [0] * m
            vec[(k * ((m + 1) // 2)) % m] = sign
            return Cyclotomic._make(m, vec, 1)
        if n == 1:
            return Cyclotomic.rational(1)
        vec = [0] * n
        vec[k] = 1
        return Cyclotomic._make(n, vec, 1)

    @staticmethod
    def phase(p, q):
        """The root of unity e^{p pi i / q} (exponent in half-turns)."""
        return Cyclotomic.zeta(2 * q, p)

    @staticmethod
    def from_terms(n, terms):
        """Build sum of terms {exponent: rational coefficient} at conductor n."""
        if n % 4 == 2:
            acc = Cyclotomic.rational(0)
            for k, c in terms.items():
                acc = acc + Cyclotomic.zeta(n, k) * Cyclotomic.rational(c)
            return acc
        den = 1
        coeffs = {}
        for k, c in terms.items():
            c = Fraction(c)
            coeffs[k % n] = coeffs.get(k % n, Fraction(0)) + c
        for c in coeffs.values():
            den = lcm(den, c.denominator)
        vec = [0] * n
        for k, c in coeffs.items():
            vec[k] = int(c * den)
        return Cyclotomic._make(n, vec, den)

    @staticmethod
    def promote(x):
        if isinstance(x, Cyclotomic):
            return x
        if isinstance(x, (int, Fraction)):
            return Cyclotomic.rational(x)
        raise TypeError(f"cannot promote {type(x).__name__} to Cyclotomic")

    # ------------------------------------------------------------------
    # structure

    def is_zero(self):
        return self.den == 1 and all(c == 0 for c in self.num)

    def is_rational(self):
        return all(c == 0 for c in self.num[1:])

    def as_rational(self):
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(self.num[0], self.den)

    def coeff_vector(self):
        """Power-basis coefficients as Fractions (length phi(n))."""
        return [Fraction(c, self.den) for c in self.num]

    def _lift(self, m):
        """Rewrite at conductor m (n | m)."""
        if m == self.n:
            return self
        assert m % self.n == 0
        step = m // self.n
        vec = [0] * m
        for k, c in enumerate(self.num):
            vec[k * step] = c
        return Cyclotomic._make(m, vec, self.den)

    def _pair(self, other):
        other = Cyclotomic.promote(other)
        if self.n == other.n:
            return self, other
        m = _normalize_conductor(lcm(self.n, other.n))
        return self._lift(m), other._lift(m)

    # ------------------------------------------------------------------
    # ring operations

    def __add__(self, other):
        other = Cyclotomic.promote(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        a, b = self._pair(other)
        den = lcm(a.den, b.den)
        fa, fb = den // a.den, den // b.den
        vec = [fa * x + fb * y for x, y in zip(a.num, b.num)]
        return Cyclotomic._make(a.n, vec, den)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        return self.__add__(Cyclotomic.promote(other).__neg__())

    def __rsub__(self, other):
        return Cyclotomic.promote(other).__sub__(self)

    def __neg__(self):
        return Cyclotomic(self.n, tuple(-c for c in self.num), self.den, _reduced=True)

    def __mul__(self, other):
        other = Cyclotomic.promote(other)
        if self.is_zero() or other.is_zero():
            return ZERO
        if other.is_rational():
            q = Fraction(other.num[0], other.den)
            return Cyclotomic._make(
                self.n, [c * q.numerator for c in self.num], self.den * q.denominator
            )
        if self.is_rational():
            return other.__mul__(self)
        a, b = self._pair(other)
        out = [0] * (2 * len(a.num) - 1)
        for i, x in enumerate(a.num):
            if x:
                for j, y in enumerate(b.num):
                    if y:
                        out[i + j] += x * y
        # re-expand indices >= phi(n) via the reduction rows (degree < 2 phi - 1 < 2n)
        n = a.n
        phi = len(a.num)
        if len(out) > phi:
            rows = _reduction_rows(n)
            vec = out[:phi]
            for k in range(phi, len(out)):
                c = out[k]
                if c:
                    if k < n:
                        row = rows[k - phi]
                        for j in range(phi):
                            vec[j] += c * row[j]
                    else:  # zeta^k = zeta^{k-n}
                        kk = k - n
                        if kk < phi:
                            vec[kk] += c
                        else:
                            row = rows[kk - phi]
                            for j in range(phi):
                                vec[j] += c * row[j]
            out = vec
        return Cyclotomic._make(n, out, a.den * b.den)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        return self.__mul__(Cyclotomic.promote(other).inverse())

    def __rtruediv__(self, other):
        return Cyclotomic.promote(other).__mul__(self.inverse())

    def __pow__(self, k):
        if k < 0:
            return self.inverse().__pow__(-k)
        result = Cyclotomic.rational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base2 = base * base if k > 1 else base
            base = base2
            k >>= 1
        return result

    def __eq__(self, other):
        try:
            other = Cyclotomic.promote(other)
        except TypeError:
            return NotImplemented
        if self.n == other.n:
            return self.num == other.num and self.den == other.den
        return (self - other).is_zero()

    def __hash__(self):
        m = self.minimize_conductor()
        return hash((m.n, m.num, m.den))

    # ------------------------------------------------------------------
    # field structure

    def galois_apply(self, l):
        """Apply the Frobenius map zeta_n -> zeta_n^l; requires gcd(l, n) = 1."""
        n = self.n
        l %= n
        if gcd(l, n) != 1:
            raise NotCoprime(f"gcd({l}, {n}) != 1")
        if l == 1 or n == 1:
            return self
        vec = [0] * n
        for k, c in enumerate(self.num):
            if c:
                vec[(k * l) % n] += c
        return Cyclotomic._make(n, vec, self.den)

    def conj(self):
        return self.galois_apply(self.n - 1) if self.n > 1 else self

    def inverse(self):
        """Exact multiplicative inverse via the product of Galois conjugates."""
        if self.is_zero():
            raise DivisionByZero("cyclotomic division by zero")
        if self.is_rational():
            q = Fraction(self.num[0], self.den)
            return Cyclotomic.rational(1 / q)
        prod = Cyclotomic.rational(1)
        for l in units_mod(self.n):
            if l != 1:
                prod = prod * self.galois_apply(l)
        norm = self * prod
        assert norm.is_rational(), "norm of a cyclotomic must be rational"
        return prod * Cyclotomic.rational(1 / norm.as_rational())

    # ------------------------------------------------------------------
    # classification

    def root_of_unity_order(self):
        """Exact multiplicative order if self is a root of unity, else None."""
        e = self.root_of_unity_exponent()
        return e[0] if e else None

    def root_of_unity_exponent(self):
        """(order, k) with self = e^{2 pi i k / order}, or None if not torsion."""
        if self.den != 1:
            return None
        mj = _torsion_exponent(self)
        if mj is None:
            return None
        m, j = mj
        if j == 0:
            return (1, 0)
        g = gcd(m, j)
        return (m // g, j // g)

    def classify(self):
        """One of ('rational', q), ('root_of_unity', order), ('real',), ('generic',)."""
        if self.is_rational():
            return ("rational", self.as_rational())
        order = self.root_of_unity_order()
        if order is not None:
            return ("root_of_unity", order)
        if self.conj() == self:
            return ("real",)
        return ("generic",)

    def is_real(self):
        return self.is_rational() or self.conj() == self

    # ------------------------------------------------------------------
    # numerics

    def embed(self, precision=53):
        """Complex embedding at the principal root e^{2 pi i / n} (mpmath.mpc)."""
        if precision < 53:
            raise ValueError("precision must be at least 53 bits")
        with mpmath.workprec(precision + 16):
            roots = _unit_roots(self.n, mpmath.mp.prec)
            acc = mpmath.mpc(0)
            for k, c in enumerate(self.num):
                if c:
                    acc += c * roots[k]
            return +(acc / self.den)

    def __complex__(self):
        return complex(self.embed(60))

    # ------------------------------------------------------------------
    # conductor management

    def minimize_conductor(self):
        """Equal value at the smallest cyclotomic conductor containing it."""
        if self._min is not None:
            return self._min
        if self.is_rational():
            out = Cyclotomic(1, (self.num[0],), self.den, _reduced=True)
        else:
            out = None
            if self.den == 1:
                mj = _torsion_exponent(self)
                if mj is not None:
                    m, j = mj
                    g = gcd(m, j) if j else m
                    out = Cyclotomic.zeta(m // g, j // g)
            if out is None:
                out = self
                for d in _divisors(self.n):
                    if d == self.n or d % 4 == 2:
                        continue
                    coords = _descend(self, d)
                    if coords is not None:
                        out = Cyclotomic._make(d, coords[0], coords[1])
                        break
        self._min = out
        out._min = out
        return out

    # ------------------------------------------------------------------
    # serialization & display

    def to_json(self):
        """{"conductor": N, "coeffs": [[num, den], ...]} with exactly N entries."""
        m = self.minimize_conductor()
        coeffs = [[c, m.den] if c else [0, 1] for c in m.num]
        coeffs += [[0, 1]] * (m.n - len(coeffs))
        return {"conductor": m.n, "coeffs": coeffs}

    @staticmethod
    def from_json(obj):
        n = obj["conductor"]
        coeffs = obj["coeffs"]
        if len(coeffs) != n:
            raise ValueError(f"expected {n} coefficients, got {len(coeffs)}")
        return Cyclotomic.from_terms(
            n, {k: Fraction(a, b) for k, (a, b) in enumerate(coeffs)}
        )

    def __repr__(self):
        if self.is_rational():
            q = self.as_rational()
            return str(q)
        parts = []
        for k, c in enumerate(self.num):
            if not c:
                continue
            q = Fraction(c, self.den)
            if k == 0:
                parts.append(str(q))
            else:
                z = f"z{self.n}" + (f"^{k}" if k > 1 else "")
                if q == 1:
                    parts.append(z)
                elif q == -1:
                    parts.append(f"-{z}")
                else:
                    parts.append(f"{q}*{z}")
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out


@functools.lru_cache(maxsize=None)
def _torsion_table(n):
    """Map power-basis numerator tuples of roots of unity in Q(zeta_n) to (m, j)."""
    m = n if n % 2 == 0 else 2 * n
    table = {}
    for j in range(m):
        z = Cyclotomic.zeta(m, j)
        z = z._lift(n) if z.n != n else z
        table[z.num] = (m, j)
    return table


def _torsion_exponent(x):
    return _torsion_table(x.n).get(x.num)


@functools.lru_cache(maxsize=None)
def _unit_roots_impl(n, prec):
    with mpmath.workprec(prec):
        base = mpmath.e ** (2j * mpmath.pi / n)
        return tuple(base**k for k in range(euler_phi(n)))


def _unit_roots(n, prec):
    return _unit_roots_impl(n, prec)


@functools.lru_cache(maxsize=None)
def _lift_columns(n, d):
    """Power-basis images in Q(zeta_n) of the Q(zeta_d) basis monomials."""
    step = n // d
    cols = []
    for k in range(euler_phi(d)):
        vec = [0] * n
        vec[k * step] = 1
        cols.append(tuple(_reduce_modphi(vec, n)))
    return cols


def _descend(x, d):
    """Coefficients of x over the power basis of Q(zeta_d), or None if not in it."""
    n = x.n
    cols = _lift_columns(n, d)
    phi_n, phi_d = euler_phi(n), euler_phi(d)
    aug = [
        [Fraction(cols[j][i]) for j in range(phi_d)] + [Fraction(x.num[i], x.den)]
        for i in range(phi_n)
    ]
    r = 0
    pivot_cols = []
    for c in range(phi_d):
        piv = next((i for i in range(r, phi_n) if aug[i][c] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [v * inv for v in aug[r]]
        for i in range(phi_n):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [v - f * p for v, p in zip(aug[i], aug[r])]
        pivot_cols.append(c)
        r += 1
    for i in range(r, phi_n):
        if aug[i][phi_d] != 0:
            return None
    sol = [Fraction(0)] * phi_d
    for row, c in enumerate(pivot_cols):
        sol[c] = aug[row][phi_d]
    den = 1
    for v in sol:
        den = lcm(den, v.denominator)
    return [int(v * den) for v in sol], den


# ----------------------------------------------------------------------
# module-level functional interface

ZERO = Cyclotomic.rational(0)
ONE = Cyclotomic.rational(1)


def zeta(n, k=1):
    return Cyclotomic.zeta(n, k)


def phase(p, q):
    return Cyclotomic.phase(p, q)


def rational(q):
    return Cyclotomic.rational(q)


def arithmetic(x, y, op):
    """Spec-level entry point: op in {'add', 'sub', 'mul'}."""
    x, y = Cyclotomic.promote(x), Cyclotomic.promote(y)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    raise ValueError(f"unknown op {op!r}")


def galois_apply(x, l):
    return Cyclotomic.promote(x).galois_apply(l)


def inverse(x):
    return Cyclotomic.promote(x).inverse()


def classify_element(x):
    return Cyclotomic.promote(x).classify()


def embed_complex(x, precision=53):
    return Cyclotomic.promote(x).embed(precision)
