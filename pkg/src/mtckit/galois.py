"""Galois group of a modular fusion rule and its signed-permutation action.

Each unit l of the fusion field's conductor acts entrywise on the
unnormalized S-matrix; the action factors through a signed permutation
d_{sigma(0)} S~^{-1} sigma(S~) whose signs and permutation are extracted
exactly.  All identities are verified in exact cyclotomic arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .cyclo import Cyclotomic, lcm, rational, units_mod
from .core import (
    ONE,
    Report,
    SMatrixTilde,
    ZERO,
    central_charge,
    exact_total_order,
    gauss_sums,
    mat_eq,
    mat_mul,
)


class NotSignedPermutation(ValueError):
    def __init__(self, l, detail=""):
        self.frobenius_l = l
        super().__init__(
            f"sigma_{l} does not act on S~ by a signed permutation"
            + (f": {detail}" if detail else "")
        )


def perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def cycle_notation(perm):
    seen = [False] * len(perm)
    cycles = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        j = perm[start]
        while j != start:
            cyc.append(j)
            seen[j] = True
            j = perm[j]
        if len(cyc) > 1:
            cycles.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(cycles) if cycles else "id"


@dataclass
class GaloisElement:
    frobenius_l: int
    perm: tuple
    eps: tuple          # normalized so eps[0] = +1
    eps_raw: tuple      # diagonal signs of d_{sigma(0)} B_sigma as found
    signed_perm: list   # integer matrix with entries in {0, +-1}

    def cycles(self):
        return cycle_notation(self.perm)

    def is_identity(self):
        return self.perm == tuple(range(len(self.perm))) and all(e == 1 for e in self.eps)


@dataclass
class GaloisGroup:
    conductor: int
    elements: list
    table: dict  # (index, index) -> index in `elements`

    @property
    def order(self):
        return len(self.elements)

    def element_orders(self):
        out = []
        for i in range(self.order):
            k, j = 1, i
            ident = next(n for n, g in enumerate(self.elements) if g.is_identity())
            while j != ident:
                j = self.table[(j, i)]
                k += 1
            out.append(k)
        return out

    def structure(self):
        """Name of the (abelian) group: '1', 'Z2', 'Z3', 'Z4', 'Z2xZ2', ..."""
        n = self.order
        if n == 1:
            return "1"
        orders = sorted(self.element_orders(), reverse=True)
        if orders[0] == n:
            return f"Z{n}"
        if n == 4:
            return "Z2xZ2"
        # generic invariant-factor name for small abelian groups
        return "x".join(f"Z{o}" for o in orders if o > 1)

    def inverse_index(self, i):
        ident = next(n for n, g in enumerate(self.elements) if g.is_identity())
        return next(j for j in range(self.order) if self.table[(i, j)] == ident)


def _minimized_entries(stilde):
    return [[x.minimize_conductor() for x in row] for row in stilde.entries]


def fusion_field_conductor(stilde):
    """Smallest N with every eigenvalue lambda_{ij} (equivalently s~_{ij}) in Q(zeta_N)."""
    ent = _minimized_entries(stilde)
    m = 1
    for row in ent:
        for x in row:
            m = lcm(m, x.n)
    for d in sorted(set(_div(m))):
        if d % 4 == 2:
            continue
        if all(
            all(x.galois_apply(l % x.n if x.n > 1 else 1) == x for row in ent for x in row)
            for l in units_mod(m)
            if l % d == 1 % d
        ):
            return d
    return m


def _div(n):
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def galois_group(stilde):
    """All signed-permutation actions sigma_l, deduplicated and grouped."""
    n = stilde.rank
    ent = _minimized_entries(stilde)
    cond = fusion_field_conductor(stilde)
    dims = [ent[i][0] for i in range(n)]
    dsq_inv = stilde.dsq().inverse()
    seen = {}
    reps = []  # (l, perm, eps_raw, signed_perm)
    for l in units_mod(cond):
        sig = [[x.galois_apply(l % x.n if x.n > 1 else 1) for x in row] for row in ent]
        conj_s = [[ent[i][j].conj() for j in range(n)] for i in range(n)]
        c_full = mat_mul(conj_s, sig)  # = D^2 B_sigma P_sigma
        # locate the unique nonzero entry of each column
        perm = [None] * n
        for k in range(n):
            nz = [j for j in range(n) if not c_full[j][k].is_zero()]
            if len(nz) != 1:
                raise NotSignedPermutation(l, f"column {k} has {len(nz)} nonzero entries")
            perm[k] = nz[0]
        if sorted(perm) != list(range(n)):
            raise NotSignedPermutation(l, "pattern is not a permutation")
        d_s0 = dims[perm[0]]
        scale = d_s0 * dsq_inv
        eps_raw = [None] * n
        signed = [[0] * n for _ in range(n)]
        for k in range(n):
            v = c_full[perm[k]][k] * scale
            if v == ONE:
                sgn = 1
            elif v == -ONE:
                sgn = -1
            else:
                raise NotSignedPermutation(l, f"entry at ({perm[k]},{k}) is {v}")
            eps_raw[perm[k]] = sgn
            signed[perm[k]][k] = sgn
        key = (tuple(perm), tuple(eps_raw))
        if key in seen:
            continue
        seen[key] = l
        flip = -1 if eps_raw[0] == -1 else 1
        eps = tuple(e * flip for e in eps_raw)
        reps.append(GaloisElement(l, tuple(perm), eps, tuple(eps_raw), signed))
    reps.sort(key=lambda g: g.frobenius_l)
    table = {}
    for i, g in enumerate(reps):
        for j, h in enumerate(reps):
            lij = (g.frobenius_l * h.frobenius_l) % cond
            match = [
                k0 for k0, gg in enumerate(reps)
                if _same_action(ent, gg.frobenius_l, lij, cond)
            ]
            if len(match) != 1:
                raise NotSignedPermutation(lij, "composition does not land in the group")
            table[(i, j)] = match[0]
    group = GaloisGroup(cond, reps, table)
    _assert_group(group)
    return group


def _same_action(ent, l1, l2, cond):
    return all(
        x.galois_apply(l1 % x.n if x.n > 1 else 1) == x.galois_apply(l2 % x.n if x.n > 1 else 1)
        for row in ent
        for x in row
    )


def _assert_group(group):
    # abelian and the permutation map is injective
    perms = [g.perm for g in group.elements]
    if len(set(perms)) != len(perms):
        raise NotSignedPermutation(-1, "permutation map is not injective")
    for i in range(group.order):
        for j in range(group.order):
            if group.table[(i, j)] != group.table[(j, i)]:
                raise NotSignedPermutation(-1, "group is not abelian")


def verify_action_identities(group, stilde):
    """Exact checks of the entry identities and |s~| orbit constancy."""
    report = Report("galois-action-identities")
    n = stilde.rank
    ent = _minimized_entries(stilde)
    dims = [ent[i][0] for i in range(n)]
    for gi, g in enumerate(group.elements):
        l = g.frobenius_l
        d_s0 = dims[g.perm[0]]
        sig = [[x.galois_apply(l % x.n if x.n > 1 else 1) for x in row] for row in ent]
        inv = group.elements[group.inverse_index(gi)]
        perm_inv = [0] * n
        for k in range(n):
            perm_inv[g.perm[k]] = k
        ok5 = all(
            sig[j][k] * d_s0 == rational(g.eps_raw[g.perm[k]]) * ent[j][g.perm[k]]
            for j in range(n)
            for k in range(n)
        )
        report.add(f"l={l}: sigma(s~) = B P action", ok5)
        ok6 = all(
            ent[j][k]
            == rational(g.eps[g.perm[j]] * g.eps[k]) * ent[g.perm[j]][perm_inv[k]]
            for j in range(n)
            for k in range(n)
        )
        report.add(f"l={l}: entry symmetry under (j,k) -> (sigma(j), sigma^-1(k))", ok6)
        ok7 = all(
            inv.eps[perm_inv[k]] == g.eps[g.perm[0]] * g.eps[0] * g.eps[k] for k in range(n)
        )
        report.add(f"l={l}: inverse-element sign relation", ok7)
        ok_orbit = all(
            ent[j][k] * ent[j][k].conj()
            == ent[g.perm[j]][perm_inv[k]] * ent[g.perm[j]][perm_inv[k]].conj()
            for j in range(n)
            for k in range(n)
        )
        report.add(f"l={l}: |s~| constant on orbits", ok_orbit)
    return report


def parity_check(group, stilde):
    """Sign-product laws: prod_i eps_i = (-1)^sigma (even rank), with the exact
    total-order twist for odd rank."""
    report = Report("galois-parity")
    n = stilde.rank
    even = n % 2 == 0
    if not even:
        delta, sq_sign = exact_total_order(stilde)
        # canonical branch: positive real (self-dual) or positive imaginary part
        v = delta.embed(80)
        import mpmath
        if (sq_sign == 1 and mpmath.re(v) < 0) or (sq_sign == -1 and mpmath.im(v) < 0):
            delta = -delta
        delta_min = delta.minimize_conductor()
        dims = [stilde.entries[i][0] for i in range(n)]
    for g in group.elements:
        prod = 1
        for e in g.eps_raw:
            prod *= e
        sgn = perm_sign(g.perm)
        if even:
            report.add(f"l={g.frobenius_l}: prod eps = sign(sigma)", prod == sgn)
        else:
            l = g.frobenius_l
            d_s0 = dims[g.perm[0]].minimize_conductor()
            img = delta_min.galois_apply(l % delta_min.n if delta_min.n > 1 else 1)
            ratio = img * d_s0 * delta_min.inverse()
            if ratio == ONE:
                eps_sigma = 1
            elif ratio == -ONE:
                eps_sigma = -1
            else:
                report.add(f"l={l}: sigma(D) = +-D/d_sigma(0)", False, f"ratio {ratio}")
                continue
            report.add(f"l={l}: sigma(D) = +-D/d_sigma(0)", True)
            report.add(
                f"l={l}: prod eps = eps_sigma * sign(sigma)", prod == eps_sigma * sgn
            )
    return report


def twist_fixedpoint_sum(sym, g):
    """sum_j eps_{sigma(j)} s~_{j,sigma(j)} / (theta_j theta_sigma(j))
    = D_- sum_{fixed i} theta_i eps_{sigma(i)}, exactly."""
    report = Report("twist-fixedpoint-sum")
    n = sym.rank
    s = sym.stilde.entries
    theta = sym.twists.theta
    _, dminus = gauss_sums(sym)
    lhs = ZERO
    for j in range(n):
        k = g.perm[j]
        term = rational(g.eps[k]) * s[j][k] * (theta[j] * theta[k]).inverse()
        lhs = lhs + term
    rhs = ZERO
    for i in range(n):
        if g.perm[i] == i:
            rhs = rhs + theta[i] * rational(g.eps[i])
    rhs = dminus * rhs
    fixed_free = all(g.perm[i] != i for i in range(n))
    report.add("fixed-point twist sum", lhs == rhs)
    if fixed_free:
        report.add("fixed-point free: sum vanishes", lhs == ZERO)
    return report


def exact_total_order_from_symbol(sym):
    """Exact D in Q(zeta) using D = D_+ e^{-pi i c / 4}; verified against D^2."""
    from .cyclo import phase

    c = central_charge(sym)
    if sym.s00_sign == -1:
        c = (c - 4) % 8
    dplus, _ = gauss_sums(sym)
    z = phase(-c.numerator, 4 * c.denominator)
    d_exact = dplus * z
    if d_exact * d_exact != sym.stilde.dsq():
        raise ValueError("exact total order reconstruction failed")
    return d_exact.minimize_conductor()


def modular_data_conductor(sym):
    """Minimal N with all s~, D, theta in Q(zeta_N) and ord(T) | N; also checks
    sigma_l(T) = T^l and sigma_l(S) = S (signed permutation) for all units l."""
    d_exact = exact_total_order_from_symbol(sym)
    n0 = d_exact.n
    ent = _minimized_entries(sym.stilde)
    for row in ent:
        for x in row:
            n0 = lcm(n0, x.n)
    theta = [t.minimize_conductor() for t in sym.twists.theta]
    for t in theta:
        n0 = lcm(n0, t.n)
    t_order = sym.twists.order()
    if t_order is None:
        raise ValueError("twists are not roots of unity")
    cond = lcm(n0, t_order)
    assert t_order == 1 or cond % t_order == 0
    # sigma_l(T) = T^l
    for l in units_mod(cond):
        for t in theta:
            if t.galois_apply(l % t.n if t.n > 1 else 1) != t**l:
                raise ValueError(f"sigma_{l}(T) != T^{l}")
    # sigma_l(S) = S * signed permutation, with S = S~/D exactly
    n = sym.rank
    d_inv = d_exact.inverse()
    s_norm = [[ent[i][j] * d_inv for j in range(n)] for i in range(n)]
    for l in units_mod(cond):
        sig = [
            [x.galois_apply(l % x.minimize_conductor().n if x.minimize_conductor().n > 1 else 1)
             for x in row]
            for row in [[y.minimize_conductor() for y in r] for r in s_norm]
        ]
        m = mat_mul([[s_norm[i][j].conj() for j in range(n)] for i in range(n)], sig)
        for k in range(n):
            nz = [j for j in range(n) if not m[j][k].is_zero()]
            if len(nz) != 1 or m[nz[0]][k] not in (ONE, -ONE):
                raise ValueError(f"sigma_{l}(S) is not S times a signed permutation")
    return cond
