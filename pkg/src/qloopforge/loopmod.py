"""Finite-dimensional modules over the deformed loop algebra of sl2.

A module is stored as a :class:`GradedRep`:

* the raising/lowering currents act as delta-supported operator
  distributions: finitely many (point, derivative order) components, each a
  scalar matrix;
* the Cartan currents act through a single diagonal of exact rational
  functions; the plus current is its expansion at infinity and the minus
  current its expansion at zero.

Every construction here (the basic two-dimensional module, tensor products
via the current coproduct, cyclic closures) preserves that shape, and none
of the action matrices are trusted a priori: `check_loop_relations` verifies
the full defining presentation on a finite coefficient window.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .dist import DeltaFactor, MDist, RFFactor, Term, monomial_dist
from .formal import (AT_INF, AT_ZERO, FormalDist, RatFunc, Series,
                     delta_coeff, delta_mul, g_ratfunc)
from .scalar import SpectralPoint

__all__ = [
    "DrinfeldPoly", "GradedRep", "LWeightBlock", "RelationReport",
    "evaluation_module", "tensor", "check_loop_relations",
    "lweight_decompose", "spectrum",
    "highest_lweight_series", "lowest_lweight_series",
]

Matrix = List[List[object]]
Components = Dict[Tuple[object, int], Matrix]

# the Cartan integer of the single node
_CARTAN = 2


@dataclass(frozen=True)
class DrinfeldPoly:
    """A monic polynomial in 1/z given by its multiset of roots."""

    roots: Tuple[SpectralPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "roots", tuple(sorted(self.roots)))

    @staticmethod
    def segment(a: SpectralPoint, n: int) -> "DrinfeldPoly":
        """The q-segment centered at a: roots a q^(n-1), a q^(n-3), ..."""
        return DrinfeldPoly(tuple(a.shift(n - 1 - 2 * k) for k in range(n)))

    @property
    def degree(self) -> int:
        return len(self.roots)

    def root_values(self, sf) -> List[object]:
        return [sf.point_value(p) for p in self.roots]


class GradedRep:
    """A finite-dimensional module with diagonal Cartan action."""

    def __init__(self, sf, dim: int, xp: Components, xm: Components,
                 k_diag: Sequence[RatFunc], grading: Sequence[int],
                 mode_window: int):
        self.sf = sf
        self.dim = dim
        self.xp = {k: m for k, m in xp.items() if _mat_nonzero(m)}
        self.xm = {k: m for k, m in xm.items() if _mat_nonzero(m)}
        self.k_diag = list(k_diag)
        self.grading = list(grading)
        self.mode_window = mode_window

    # -- mode matrices -----------------------------------------------------

    def x_mode(self, sign: int, r: int) -> Matrix:
        comps = self.xp if sign > 0 else self.xm
        out = _zeros(self.sf, self.dim)
        for (p, j), m in comps.items():
            c = delta_coeff(self.sf, p, j, -r)
            if not c:
                continue
            for i in range(self.dim):
                for k in range(self.dim):
                    if m[i][k]:
                        out[i][k] = out[i][k] + c * m[i][k]
        return out

    def k_mode(self, sign: int, n: int) -> Matrix:
        """Coefficient matrix of z**(-n) of the plus current (sign > 0) or
        of z**(+n) of the minus current (sign < 0), n >= 0."""
        if n < 0:
            raise ValueError("mode index must be >= 0")
        out = _zeros(self.sf, self.dim)
        for i, kap in enumerate(self.k_diag):
            if sign > 0:
                out[i][i] = kap.expand(AT_INF, -n, -n).get(-n, self.sf.zero)
            else:
                out[i][i] = kap.expand(AT_ZERO, n, n).get(n, self.sf.zero)
        return out

    def kappa_series(self, i: int, sign: int, window: int) -> Series:
        return self.k_diag[i].to_series(AT_INF if sign > 0 else AT_ZERO, window)

    def __repr__(self):
        return f"GradedRep(dim={self.dim}, grading={self.grading})"


def _zeros(sf, n: int) -> Matrix:
    return [[sf.zero] * n for _ in range(n)]


def _mat_nonzero(m: Matrix) -> bool:
    return any(any(row) for row in m)


# ---------------------------------------------------------------------------
# highest / lowest weight series
# ---------------------------------------------------------------------------

def _cp_ratfunc(sf, P: DrinfeldPoly, lowest: bool = False) -> RatFunc:
    """q^(deg P) * P(q^-2/z)/P(1/z) as an exact rational function of z
    (reciprocal for the lowest-weight variant)."""
    q = sf.q
    num: Dict[object, int] = {}
    den: Dict[object, int] = {}
    for v in P.root_values(sf):
        num[v / q**2] = num.get(v / q**2, 0) + 1
        den[v] = den.get(v, 0) + 1
    unit = q**P.degree
    if lowest:
        num, den = den, num
        unit = 1 / unit
    return RatFunc.from_factors(sf, unit, num, den)


def highest_lweight_series(sf, P: DrinfeldPoly, sign: int, window: int) -> Series:
    return _cp_ratfunc(sf, P).to_series(AT_INF if sign > 0 else AT_ZERO, window)


def lowest_lweight_series(sf, P: DrinfeldPoly, sign: int, window: int) -> Series:
    return _cp_ratfunc(sf, P, lowest=True).to_series(
        AT_INF if sign > 0 else AT_ZERO, window)


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------

def trivial_module(sf, mode_window: int = 6) -> GradedRep:
    """The one-dimensional module with constant Cartan action 1."""
    return GradedRep(sf, 1, {}, {}, [RatFunc.const(sf, sf.one)], [0], mode_window)


def _basic_module(sf, b, mode_window: int) -> GradedRep:
    """The two-dimensional module with Drinfeld root at the scalar b."""
    q = sf.q
    one, zero = sf.one, sf.zero
    xp = {(b, 0): [[zero, one], [zero, zero]]}
    xm = {(b, 0): [[zero, zero], [one, zero]]}
    k0 = RatFunc.from_factors(sf, q, {b / q**2: 1}, {b: 1})
    k1 = RatFunc.from_factors(sf, 1 / q, {b * q**2: 1}, {b: 1})
    return GradedRep(sf, 2, xp, xm, [k0, k1], [1, -1], mode_window)


def tensor(A: GradedRep, B: GradedRep, mode_window: Optional[int] = None) -> GradedRep:
    """Tensor product through the current coproduct at trivial central charge.

    The mixed terms multiply a rational Cartan factor into a delta-supported
    current; that product is the exact evaluation (with the product rule for
    derivative deltas) and requires the Cartan functions to be regular at
    the support points ("general position").
    """
    sf = A.sf
    if mode_window is None:
        mode_window = min(A.mode_window, B.mode_window)
    dim = A.dim * B.dim

    def idx(i1, i2):
        return i1 * B.dim + i2

    k_diag = [A.k_diag[i1] * B.k_diag[i2]
              for i1 in range(A.dim) for i2 in range(B.dim)]
    grading = [A.grading[i1] + B.grading[i2]
               for i1 in range(A.dim) for i2 in range(B.dim)]

    xp: Components = {}
    xm: Components = {}

    def add(comps, key, i, j, c):
        if not c:
            return
        if key not in comps:
            comps[key] = _zeros(sf, dim)
        comps[key][i][j] = comps[key][i][j] + c

    # x+ |-> x+ (x) 1 + k- (x) x+
    for (p, r), m in A.xp.items():
        for i1 in range(A.dim):
            for j1 in range(A.dim):
                if m[i1][j1]:
                    for i2 in range(B.dim):
                        add(xp, (p, r), idx(i1, i2), idx(j1, i2), m[i1][j1])
    for (p, r), m in B.xp.items():
        for i1 in range(A.dim):
            evald = delta_mul(FormalDist(sf, 2 * r + 6, {}, {(p, r): sf.one}),
                              A.k_diag[i1])
            for (p2, r2), c in evald.deltas.items():
                for i2 in range(B.dim):
                    for j2 in range(B.dim):
                        if m[i2][j2]:
                            add(xp, (p2, r2), idx(i1, i2), idx(i1, j2),
                                c * m[i2][j2])
    # x- |-> x- (x) k+ + 1 (x) x-
    for (p, r), m in A.xm.items():
        for i2 in range(B.dim):
            evald = delta_mul(FormalDist(sf, 2 * r + 6, {}, {(p, r): sf.one}),
                              B.k_diag[i2])
            for (p2, r2), c in evald.deltas.items():
                for i1 in range(A.dim):
                    for j1 in range(A.dim):
                        if m[i1][j1]:
                            add(xm, (p2, r2), idx(i1, i2), idx(j1, i2),
                                c * m[i1][j1])
    for (p, r), m in B.xm.items():
        for i1 in range(A.dim):
            for i2 in range(B.dim):
                for j2 in range(B.dim):
                    if m[i2][j2]:
                        add(xm, (p, r), idx(i1, i2), idx(i1, j2), m[i2][j2])

    return GradedRep(sf, dim, xp, xm, k_diag, grading, mode_window)


def _cyclic_closure(rep: GradedRep, start: int) -> List[List[object]]:
    """rref basis of the submodule generated by the basis vector ``start``."""
    sf = rep.sf
    ops = list(rep.xp.values()) + list(rep.xm.values())
    # diagonal Cartan modes can split mixed vectors: include enough of them
    for n in range(rep.dim + 2):
        ops.append(rep.k_mode(+1, n))
        ops.append(rep.k_mode(-1, n))
    v0 = [sf.one if i == start else sf.zero for i in range(rep.dim)]
    basis, pivots = linalg.rref([v0], sf.zero)
    work = list(basis)
    while work:
        v = work.pop()
        for m in ops:
            w = linalg.mat_vec(m, v)
            r = linalg.reduce_against(basis, pivots, w)
            if any(r):
                rows = basis + [r]
                basis, pivots = linalg.rref(rows, sf.zero)
                work.append(r)
    return basis, pivots


def _restrict(rep: GradedRep, basis: Matrix, pivots: Sequence[int]) -> GradedRep:
    """Restriction of the action to an invariant subspace in rref basis."""
    sf = rep.sf
    d = len(basis)

    def restrict_matrix(m: Matrix) -> Matrix:
        out = _zeros(sf, d)
        for k in range(d):
            w = linalg.mat_vec(m, basis[k])
            coords = [w[p] for p in pivots]
            # verify w really lies in the subspace
            check = list(w)
            for j, c in enumerate(coords):
                if c:
                    check = [x - c * y for x, y in zip(check, basis[j])]
            if any(check):
                raise ValueError("subspace is not invariant under the action")
            for j, c in enumerate(coords):
                out[j][k] = c
        return out

    k_diag = []
    for k in range(d):
        p = pivots[k]
        kap = rep.k_diag[p]
        for i, c in enumerate(basis[k]):
            if c and not (rep.k_diag[i] == kap):
                raise ValueError("basis vector mixes distinct Cartan diagonals")
        k_diag.append(kap)
    xp = {key: restrict_matrix(m) for key, m in rep.xp.items()}
    xm = {key: restrict_matrix(m) for key, m in rep.xm.items()}
    grading = [rep.grading[p] for p in pivots]
    return GradedRep(sf, d, xp, xm, k_diag, grading, rep.mode_window)


def evaluation_module(sf, n: int, a: SpectralPoint, mode_window: int = 6) -> GradedRep:
    """The (n+1)-dimensional module attached to the q-segment centered at a.

    Built as an ordered tensor product of two-dimensional modules followed by
    the cyclic closure of the top vector; the factor order is chosen
    computationally so that the closure has dimension n + 1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return _basic_module(sf, sf.point_value(a), mode_window)
    shifts = [n - 1 - 2 * k for k in range(n)]
    for order in (shifts, list(reversed(shifts))):
        rep = _basic_module(sf, sf.point_value(a.shift(order[0])), mode_window)
        for s in order[1:]:
            rep = tensor(rep, _basic_module(sf, sf.point_value(a.shift(s)),
                                            mode_window))
        basis, pivots = _cyclic_closure(rep, 0)
        if len(basis) == n + 1:
            return _restrict(rep, basis, pivots)
    raise ValueError("no factor order produced a closure of the right size")


# ---------------------------------------------------------------------------
# relation checking
# ---------------------------------------------------------------------------

OpDist = Dict[Tuple[int, int], MDist]


def _x_opdist(rep: GradedRep, sign: int, var: int) -> OpDist:
    sf = rep.sf
    comps = rep.xp if sign > 0 else rep.xm
    mono = tuple(1 if v == var else 0 for v in range(2))
    out: OpDist = {}
    for (p, r), m in comps.items():
        fac = DeltaFactor(p, mono, r)
        for i in range(rep.dim):
            for j in range(rep.dim):
                if m[i][j]:
                    d = MDist.term(sf, 2, m[i][j], [fac])
                    out[(i, j)] = out.get((i, j), MDist.zero(sf, 2)) + d
    return out


def _k_opdist(rep: GradedRep, sign: int, var: int) -> OpDist:
    sf = rep.sf
    mono = tuple(1 if v == var else 0 for v in range(2))
    direction = AT_INF if sign > 0 else AT_ZERO
    out: OpDist = {}
    for i, kap in enumerate(rep.k_diag):
        out[(i, i)] = MDist.term(sf, 2, sf.one, [RFFactor(kap, mono, direction)])
    return out


def _op_mul(sf, dim: int, A: OpDist, B: OpDist) -> OpDist:
    out: OpDist = {}
    for (i, k), da in A.items():
        for (k2, j), db in B.items():
            if k != k2:
                continue
            prod = da * db
            out[(i, j)] = out.get((i, j), MDist.zero(sf, 2)) + prod
    return out


def _op_scale(A: OpDist, d: MDist) -> OpDist:
    return {key: d * val for key, val in A.items()}


def _op_sub(sf, A: OpDist, B: OpDist) -> OpDist:
    out = dict(A)
    for key, val in B.items():
        out[key] = out.get(key, MDist.zero(sf, 2)) - val
    return out


def _op_equal(sf, dim: int, A: OpDist, B: OpDist, window: int):
    """None if equal on the window, else (entry, exponent, lhs, rhs)."""
    for i in range(dim):
        for j in range(dim):
            da = A.get((i, j), MDist.zero(sf, 2))
            db = B.get((i, j), MDist.zero(sf, 2))
            ga = da.window_grid(window)
            gb = db.window_grid(window)
            for e in set(ga) | set(gb):
                if ga.get(e, sf.zero) != gb.get(e, sf.zero):
                    return ((i, j), e, ga.get(e, sf.zero), gb.get(e, sf.zero))
    return None


@dataclass
class RelationReport:
    results: List[Tuple[str, bool, Optional[tuple]]] = dfield(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.results)

    def add(self, name: str, detail: Optional[tuple]):
        self.results.append((name, detail is None, detail))

    def lines(self) -> List[str]:
        return [f"{name}: {'PASS' if ok else 'FAIL ' + repr(d)}"
                for name, ok, d in self.results]


def check_loop_relations(rep: GradedRep, window: int) -> RelationReport:
    """Verify the full defining presentation (trivial central charge) as
    exact two-variable windowed coefficient identities."""
    sf = rep.sf
    dim = rep.dim
    rpt = RelationReport()
    q = sf.q

    kp1 = _k_opdist(rep, +1, 0)
    kp2 = _k_opdist(rep, +1, 1)
    km1 = _k_opdist(rep, -1, 0)
    km2 = _k_opdist(rep, -1, 1)

    # Cartan currents commute (like signs)
    rpt.add("k+k+ commute", _op_equal(
        sf, dim, _op_mul(sf, dim, kp1, kp2), _op_mul(sf, dim, kp2, kp1), window))
    rpt.add("k-k- commute", _op_equal(
        sf, dim, _op_mul(sf, dim, km1, km2), _op_mul(sf, dim, km2, km1), window))

    # opposite signs braid through the G factors (c = 2)
    gfac = (MDist.term(sf, 2, sf.one,
                       [RFFactor(g_ratfunc(sf, -1, _CARTAN), (1, -1), AT_ZERO)])
            * MDist.term(sf, 2, sf.one,
                         [RFFactor(g_ratfunc(sf, +1, _CARTAN), (1, -1), AT_ZERO)]))
    rpt.add("k-k+ braid", _op_equal(
        sf, dim, _op_mul(sf, dim, km1, kp2),
        _op_scale(_op_mul(sf, dim, kp2, km1), gfac), window))

    for sign, tag in ((+1, "+"), (-1, "-")):
        x1 = _x_opdist(rep, sign, 0)
        x2 = _x_opdist(rep, sign, 1)
        # G^(-sign)(z2/z1) k+(z1) x(z2) = x(z2) k+(z1)
        g = MDist.term(sf, 2, sf.one,
                       [RFFactor(g_ratfunc(sf, -sign, _CARTAN), (-1, 1), AT_ZERO)])
        lhs = _op_scale(_op_mul(sf, dim, kp1, x2), g)
        rhs = _op_mul(sf, dim, x2, kp1)
        rpt.add(f"k+x{tag}", _op_equal(sf, dim, lhs, rhs, window))
        # k-(z1) x(z2) = G^(-sign)(z1/z2) x(z2) k-(z1)
        g2 = MDist.term(sf, 2, sf.one,
                        [RFFactor(g_ratfunc(sf, -sign, _CARTAN), (1, -1), AT_ZERO)])
        lhs2 = _op_mul(sf, dim, km1, x2)
        rhs2 = _op_scale(_op_mul(sf, dim, x2, km1), g2)
        rpt.add(f"k-x{tag}", _op_equal(sf, dim, lhs2, rhs2, window))
        # (z1 - q^(2 sign) z2) x(z1) x(z2) = (q^(2 sign) z1 - z2) x(z2) x(z1)
        qq = q ** (2 * sign)
        p1 = monomial_dist(sf, 2, sf.one, (1, 0)) + monomial_dist(sf, 2, -qq, (0, 1))
        p2 = monomial_dist(sf, 2, qq, (1, 0)) + monomial_dist(sf, 2, -sf.one, (0, 1))
        lhs3 = _op_scale(_op_mul(sf, dim, x1, x2), p1)
        rhs3 = _op_scale(_op_mul(sf, dim, x2, x1), p2)
        rpt.add(f"x{tag}x{tag}", _op_equal(sf, dim, lhs3, rhs3, window))

    # [x+(z1), x-(z2)] = delta(z1/z2)(k+(z1) - k-(z2))/(q - 1/q)
    xp1 = _x_opdist(rep, +1, 0)
    xm2 = _x_opdist(rep, -1, 1)
    lhs = _op_sub(sf, _op_mul(sf, dim, xp1, xm2), _op_mul(sf, dim, xm2, xp1))
    pref = sf.one / (q - 1 / q)
    rhs: OpDist = {}
    dlt = DeltaFactor(sf.one, (1, -1), 0)
    for i, kap in enumerate(rep.k_diag):
        rhs[(i, i)] = (
            MDist.term(sf, 2, pref, [dlt, RFFactor(kap, (1, 0), AT_INF)])
            - MDist.term(sf, 2, pref, [dlt, RFFactor(kap, (0, 1), AT_ZERO)]))
    rpt.add("x+x-", _op_equal(sf, dim, lhs, rhs, window))
    return rpt


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------

@dataclass
class LWeightBlock:
    indices: List[int]
    kappa_plus: Series
    kappa_minus: Series
    kappa_rat: RatFunc
    rational_form: Optional[tuple] = None  # (P, Q, sign) once reconstructed


def lweight_decompose(rep: GradedRep, window: Optional[int] = None) -> List[LWeightBlock]:
    """Group the basis by equal Cartan diagonals; each group is one
    generalized eigenspace of the commuting Cartan modes."""
    sf = rep.sf
    n = rep.mode_window if window is None else window
    groups: List[Tuple[RatFunc, List[int]]] = []
    for i, kap in enumerate(rep.k_diag):
        for kap0, idxs in groups:
            if kap0 == kap:
                idxs.append(i)
                break
        else:
            groups.append((kap, [i]))
    blocks = [
        LWeightBlock(idxs, kap.to_series(AT_INF, n), kap.to_series(AT_ZERO, n), kap)
        for kap, idxs in groups
    ]
    blocks.sort(key=lambda b: [str(b.kappa_plus.coeffs.get(j, sf.zero))
                               for j in range(n + 1)])
    return blocks


def spectrum(rep: GradedRep) -> set:
    """Eigenvalues of the zeroth Cartan mode."""
    out = set()
    for kap in rep.k_diag:
        out.add(kap.expand(AT_INF, 0, 0).get(0, rep.sf.zero))
    return out
