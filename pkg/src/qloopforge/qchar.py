"""Rational l-weights, Y-monomials and q-character combinatorics.

An l-weight is recorded as a pair of coprime monic polynomials (P, Q) in 1/z
together with an overall sign s, standing for the pair of expansions

    kappa^{pm}(z) = s * q^(deg P - deg Q)
                    * [ P(q^-2/z) Q(1/z) / (P(1/z) Q(q^-2/z)) ]_{|z|^{pm 1} << 1}.

The combinatorial shadow of such a weight is the Laurent monomial
Y^(nu+ - nu-) in formal variables Y_x indexed by spectral points, and the
shift operators Gamma_{m,a} act on root multisets by sliding an adjacent pair
(a q^-2m, a q^(2-2m)) up to (a, a q^2).

Everything here is exact: points live on declared q-power orbits
(:class:`~qloopforge.scalar.SpectralPoint`), so recognizing the roots of a
reconstructed rational weight is orbit matching, never numerical root finding.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field as dfield
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import sympy

from . import linalg
from .formal import AT_INF, AT_ZERO, RatFunc, Series
from .loopmod import DrinfeldPoly
from .scalar import SpectralPoint

__all__ = [
    "YMonomial", "LWeightRational", "AdjacencyRecord",
    "monomial_of", "monomial_ratfunc",
    "h_shift_ratfunc", "h_shift_series", "h_monomial",
    "a_shift_ratfunc", "a_shift_series", "a_monomial",
    "gamma_apply", "multiset_equivalent",
    "lweight_ratfunc", "lweight_series", "reconstruct_lweight",
    "ReconstructionError", "classical_weight", "is_l_dominant",
    "is_t_dominant", "m1_t_dominance_criterion",
]

Multiset = Dict[SpectralPoint, int]


# ---------------------------------------------------------------------------
# Y-monomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class YMonomial:
    """A Laurent monomial in the variables Y_x, x a spectral point.

    Stored as a sorted tuple of (point, nonzero exponent) pairs so instances
    are hashable and equality is canonical.
    """

    exps: Tuple[Tuple[SpectralPoint, int], ...] = ()

    def __post_init__(self):
        cleaned = tuple(sorted((p, e) for p, e in self.exps if e != 0))
        object.__setattr__(self, "exps", cleaned)

    @staticmethod
    def from_dict(d: Mapping[SpectralPoint, int]) -> "YMonomial":
        return YMonomial(tuple(d.items()))

    def as_dict(self) -> Dict[SpectralPoint, int]:
        return dict(self.exps)

    def exponent(self, p: SpectralPoint) -> int:
        return dict(self.exps).get(p, 0)

    def __mul__(self, other: "YMonomial") -> "YMonomial":
        d = self.as_dict()
        for p, e in other.exps:
            d[p] = d.get(p, 0) + e
        return YMonomial.from_dict(d)

    def __pow__(self, n: int) -> "YMonomial":
        return YMonomial(tuple((p, e * n) for p, e in self.exps))

    def inverse(self) -> "YMonomial":
        return self ** -1

    def __str__(self) -> str:
        if not self.exps:
            return "1"
        parts = []
        for p, e in self.exps:
            parts.append(f"Y[{p}]" if e == 1 else f"Y[{p}]^{e}")
        return "*".join(parts)


def monomial_ratfunc(sf, mono: YMonomial) -> RatFunc:
    """The rational weight of a monomial under Y_x -> q (z - x/q^2)/(z - x)."""
    q = sf.q
    zmap: Dict[object, int] = {}
    total = 0
    for p, e in mono.exps:
        v = sf.point_value(p)
        zmap[v / q**2] = zmap.get(v / q**2, 0) + e
        zmap[v] = zmap.get(v, 0) - e
        total += e
    num = {v: m for v, m in zmap.items() if m > 0}
    den = {v: -m for v, m in zmap.items() if m < 0}
    return RatFunc.from_factors(sf, q**total, num, den)


# ---------------------------------------------------------------------------
# rational l-weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LWeightRational:
    """Coprime Drinfeld pair (P, Q) with an overall sign."""

    P: DrinfeldPoly
    Q: DrinfeldPoly
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if set(self.P.roots) & set(self.Q.roots):
            raise ValueError("P and Q must have disjoint root supports")

    def __str__(self) -> str:
        def side(poly):
            return "*".join(f"(1-({p})/z)" for p in poly.roots) or "1"
        s = "-" if self.sign < 0 else ""
        return f"{s}q^{self.P.degree - self.Q.degree}*{side(self.P)}/{side(self.Q)}"


def monomial_of(lw: LWeightRational) -> YMonomial:
    d: Dict[SpectralPoint, int] = {}
    for p in lw.P.roots:
        d[p] = d.get(p, 0) + 1
    for p in lw.Q.roots:
        d[p] = d.get(p, 0) - 1
    return YMonomial.from_dict(d)


def lweight_ratfunc(sf, lw: LWeightRational) -> RatFunc:
    """The exact rational function whose one-sided expansions are kappa^pm."""
    q = sf.q
    num: Dict[object, int] = {}
    den: Dict[object, int] = {}
    for v in lw.P.root_values(sf):
        num[v / q**2] = num.get(v / q**2, 0) + 1
        den[v] = den.get(v, 0) + 1
    for v in lw.Q.root_values(sf):
        num[v] = num.get(v, 0) + 1
        den[v / q**2] = den.get(v / q**2, 0) + 1
    unit = lw.sign * q ** (lw.P.degree - lw.Q.degree)
    return RatFunc.from_factors(sf, unit, num, den)


def lweight_series(sf, lw: LWeightRational, sign: int, window: int) -> Series:
    return lweight_ratfunc(sf, lw).to_series(AT_INF if sign > 0 else AT_ZERO,
                                             window)


def classical_weight(lw: LWeightRational) -> int:
    return lw.P.degree - lw.Q.degree


def is_l_dominant(lws: Sequence[LWeightRational]) -> bool:
    """All weights share one positive numerator degree and have trivial Q."""
    if not lws:
        return False
    degs = {lw.P.degree for lw in lws}
    return (all(lw.Q.degree == 0 for lw in lws)
            and len(degs) == 1 and degs != {0})


# ---------------------------------------------------------------------------
# shift factors
# ---------------------------------------------------------------------------

def h_shift_ratfunc(sf, m: int, a: SpectralPoint) -> RatFunc:
    """(z - a/q^2)(z - a q^(2-2m)) / ((z - a q^2)(z - a q^(-2m-2)))."""
    if m < 1:
        raise ValueError("the shift index m must be a positive integer")
    num: Dict[object, int] = {}
    den: Dict[object, int] = {}
    for p in (a.shift(-2), a.shift(2 - 2 * m)):
        v = sf.point_value(p)
        num[v] = num.get(v, 0) + 1
    for p in (a.shift(2), a.shift(-2 * m - 2)):
        v = sf.point_value(p)
        den[v] = den.get(v, 0) + 1
    return RatFunc.from_factors(sf, sf.one, num, den)


def h_shift_series(sf, m: int, a: SpectralPoint, sign: int, window: int) -> Series:
    return h_shift_ratfunc(sf, m, a).to_series(
        AT_INF if sign > 0 else AT_ZERO, window)


def h_monomial(m: int, a: SpectralPoint) -> YMonomial:
    """Y_{a q^-2m}^-1 Y_{a q^(2-2m)}^-1 Y_a Y_{a q^2}; identity for m = 0."""
    d: Dict[SpectralPoint, int] = {}
    for p, e in ((a.shift(-2 * m), -1), (a.shift(2 - 2 * m), -1),
                 (a, 1), (a.shift(2), 1)):
        d[p] = d.get(p, 0) + e
    return YMonomial.from_dict(d)


def a_shift_ratfunc(sf, a: SpectralPoint) -> RatFunc:
    """q^2 (z - a/q^2)/(z - a q^2)."""
    va = sf.point_value(a)
    return RatFunc.from_factors(sf, sf.q**2, {va / sf.q**2: 1}, {va * sf.q**2: 1})


def a_shift_series(sf, a: SpectralPoint, sign: int, window: int) -> Series:
    return a_shift_ratfunc(sf, a).to_series(AT_INF if sign > 0 else AT_ZERO,
                                            window)


def a_monomial(a: SpectralPoint) -> YMonomial:
    return YMonomial(((a, 1), (a.shift(2), 1)))


# ---------------------------------------------------------------------------
# Gamma moves on root multisets
# ---------------------------------------------------------------------------

def _clean_multiset(nu: Mapping[SpectralPoint, int]) -> Multiset:
    out: Multiset = {}
    for p, c in nu.items():
        if c < 0:
            raise ValueError(f"negative multiplicity at {p}")
        if c:
            out[p] = c
    return out


def gamma_apply(m: int, a: SpectralPoint, nu: Mapping[SpectralPoint, int]) -> Multiset:
    """Slide the adjacent pair at a q^-2m up to a: nu - d_{aq^-2m} - d_{aq^(2-2m)}
    + d_a + d_{aq^2}.  Requires both source points in the support of nu."""
    out = _clean_multiset(nu)
    lo, hi = a.shift(-2 * m), a.shift(2 - 2 * m)
    if out.get(lo, 0) < 1 or out.get(hi, 0) < 1:
        raise ValueError(f"multiset lacks the adjacent pair at {lo}, {hi}")
    for p, e in ((lo, -1), (hi, -1), (a, 1), (a.shift(2), 1)):
        c = out.get(p, 0) + e
        if c:
            out[p] = c
        else:
            out.pop(p, None)
    return out


def _multiset_key(nu: Multiset):
    return tuple(sorted(((p.base, p.k), c) for p, c in nu.items()))


def _orbit_counts(nu: Multiset) -> Dict[Tuple[str, int], int]:
    out: Dict[Tuple[str, int], int] = {}
    for p, c in nu.items():
        key = (p.base, p.k % 2)
        out[key] = out.get(key, 0) + c
    return out


def multiset_equivalent(nu: Mapping[SpectralPoint, int],
                        nu2: Mapping[SpectralPoint, int],
                        depth: int = 6, margin: int = 2) -> bool:
    """Breadth-first search for a chain of Gamma moves of length <= depth.

    A negative answer is only a semi-decision: the chain length is capped and
    the slid pairs are confined to the q^2-hull of the two supports widened by
    ``margin`` steps.  Total degree and per-orbit counts are conserved by
    every move, so mismatches there give certain negatives.
    """
    start = _clean_multiset(nu)
    goal = _clean_multiset(nu2)
    if sum(start.values()) != sum(goal.values()):
        return False
    if _orbit_counts(start) != _orbit_counts(goal):
        return False
    goal_key = _multiset_key(goal)
    if _multiset_key(start) == goal_key:
        return True
    hull: Dict[str, Tuple[int, int]] = {}
    for p in list(start) + list(goal):
        lo, hi = hull.get(p.base, (p.k, p.k))
        hull[p.base] = (min(lo, p.k), max(hi, p.k))
    seen = {_multiset_key(start)}
    frontier = deque([(start, 0)])
    while frontier:
        cur, d = frontier.popleft()
        if d >= depth:
            continue
        for b in list(cur):
            if cur.get(b.shift(2), 0) < 1 or cur.get(b, 0) < 1:
                continue
            lo, hi = hull[b.base]
            lo -= 2 * margin
            hi += 2 * margin
            lo += (b.k - lo) % 2  # stay on the pair's q^2-lattice
            for k in range(lo, hi - 1, 2):
                if k == b.k:
                    continue
                # Gamma_{m, a} with a = b q^(k - b.k), m = (k - b.k)/2... the
                # move just relocates the pair, so enumerate targets directly
                nxt = dict(cur)
                for p, e in ((b, -1), (b.shift(2), -1),
                             (SpectralPoint(b.base, k), 1),
                             (SpectralPoint(b.base, k + 2), 1)):
                    c = nxt.get(p, 0) + e
                    if c:
                        nxt[p] = c
                    else:
                        nxt.pop(p, None)
                key = _multiset_key(nxt)
                if key == goal_key:
                    return True
                if key not in seen:
                    seen.add(key)
                    frontier.append((nxt, d + 1))
    return False


# ---------------------------------------------------------------------------
# reconstruction of rational weights from their expansions
# ---------------------------------------------------------------------------

class ReconstructionError(ValueError):
    """The expansions do not come from a rational weight within the bound."""


def _factor_roots(sf, coeffs: Dict[int, object]):
    """Factor a z-polynomial with scalar coefficients into spectral-point
    roots; returns {point: multiplicity} or raises if a factor is not linear
    with a root on a declared q-power orbit."""
    z = sympy.Dummy("z")
    expr = sympy.together(
        sympy.Add(*(c.as_expr() * z**e for e, c in coeffs.items())))
    num, _den = sympy.fraction(sympy.cancel(expr))
    roots: Dict[SpectralPoint, int] = {}
    _const, factors = sympy.factor_list(sympy.Poly(num, z))
    for fac, mult in factors:
        poly = sympy.Poly(fac, z)
        if poly.degree() == 0:
            continue
        if poly.degree() != 1:
            raise ReconstructionError(
                "denominator or numerator has a non-linear factor in z")
        lead, tail = poly.all_coeffs()
        root_expr = sympy.cancel(-tail / lead)
        if root_expr == 0:
            raise ReconstructionError("root at z = 0 is not a spectral point")
        try:
            val = sf.ring.from_expr(root_expr)
        except ValueError:
            raise ReconstructionError(
                f"root {root_expr} is not in the scalar field") from None
        pt = sf.point_from_value(val)
        if pt is None:
            raise ReconstructionError(
                f"root {root_expr} is off the declared q-power orbits")
        roots[pt] = roots.get(pt, 0) + mult
    return roots


def _split_pq(zero_roots: Multiset, pole_roots: Multiset):
    """Recover the coprime (P, Q) root multisets from the reduced zeros and
    poles of sign * q^d * P(q^-2/z)Q(1/z) / (P(1/z)Q(q^-2/z)).

    On each orbit/parity class, with g(k) = mult_P(k) - mult_Q(k) and
    f(k) = zeros(k) - poles(k), the display forces g(k+2) = g(k) + f(k) with g
    vanishing outside a finite range, so g telescopes and the coprime split is
    mult_P = max(g, 0), mult_Q = max(-g, 0)."""
    f: Dict[SpectralPoint, int] = dict(zero_roots)
    for p, c in pole_roots.items():
        f[p] = f.get(p, 0) - c
    classes: Dict[Tuple[str, int], List[SpectralPoint]] = {}
    for p in f:
        classes.setdefault((p.base, p.k % 2), []).append(p)
    proots: List[SpectralPoint] = []
    qroots: List[SpectralPoint] = []
    for (base, _parity), pts in classes.items():
        ks = sorted(p.k for p in pts)
        fk = {p.k: f[p] for p in pts}
        g = 0
        for k in range(ks[0], ks[-1] + 2, 2):
            g += fk.get(k, 0)
            point = SpectralPoint(base, k + 2)
            if g > 0:
                proots.extend([point] * g)
            elif g < 0:
                qroots.extend([point] * -g)
        if g != 0:
            raise ReconstructionError(
                "zero/pole pattern does not telescope to a Drinfeld pair")
    return DrinfeldPoly(tuple(proots)), DrinfeldPoly(tuple(qroots))


def reconstruct_lweight(sf, kp: Series, km: Series,
                        degree_bound: int) -> LWeightRational:
    """Find the unique rational weight with deg P, deg Q <= degree_bound whose
    two one-sided expansions match kp (at infinity) and km (at zero) exactly
    on their windows.  Raises ReconstructionError if none exists."""
    if kp.direction != AT_INF or km.direction != AT_ZERO:
        raise ValueError("expected an at-infinity and an at-zero expansion")
    if min(kp.window, km.window) < 2 * degree_bound + 2:
        raise ValueError("windows must be at least 2*degree_bound + 2")
    B = 2 * degree_bound
    # unknowns: numerator n_0..n_B then denominator d_0..d_B of n(z)/d(z)
    rows: List[List[object]] = []
    zero, one = sf.zero, sf.one

    def n_col(e: int) -> List[object]:
        return [one if j == e else zero for j in range(B + 1)]

    for r in range(kp.window + 1):
        # coefficient of z^(B - r) in d(z) kp(z) - n(z)
        e = B - r
        row = [-c for c in n_col(e)] if 0 <= e <= B else [zero] * (B + 1)
        row += [kp.coeffs.get(k - e, zero) if k - e >= 0 else zero
                for k in range(B + 1)]
        rows.append(row)
    for e in range(km.window + 1):
        # coefficient of z^e in d(z) km(z) - n(z)
        row = [-c for c in n_col(e)] if e <= B else [zero] * (B + 1)
        row += [km.coeffs.get(e - k, zero) if e - k >= 0 else zero
                for k in range(B + 1)]
        rows.append(row)
    kernel = linalg.nullspace(rows, zero, one)
    sol = next((v for v in kernel if any(v[B + 1:])), None)
    if sol is None:
        raise ReconstructionError("no rational form within the degree bound")
    ncoeffs = {e: c for e, c in enumerate(sol[:B + 1]) if c}
    dcoeffs = {e: c for e, c in enumerate(sol[B + 1:]) if c}
    if not ncoeffs:
        raise ReconstructionError("expansions match only the zero function")
    zeros = _factor_roots(sf, ncoeffs)
    poles = _factor_roots(sf, dcoeffs)
    for p in set(zeros) & set(poles):
        c = min(zeros[p], poles[p])
        zeros[p] -= c
        poles[p] -= c
    P, Q = _split_pq({p: c for p, c in zeros.items() if c},
                     {p: c for p, c in poles.items() if c})
    if max(P.degree, Q.degree) > degree_bound:
        raise ReconstructionError("recovered degrees exceed the bound")
    d = P.degree - Q.degree
    const = kp.coeffs.get(0, zero)
    if const == sf.qpow(d):
        sign = 1
    elif const == -sf.qpow(d):
        sign = -1
    else:
        raise ReconstructionError(
            "constant term is not +-q^(deg P - deg Q)")
    lw = LWeightRational(P, Q, sign)
    rf = lweight_ratfunc(sf, lw)
    if (rf.to_series(AT_INF, kp.window) != kp
            or rf.to_series(AT_ZERO, km.window) != km):
        raise ReconstructionError("candidate weight fails exact re-expansion")
    return lw


# ---------------------------------------------------------------------------
# adjacency and t-dominance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdjacencyRecord:
    """One observed transition between l-weight blocks.

    ``kind`` is "K" for a Cartan-type current (carries the shift index m) or
    "X" for a raising/lowering current; ``sign`` is the current's sign and
    ``a`` the unique support point of the connecting distribution.
    """

    source: int
    target: int
    kind: str
    sign: int
    a: SpectralPoint
    m: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("K", "X"):
            raise ValueError("kind must be 'K' or 'X'")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.kind == "K" and (self.m is None or self.m < 1):
            raise ValueError("K-adjacency needs a positive shift index m")


def is_t_dominant(lws: Sequence[LWeightRational],
                  adj: Sequence[AdjacencyRecord]) -> bool:
    """Check the root conditions P_target(1/(a q^-(m+-m))) =
    P_target(1/(a q^(2-(m+-m)))) = 0 for every K-adjacency."""
    if not is_l_dominant(lws):
        raise ValueError("t-dominance is only defined for l-dominant data")
    for rec in adj:
        if rec.kind != "K":
            continue
        roots = set(lws[rec.target].P.roots)
        e = rec.m + rec.sign * rec.m
        if rec.a.shift(-e) not in roots or rec.a.shift(2 - e) not in roots:
            return False
    return True


def m1_t_dominance_criterion(lws: Sequence[LWeightRational],
                             adj: Sequence[AdjacencyRecord]) -> bool:
    """Sufficient condition: if every K-adjacency has shift index 1 and its
    support point is itself a root of the target's P, the module is
    t-dominant."""
    if not is_l_dominant(lws):
        raise ValueError("t-dominance is only defined for l-dominant data")
    for rec in adj:
        if rec.kind != "K":
            continue
        if rec.m != 1 or rec.a not in set(lws[rec.target].P.roots):
            return False
    return True
