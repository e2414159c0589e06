"""Multi-variable formal distributions with exact structural reduction.

A :class:`MDist` is a finite sum of terms; each term is a scalar coefficient
times a product of factors, where every factor depends on the formal
variables only through a single Laurent monomial u:

* ``RFFactor``: an exact rational function evaluated at u, together with the
  direction in which it is expanded (series in u, series in 1/u, or a
  Laurent polynomial where the direction is irrelevant);
* ``DeltaFactor``: delta^(r)(u / point) in the normalization of
  :mod:`.formal` (derivatives with respect to the point).

Products are reduced structurally before any windowed expansion: a delta
factor pins its monomial to its point, so every other factor sharing one of
its variables gets the substitution applied exactly (with the product rule
for derivative deltas).  Only after that reduction is a finite coefficient
window extracted; if a product has no finite windowed expansion (for
example two opposite-direction expansions of the same pole multiplied
together) the expansion raises instead of truncating silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .formal import AT_INF, AT_ZERO, RatFunc, delta_coeff

__all__ = ["RFFactor", "DeltaFactor", "Term", "MDist", "monomial_dist"]

Mono = Tuple[int, ...]


def _mono_sub(a: Mono, b: Mono, g: int) -> Mono:
    return tuple(x - g * y for x, y in zip(a, b))


@dataclass(frozen=True)
class RFFactor:
    rf: RatFunc
    mono: Mono
    direction: str  # AT_ZERO or AT_INF; ignored when rf is a Laurent polynomial

    def vars(self) -> Tuple[int, ...]:
        return tuple(i for i, e in enumerate(self.mono) if e)


@dataclass(frozen=True)
class DeltaFactor:
    point: object  # nonzero Scalar
    mono: Mono
    order: int

    def vars(self) -> Tuple[int, ...]:
        return tuple(i for i, e in enumerate(self.mono) if e)


@dataclass
class Term:
    coeff: object
    factors: Tuple

    def __iter__(self):
        return iter((self.coeff, self.factors))


class MDist:
    """A finite sum of factored terms over a fixed tuple of variables."""

    def __init__(self, sf, nvars: int, terms: Sequence[Term] = ()):
        self.sf = sf
        self.nvars = nvars
        self.terms: List[Term] = [t for t in terms if t.coeff]

    # -- construction ------------------------------------------------------

    @staticmethod
    def zero(sf, nvars: int) -> "MDist":
        return MDist(sf, nvars, [])

    @staticmethod
    def scalar(sf, nvars: int, c) -> "MDist":
        return MDist(sf, nvars, [Term(c, ())])

    @staticmethod
    def term(sf, nvars: int, coeff, factors) -> "MDist":
        return MDist(sf, nvars, [Term(coeff, tuple(factors))])

    def __add__(self, other: "MDist") -> "MDist":
        return MDist(self.sf, self.nvars, self.terms + other.terms)

    def __sub__(self, other: "MDist") -> "MDist":
        return self + other.scale(-self.sf.one)

    def scale(self, c) -> "MDist":
        return MDist(self.sf, self.nvars,
                     [Term(t.coeff * c, t.factors) for t in self.terms])

    def __mul__(self, other: "MDist") -> "MDist":
        out = []
        for t1 in self.terms:
            for t2 in other.terms:
                out.append(Term(t1.coeff * t2.coeff, t1.factors + t2.factors))
        return MDist(self.sf, self.nvars, out)

    # -- structural reduction ----------------------------------------------

    def reduce(self) -> "MDist":
        """Eliminate every delta/other-factor variable sharing exactly."""
        pending = list(self.terms)
        done: List[Term] = []
        while pending:
            term = pending.pop()
            if not term.coeff:
                continue
            step = _reduce_step(self.sf, term)
            if step is None:
                done.append(term)
            else:
                pending.extend(step)
        return MDist(self.sf, self.nvars, done)

    # -- windowed expansion --------------------------------------------------

    def window_grid(self, window: int) -> Dict[Mono, object]:
        grid: Dict[Mono, object] = {}
        for term in self.reduce().terms:
            _accumulate_term(self.sf, term, self.nvars, window, grid)
        return {e: c for e, c in grid.items() if c}

    def equal_on_window(self, other: "MDist", window: int) -> bool:
        a = self.window_grid(window)
        b = other.window_grid(window)
        for e in set(a) | set(b):
            if a.get(e, self.sf.zero) != b.get(e, self.sf.zero):
                return False
        return True

    def is_zero_on_window(self, window: int) -> bool:
        return not self.window_grid(window)


def monomial_dist(sf, nvars: int, coeff, mono: Mono) -> MDist:
    """coeff * (product of variables)**mono as a one-term MDist."""
    if not any(mono):
        return MDist.scalar(sf, nvars, coeff)
    return MDist.term(sf, nvars, coeff,
                      [RFFactor(RatFunc.monomial(sf, sf.one, 1), mono, AT_ZERO)])


# ---------------------------------------------------------------------------
# reduction internals
# ---------------------------------------------------------------------------

def _elim_var(mono: Mono) -> int:
    """The canonical variable a delta eliminates: first unit exponent."""
    for idx, e in enumerate(mono):
        if abs(e) == 1:
            return idx
    raise ValueError("delta monomial has no unit-exponent variable")


def _reduce_step(sf, term: Term) -> Optional[List[Term]]:
    """One delta elimination; None when the term is fully reduced.

    Each delta only ever eliminates its canonical variable, so substitution
    strictly removes that variable from the other factors and the rewriting
    terminates.
    """
    factors = term.factors
    candidates = []
    for i, f in enumerate(factors):
        if not isinstance(f, DeltaFactor):
            continue
        x = _elim_var(f.mono)
        sharing = [j for j, g in enumerate(factors)
                   if j != i and g.mono[x] != 0]
        if not sharing:
            continue
        if f.order > 0 and any(isinstance(factors[j], DeltaFactor) for j in sharing):
            # the product rule only applies against rational factors; a pair
            # of deltas sharing a variable is left for windowed expansion
            continue
        candidates.append((f.order, i, sharing))
    if not candidates:
        return None
    candidates.sort()
    order, i, sharing = candidates[0]
    delta = factors[i]
    rest = [f for j, f in enumerate(factors) if j != i and j not in sharing]
    share = [factors[j] for j in sharing]
    if order == 0:
        out = []
        for coeff, new_share, extra in _substitute(sf, delta, share):
            dfin = DeltaFactor(delta.point, delta.mono, extra)
            out.append(Term(term.coeff * coeff,
                            tuple(new_share) + tuple(rest) + (dfin,)))
        return out
    out = []
    for k in range(order + 1):
        lower = DeltaFactor(delta.point, delta.mono, order - k)
        for dcoeff, dfactors in _u_derivative(sf, delta, share, k):
            for c0, substituted, extra in _substitute(
                    sf, DeltaFactor(delta.point, delta.mono, 0), dfactors):
                if extra:
                    raise ValueError(
                        "a rational factor is singular at the support of a "
                        "derivative delta; the product is not defined")
                c = term.coeff * sf(math.comb(order, k)) * dcoeff * c0
                out.append(Term(c, tuple(substituted) + tuple(rest) + (lower,)))
    return out


def _substitute(sf, delta: DeltaFactor, share: Sequence):
    """Apply the relation u = point of an order-0 delta to other factors.

    Picks a variable x with exponent +-1 in the delta's monomial and
    eliminates it: each factor with monomial w becomes the factor with
    monomial w - g*u and argument scaled by point**g, where g = e*f with e, f
    the x-exponents of u and w.

    Factors that collapse to pure functions of u are multiplied into one
    rational and evaluated at the point jointly; a pole there is split off
    exactly through (u - b)^j * delta^(j)(u/b) = j! delta(u/b), so the
    output is a list of (coefficient, remaining factors, extra delta order)
    summands.  Individually singular factors whose product is regular at
    the point are thereby handled without any limiting convention.
    """
    u = delta.mono
    b = delta.point
    x = _elim_var(u)
    e = u[x]
    coeff = sf.one
    out = []
    funs = []  # RFFactors that became functions of u alone, with their g
    for f in share:
        g = e * f.mono[x]
        if g == 0:
            out.append(f)
            continue
        scale = b**g
        new_mono = _mono_sub(f.mono, u, g)
        if isinstance(f, RFFactor):
            if any(new_mono):
                out.append(RFFactor(f.rf.shift_arg(scale), new_mono, f.direction))
            else:
                funs.append((f.rf, g))
        else:
            if not any(new_mono):
                raise ValueError("delta collapsed onto a constant argument")
            # delta^(s)(scale * w / c) = scale**(-s) delta^(s)(w / (c/scale))
            coeff = coeff * scale ** (-f.order)
            out.append(DeltaFactor(f.point / scale, new_mono, f.order))
    if not funs:
        return [(coeff, out, 0)]
    try:
        val = coeff
        for rf, g in funs:
            val = val * rf.eval(b**g)
        return [(val, out, 0)]
    except ZeroDivisionError:
        pass
    joint = None
    for rf, g in funs:
        if abs(g) != 1:
            raise ValueError(
                "singular factor with a non-unit exponent in the delta "
                "variable; the product is not defined")
        piece = rf if g == 1 else rf.recip_arg()
        joint = piece if joint is None else joint * piece
    poly, frac = joint.partial_fractions()
    reg = sf.zero
    for ee, c in poly.items():
        reg = reg + c * b**ee
    summands = []
    for (p, j), c in frac.items():
        if p == b:
            # c/(u-b)^j against delta(u/b): exact raise to delta^(j)/j!
            summands.append((coeff * c / sf(math.factorial(j)), list(out), j))
        else:
            reg = reg + c / (b - p) ** j
    if reg:
        summands.append((coeff * reg, out, 0))
    return summands


def _u_derivative(sf, delta: DeltaFactor, share: Sequence, k: int):
    """k-th formal derivative of the sharing factors with respect to the
    delta's argument u, as a list of (scalar, factor list) summands.

    For a factor rf(w) with w = u**g * (u-free part), one u-derivative gives
    g * rf'(w) * w/u; the monomial w/u rides along as its own factor.
    """
    u = delta.mono
    x = _elim_var(u)
    e = u[x]
    summands = [(sf.one, list(share))]
    for _ in range(k):
        nxt = []
        for c, fl in summands:
            for j, f in enumerate(fl):
                if not isinstance(f, RFFactor):
                    continue
                g = e * f.mono[x]
                if g == 0:
                    continue
                new = list(fl)
                new[j] = RFFactor(f.rf.diff(), f.mono, f.direction)
                ratio = _mono_sub(f.mono, u, 1)
                if any(ratio):
                    new.append(RFFactor(RatFunc.monomial(sf, sf.one, 1),
                                        ratio, AT_ZERO))
                nxt.append((c * sf(g), new))
        summands = nxt
        if not summands:
            break
    return summands


# ---------------------------------------------------------------------------
# expansion internals
# ---------------------------------------------------------------------------

_INF = None  # open bound marker


def _factor_support(f) -> Tuple[Optional[int], Optional[int]]:
    """(lo, hi) of the factor's expansion support in its own argument
    exponent; None means unbounded on that side."""
    if isinstance(f, DeltaFactor):
        return (None, None)
    if not f.rf.num:
        return (0, -1)  # empty
    if f.rf.is_laurent():
        return (min(f.rf.num), max(f.rf.num))
    if f.direction == AT_ZERO:
        return (min(f.rf.num), None)
    return (None, max(f.rf.num) - sum(f.rf.poles.values()))


def _accumulate_term(sf, term: Term, nvars: int, window: int,
                     grid: Dict[Mono, object]) -> None:
    factors = list(term.factors)
    if not factors:
        key = (0,) * nvars
        grid[key] = grid.get(key, sf.zero) + term.coeff
        return
    los = []
    his = []
    for f in factors:
        lo, hi = _factor_support(f)
        if lo is not None and hi is not None and lo > hi:
            return  # a factor is identically zero
        los.append(lo)
        his.append(hi)
    # shrink every support using the window box and the other supports
    changed = True
    rounds = 0
    while changed:
        changed = False
        rounds += 1
        if rounds > 200:
            break
        for i, f in enumerate(factors):
            for v in f.vars():
                m = f.mono[v]
                rest_lo, rest_hi = 0, 0
                ok = True
                for j, g in enumerate(factors):
                    if j == i or g.mono[v] == 0:
                        continue
                    mv = g.mono[v]
                    a = los[j] * mv if los[j] is not None else None
                    b = his[j] * mv if his[j] is not None else None
                    if mv < 0:
                        a, b = b, a
                    if rest_lo is not None:
                        rest_lo = None if a is None else rest_lo + a
                    if rest_hi is not None:
                        rest_hi = None if b is None else rest_hi + b
                # m*k + rest must land in [-window, window]
                if rest_hi is not None:
                    lo_mk = -window - rest_hi
                    if m > 0:
                        nb = -((-lo_mk) // m)  # ceil division
                        if los[i] is None or nb > los[i]:
                            los[i] = nb
                            changed = True
                    else:
                        nb = lo_mk // m  # floor of lo_mk/m for negative m
                        if his[i] is None or nb < his[i]:
                            his[i] = nb
                            changed = True
                if rest_lo is not None:
                    hi_mk = window - rest_lo
                    if m > 0:
                        nb = hi_mk // m
                        if his[i] is None or nb < his[i]:
                            his[i] = nb
                            changed = True
                    else:
                        nb = -((-hi_mk) // m)
                        if los[i] is None or nb > los[i]:
                            los[i] = nb
                            changed = True
    for i, f in enumerate(factors):
        if los[i] is None or his[i] is None:
            raise ValueError(
                "product has no finite windowed expansion (factor with "
                f"monomial {f.mono} stays unbounded)")
    # per-factor coefficient tables
    tables = []
    for f, lo, hi in zip(factors, los, his):
        if lo > hi:
            return
        if isinstance(f, DeltaFactor):
            tables.append({k: delta_coeff(sf, f.point, f.order, k)
                           for k in range(lo, hi + 1)})
        elif f.rf.is_laurent():
            tables.append({k: c for k, c in f.rf.num.items() if lo <= k <= hi})
        else:
            tables.append(f.rf.expand(f.direction, lo, hi))
    # enumerate
    def rec(idx: int, expo: List[int], coeff):
        if idx == len(tables):
            if all(-window <= e <= window for e in expo):
                key = tuple(expo)
                grid[key] = grid.get(key, sf.zero) + coeff
            return
        f = factors[idx]
        for k, c in tables[idx].items():
            if not c:
                continue
            new = list(expo)
            for v, m in enumerate(f.mono):
                if m:
                    new[v] += k * m
            rec(idx + 1, new, coeff * c)

    rec(0, [0] * nvars, term.coeff)
