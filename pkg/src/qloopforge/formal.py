"""Truncated Laurent series and formal-distribution calculus.

Conventions fixed here and used by every higher layer:

* A :class:`Series` is a one-sided truncated expansion, either "at zero"
  (nonnegative powers of z) or "at infinity" (nonpositive powers of z).
* delta(z/a) has coefficient a**(-e) on z**e for every integer e.  Its
  derivative deltas are taken with respect to the point:
  delta^(p)(z/a) := (d/da)**p delta(z/a), so the coefficient of z**e is
  prod_{i<p} (-e - i) * a**(-e-p).
  With this normalization (z - a) * delta'(z/a) = delta(z/a).
* Products of derivative deltas with rational functions are defined by
  coefficient matching on a finite window, never by an analytic formula.

:class:`RatFunc` is an exact univariate rational function whose denominator
is kept in factored form (linear factors at explicitly known nonzero
points).  That makes partial fractions, expansion in either direction, and
the "difference of the two expansions" delta extraction exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg

AT_ZERO = "zero"
AT_INF = "inf"

__all__ = [
    "AT_ZERO", "AT_INF", "Series", "RatFunc", "FormalDist",
    "expand_rational", "g_series", "g_ratfunc", "g_delta_identity_check",
    "delta_coeff", "fit_deltas", "delta_mul", "solve_dist_equation",
]


# ---------------------------------------------------------------------------
# polynomial helpers on sparse Laurent coefficient dicts {exp: Scalar}
# ---------------------------------------------------------------------------

def _pclean(p: Dict[int, object]) -> Dict[int, object]:
    return {e: c for e, c in p.items() if c}


def _padd(a, b):
    out = dict(a)
    for e, c in b.items():
        s = out.get(e)
        out[e] = c if s is None else s + c
    return _pclean(out)


def _pneg(a):
    return {e: -c for e, c in a.items()}


def _pmul(a, b):
    out: Dict[int, object] = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = ea + eb
            s = out.get(e)
            v = ca * cb
            out[e] = v if s is None else s + v
    return _pclean(out)


def _pscale(a, s):
    if not s:
        return {}
    return {e: c * s for e, c in a.items()}


def _peval(a, z0):
    """Evaluate at a nonzero scalar."""
    acc = None
    for e, c in a.items():
        term = c * z0**e
        acc = term if acc is None else acc + term
    return acc


def _pdiff(a):
    return _pclean({e - 1: c * e for e, c in a.items() if e != 0})


def _pdiv_linear(a, p):
    """Exact division of the polynomial ``a`` by (z - p); remainder must vanish.

    Negative exponents are handled by factoring out the lowest power first.
    """
    if not a:
        return {}
    lo = min(a)
    shifted = {e - lo: c for e, c in a.items()}
    deg = max(shifted)
    coeffs = [shifted.get(i) for i in range(deg + 1)]
    out = [None] * deg
    carry = None
    for i in range(deg, 0, -1):
        c = coeffs[i]
        cur = c if carry is None else (carry + c if c is not None else carry)
        out[i - 1] = cur
        carry = cur * p if cur is not None else None
    rem = coeffs[0]
    if carry is not None:
        rem = carry if rem is None else rem + carry
    if rem:
        raise ValueError("division by (z - p) leaves a remainder")
    return _pclean({i + lo: c for i, c in enumerate(out) if c is not None})


# ---------------------------------------------------------------------------
# Series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Series:
    """One-sided truncated expansion in z (at zero) or 1/z (at infinity).

    ``coeffs`` is keyed by the order index j in the direction variable, so
    the z-exponent is +j at zero and -j at infinity, 0 <= j <= window.
    """

    sf: object
    direction: str
    window: int
    coeffs: Dict[int, object]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _pclean(dict(self.coeffs)))

    def zcoeff(self, e: int):
        j = e if self.direction == AT_ZERO else -e
        if j < 0 or j > self.window:
            raise ValueError(f"z^{e} outside the {self.direction} window {self.window}")
        return self.coeffs.get(j, self.sf.zero)

    def _compat(self, other: "Series") -> int:
        if self.direction != other.direction:
            raise ValueError("direction mismatch")
        return min(self.window, other.window)

    def __add__(self, other):
        n = self._compat(other)
        c = _padd(self.coeffs, other.coeffs)
        return Series(self.sf, self.direction, n, {j: v for j, v in c.items() if j <= n})

    def __sub__(self, other):
        return self + other.scale(-self.sf.one)

    def scale(self, s):
        return Series(self.sf, self.direction, self.window, _pscale(self.coeffs, s))

    def __mul__(self, other):
        n = self._compat(other)
        c = _pmul(self.coeffs, other.coeffs)
        return Series(self.sf, self.direction, n, {j: v for j, v in c.items() if j <= n})

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        n = self._compat(other)
        return all(self.coeffs.get(j, self.sf.zero) == other.coeffs.get(j, self.sf.zero)
                   for j in range(n + 1))

    def truncate(self, n: int) -> "Series":
        return Series(self.sf, self.direction, min(n, self.window),
                      {j: c for j, c in self.coeffs.items() if j <= n})

    @staticmethod
    def one(sf, direction, window):
        return Series(sf, direction, window, {0: sf.one})


def _series_divide(sf, num: Dict[int, object], den: Dict[int, object], window: int):
    """Coefficients (index 0..window) of num/den as a power series in the
    direction variable u; den must have an invertible lowest term u**0 after
    normalizing by the common u-valuation."""
    if not den:
        raise ValueError("denominator vanishes identically")
    v_d = min(den)
    v_n = min(num) if num else 0
    shift = v_n - v_d
    if num and shift < 0:
        raise ValueError("expansion has a pole in this direction")
    den0 = den[v_d]
    out: Dict[int, object] = {}
    for j in range(window + 1):
        # recurrence from num_{j + v_d} = sum_k den_{k + v_d} out_{j - k}
        acc = num.get(j + v_d)
        for k in range(1, j + 1):
            dk = den.get(k + v_d)
            ok = out.get(j - k)
            if dk is not None and ok is not None:
                term = dk * ok
                acc = -term if acc is None else acc - term
        if acc is not None:
            out[j] = acc / den0
    return _pclean(out)


def expand_rational(sf, num: Dict[int, object], den: Dict[int, object],
                    direction: str, window: int) -> Series:
    """Expansion of num/den where num and den are polynomials in 1/z,
    given as coefficient dicts keyed by the power of 1/z."""
    if direction == AT_INF:
        # the direction variable is u = 1/z, inputs are already in u
        coeffs = _series_divide(sf, dict(num), dict(den), window)
    else:
        # direction variable u = z: rewrite P(1/z) = sum c_j z^-j as a
        # Laurent polynomial in z and clear the common negative power.
        nz = {-j: c for j, c in num.items()}
        dz = {-j: c for j, c in den.items()}
        lo = min(list(nz.keys()) + list(dz.keys()) + [0])
        nz = {e - lo: c for e, c in nz.items()}
        dz = {e - lo: c for e, c in dz.items()}
        coeffs = _series_divide(sf, nz, dz, window)
    return Series(sf, direction, window, coeffs)


# ---------------------------------------------------------------------------
# RatFunc: num (sparse Laurent poly in z) over prod (z - p)^m, p nonzero
# ---------------------------------------------------------------------------

class RatFunc:
    """Exact rational function of one variable with factored denominator.

    The numerator may also be known in factored form (unit * z**shift *
    prod (z - p)); that knowledge survives multiplication and makes
    reciprocals possible.  Addition drops it.
    """

    __slots__ = ("sf", "num", "poles", "num_factors")

    def __init__(self, sf, num: Dict[int, object], poles: Dict[object, int],
                 num_factors: Optional[Tuple[object, Dict[object, int], int]] = None):
        self.sf = sf
        self.num = _pclean(dict(num))
        self.poles = {p: m for p, m in poles.items() if m}
        if any(m < 0 for m in self.poles.values()):
            raise ValueError("negative pole multiplicity")
        if any(not p for p in self.poles):
            raise ValueError("poles at 0 must use negative numerator exponents")
        self.num_factors = num_factors
        self._normalize()

    # -- construction ---------------------------------------------------

    @staticmethod
    def const(sf, c) -> "RatFunc":
        return RatFunc(sf, {0: c}, {}, (c, {}, 0))

    @staticmethod
    def from_factors(sf, unit, num_factors: Dict[object, int], poles: Dict[object, int],
                     shift: int = 0) -> "RatFunc":
        num = {shift: unit}
        for p, m in num_factors.items():
            for _ in range(m):
                num = _pmul(num, {1: sf.one, 0: -p})
        return RatFunc(sf, num, poles, (unit, dict(num_factors), shift))

    @staticmethod
    def monomial(sf, c, e: int) -> "RatFunc":
        return RatFunc(sf, {e: c}, {}, (c, {}, e))

    def _normalize(self):
        if not self.num:
            self.poles = {}
            self.num_factors = (self.sf.zero, {}, 0)
            return
        for p in list(self.poles):
            while self.poles.get(p, 0) > 0 and not _peval(self.num, p):
                self.num = _pdiv_linear(self.num, p)
                self.poles[p] -= 1
                if self.num_factors is not None:
                    unit, nf, sh = self.num_factors
                    if nf.get(p, 0) > 0:
                        nf = dict(nf)
                        nf[p] -= 1
                        self.num_factors = (unit, nf, sh)
                    else:
                        self.num_factors = None
            if not self.poles.get(p, 0):
                self.poles.pop(p, None)

    # -- ring operations --------------------------------------------------

    def __add__(self, other: "RatFunc") -> "RatFunc":
        allp = set(self.poles) | set(other.poles)
        num_a, num_b = self.num, other.num
        poles: Dict[object, int] = {}
        for p in allp:
            m = max(self.poles.get(p, 0), other.poles.get(p, 0))
            poles[p] = m
            fa = m - self.poles.get(p, 0)
            fb = m - other.poles.get(p, 0)
            lin = {1: self.sf.one, 0: -p}
            for _ in range(fa):
                num_a = _pmul(num_a, lin)
            for _ in range(fb):
                num_b = _pmul(num_b, lin)
        return RatFunc(self.sf, _padd(num_a, num_b), poles)

    def __sub__(self, other):
        return self + other.scale(-self.sf.one)

    def __neg__(self):
        return self.scale(-self.sf.one)

    def scale(self, s) -> "RatFunc":
        nf = None
        if self.num_factors is not None and s:
            unit, f, sh = self.num_factors
            nf = (unit * s, f, sh)
        return RatFunc(self.sf, _pscale(self.num, s), dict(self.poles), nf)

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        poles = dict(self.poles)
        for p, m in other.poles.items():
            poles[p] = poles.get(p, 0) + m
        nf = None
        if self.num_factors is not None and other.num_factors is not None:
            u1, f1, s1 = self.num_factors
            u2, f2, s2 = other.num_factors
            f = dict(f1)
            for p, m in f2.items():
                f[p] = f.get(p, 0) + m
            nf = (u1 * u2, f, s1 + s2)
        return RatFunc(self.sf, _pmul(self.num, other.num), poles, nf)

    def inv(self) -> "RatFunc":
        if self.num_factors is None:
            raise ValueError("reciprocal requires a factored numerator")
        unit, nf, sh = self.num_factors
        if not unit:
            raise ZeroDivisionError("reciprocal of zero")
        den_unit = self.sf.one / unit
        # new numerator = old denominator, new denominator = old num factors
        new = RatFunc.from_factors(self.sf, den_unit, dict(self.poles), dict(nf), -sh)
        return new

    def shift_arg(self, c) -> "RatFunc":
        """The function z |-> f(c*z)."""
        num = {e: v * c**e for e, v in self.num.items()}
        poles = {}
        unit_adj = self.sf.one
        for p, m in self.poles.items():
            # (c z - p)^m = c^m (z - p/c)^m
            poles[p / c] = poles.get(p / c, 0) + m
            unit_adj = unit_adj / c**m
        num = _pscale(num, unit_adj)
        nf = None
        if self.num_factors is not None:
            u, f, sh = self.num_factors
            u2 = u * c**sh * unit_adj
            f2: Dict[object, int] = {}
            for p, m in f.items():
                f2[p / c] = f2.get(p / c, 0) + m
                u2 = u2 * c**m
            nf = (u2, f2, sh)
        return RatFunc(self.sf, num, poles, nf)

    def recip_arg(self) -> "RatFunc":
        """The function u |-> f(1/u); requires every pole to be nonzero."""
        sf = self.sf
        shift = sum(self.poles.values())
        unit = sf.one
        poles: Dict[object, int] = {}
        for p, m in self.poles.items():
            # 1/(1/u - p)^m = u^m (-1/p)^m / (u - 1/p)^m
            unit = unit * (-sf.one / p) ** m
            key = sf.one / p
            poles[key] = poles.get(key, 0) + m
        num = {shift - e: c * unit for e, c in self.num.items()}
        nf = None
        if self.num_factors is not None:
            u0, zeros, sh = self.num_factors
            u2 = u0 * unit
            z2: Dict[object, int] = {}
            nz = 0
            for z, k in zeros.items():
                u2 = u2 * (-z) ** k
                key = sf.one / z
                z2[key] = z2.get(key, 0) + k
                nz += k
            nf = (u2, z2, shift - sh - nz)
        return RatFunc(sf, num, poles, nf)

    # -- analysis ---------------------------------------------------------

    def den_poly(self) -> Dict[int, object]:
        den = {0: self.sf.one}
        for p, m in self.poles.items():
            for _ in range(m):
                den = _pmul(den, {1: self.sf.one, 0: -p})
        return den

    def __eq__(self, other):
        if not isinstance(other, RatFunc):
            return NotImplemented
        return _padd(_pmul(self.num, other.den_poly()),
                     _pneg(_pmul(other.num, self.den_poly()))) == {}

    def __bool__(self):
        return bool(self.num)

    def is_laurent(self) -> bool:
        return not self.poles

    def eval(self, z0):
        den = self.sf.one
        for p, m in self.poles.items():
            f = z0 - p
            if not f:
                raise ZeroDivisionError("evaluation at a pole")
            den = den * f**m
        if not self.num:
            return self.sf.zero
        return _peval(self.num, z0) / den

    def diff(self) -> "RatFunc":
        # d/dz [num / prod (z-p)^m]
        out = RatFunc(self.sf, _pdiff(self.num), dict(self.poles))
        for p, m in self.poles.items():
            poles = dict(self.poles)
            poles[p] = m + 1
            out = out + RatFunc(self.sf, _pscale(self.num, self.sf(-m)), poles)
        return out

    def expand(self, direction: str, lo: int, hi: int) -> Dict[int, object]:
        """Exact z-exponent coefficients on [lo, hi] in the given direction."""
        sf = self.sf
        if not self.num:
            return {}
        factors = [(p, m) for p, m in self.poles.items()]
        if direction == AT_INF:
            # every factor's support is bounded above: num by its top degree,
            # 1/(z-p)^m by -m; expand left-to-right keeping only what can
            # still reach exponent lo after the remaining tops.
            acc = dict(self.num)
            acc_top = max(self.num)
            for idx, (p, m) in enumerate(factors):
                rest_top = sum(-mm for _, mm in factors[idx + 1:])
                need_lo = lo - rest_top
                fac = _pole_expansion(sf, p, m, AT_INF, need_lo - acc_top, -m)
                acc = _pmul_windowed(acc, fac, need_lo, None)
                acc_top += -m
            return {e: c for e, c in acc.items() if lo <= e <= hi}
        else:
            # supports bounded below: num by its valuation, pole factors by 0
            acc = dict(self.num)
            acc_bot = min(self.num)
            for p, m in factors:
                fac = _pole_expansion(sf, p, m, AT_ZERO, 0, hi - acc_bot)
                acc = _pmul_windowed(acc, fac, None, hi)
            return {e: c for e, c in acc.items() if lo <= e <= hi}

    def to_series(self, direction: str, window: int) -> Series:
        if direction == AT_INF:
            cmap = self.expand(direction, -window, 0)
            return Series(self.sf, direction, window, {-e: c for e, c in cmap.items()})
        cmap = self.expand(direction, 0, window)
        return Series(self.sf, direction, window, cmap)

    def expansion_difference(self) -> Dict[Tuple[object, int], object]:
        """Delta terms of (expansion at infinity) - (expansion at zero).

        Since (d/dp)^(j-1) 1/(z-p) = (j-1)!/(z-p)^j, the pole term 1/(z-p)^j
        contributes sum_{r<j} (-1)^(j-1-r)/r! * p^(r-j) delta^(r)(z/p).
        """
        sf = self.sf
        poly, frac = self.partial_fractions()
        out: Dict[Tuple[object, int], object] = {}
        for (p, j), c in frac.items():
            for r in range(j):
                sign = sf.one if (j - 1 - r) % 2 == 0 else -sf.one
                coef = c * sign * p**(r - j) / sf(math.factorial(r))
                key = (p, r)
                cur = out.get(key)
                out[key] = coef if cur is None else cur + coef
        return {k: v for k, v in out.items() if v}

    def partial_fractions(self):
        """Return (laurent polynomial part, {(p, j): c}) with
        f = poly + sum c/(z-p)**j, 1 <= j <= multiplicity."""
        sf = self.sf
        frac: Dict[Tuple[object, int], object] = {}
        for p, m in self.poles.items():
            other_poles = {pp: mm for pp, mm in self.poles.items() if pp != p}
            g = RatFunc(sf, dict(self.num), other_poles)  # f * (z-p)^m
            for j in range(m, 0, -1):
                c = g.eval(p) / sf(math.factorial(m - j))
                if c:
                    frac[(p, j)] = c
                if j > 1:
                    g = g.diff()
        rest = self
        for (p, j), c in frac.items():
            rest = rest - RatFunc(sf, {0: c}, {p: j})
        if rest.poles:
            raise AssertionError("partial fraction remainder still has poles")
        return rest.num, frac

    def __repr__(self):
        return f"RatFunc(num={self.num!r}, poles={self.poles!r})"


def _pole_expansion(sf, p, m, direction, lo, hi):
    """Coefficients of 1/(z-p)^m on z-exponents [lo, hi]."""
    out = {}
    if direction == AT_INF:
        # sum_{k>=0} binom(k+m-1, m-1) p^k z^(-k-m)
        for e in range(lo, min(hi, -m) + 1):
            k = -e - m
            out[e] = sf(math.comb(k + m - 1, m - 1)) * p**k
    else:
        # (-1)^m sum_{k>=0} binom(k+m-1, m-1) z^k / p^(k+m)
        sign = sf.one if m % 2 == 0 else -sf.one
        for e in range(max(lo, 0), hi + 1):
            out[e] = sign * sf(math.comb(e + m - 1, m - 1)) / p**(e + m)
    return out


def _pmul_windowed(a, b, lo, hi):
    out: Dict[int, object] = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = ea + eb
            if lo is not None and e < lo:
                continue
            if hi is not None and e > hi:
                continue
            s = out.get(e)
            v = ca * cb
            out[e] = v if s is None else s + v
    return _pclean(out)


# ---------------------------------------------------------------------------
# deltas
# ---------------------------------------------------------------------------

def delta_coeff(sf, point, order: int, e: int):
    """Coefficient of z**e in delta^(order)(z/point)."""
    c = point**(-e - order)
    for i in range(order):
        c = c * sf(-e - i)
    return c


def fit_deltas(sf, coeffs: Dict[int, object], window: int,
               points: Sequence[object], max_order: int):
    """Exact fit of windowed two-sided coefficients as a combination of
    delta^(p)(z/a) for a in points, p <= max_order.  Returns the coefficient
    dict {(a, p): c} or None if no exact fit exists on the window."""
    unknowns = [(a, p) for a in points for p in range(max_order + 1)]
    rows = []
    rhs = []
    for e in range(-window, window + 1):
        rows.append([delta_coeff(sf, a, p, e) for (a, p) in unknowns])
        rhs.append(coeffs.get(e, sf.zero))
    sol = linalg.solve(rows, rhs, sf.zero)
    if sol is None:
        return None
    # verify (solve() already guarantees consistency, but be explicit)
    fit = {unknowns[i]: sol[i] for i in range(len(unknowns)) if sol[i]}
    return fit


@dataclass
class FormalDist:
    """Two-sided windowed Laurent part plus finitely many delta terms."""

    sf: object
    window: int
    laurent: Dict[int, object] = dfield(default_factory=dict)
    deltas: Dict[Tuple[object, int], object] = dfield(default_factory=dict)

    def __post_init__(self):
        self.laurent = _pclean(self.laurent)
        self.deltas = {k: v for k, v in self.deltas.items() if v}

    def window_coeffs(self, window: Optional[int] = None) -> Dict[int, object]:
        n = self.window if window is None else window
        if n > self.window:
            raise ValueError("requested window exceeds the stored window")
        out = {e: c for e, c in self.laurent.items() if -n <= e <= n}
        for (a, p), c in self.deltas.items():
            for e in range(-n, n + 1):
                v = c * delta_coeff(self.sf, a, p, e)
                s = out.get(e)
                out[e] = v if s is None else s + v
        return _pclean(out)

    def __add__(self, other: "FormalDist") -> "FormalDist":
        n = min(self.window, other.window)
        deltas = dict(self.deltas)
        for k, v in other.deltas.items():
            s = deltas.get(k)
            deltas[k] = v if s is None else s + v
        return FormalDist(self.sf, n, _padd(self.laurent, other.laurent), deltas)

    def scale(self, s) -> "FormalDist":
        return FormalDist(self.sf, self.window, _pscale(self.laurent, s),
                          {k: v * s for k, v in self.deltas.items()})

    def equals_on_window(self, other: "FormalDist", window: Optional[int] = None) -> bool:
        n = min(self.window, other.window) if window is None else window
        a = self.window_coeffs(n)
        b = other.window_coeffs(n)
        return all(a.get(e, self.sf.zero) == b.get(e, self.sf.zero)
                   for e in range(-n, n + 1))


def delta_mul(d: FormalDist, f: RatFunc) -> FormalDist:
    """Product of a formal distribution with a rational function of z.

    Delta terms are multiplied by the coefficient-matching rule: the result
    R supported at the same point satisfies R * den(f) = d * num(f) as
    windowed coefficient families (polynomial products are unambiguous).
    The Laurent part accepts Laurent-polynomial f only.
    """
    sf = d.sf
    if d.laurent and not f.is_laurent():
        raise ValueError("two-sided Laurent part times a proper rational "
                         "function is direction-ambiguous")
    den = f.den_poly()
    out_laurent = _pmul(d.laurent, f.num) if d.laurent else {}
    out_laurent = {e: c for e, c in out_laurent.items()
                   if -d.window <= e <= d.window}
    deltas: Dict[Tuple[object, int], object] = {}
    by_point: Dict[object, Dict[int, object]] = {}
    for (a, p), c in d.deltas.items():
        by_point.setdefault(a, {})[p] = c
    for a, orders in by_point.items():
        for p, m in f.poles.items():
            if p == a:
                raise ValueError("rational factor is singular at a delta point")
        pmax = max(orders)
        n = 2 * pmax + 4 + max(abs(e) for e in list(f.num) + [0]) + sum(f.poles.values())
        # coefficients of d_a * num(f) on the window
        target: Dict[int, object] = {}
        for e in range(-n, n + 1):
            acc = None
            for p, c in orders.items():
                for en, cn in f.num.items():
                    if -n - 4 <= e - en <= n + 4:
                        v = c * cn * delta_coeff(sf, a, p, e - en)
                        acc = v if acc is None else acc + v
            if acc is not None and acc:
                target[e] = acc
        # solve R * den = target with R a delta combination at a
        unknowns = list(range(pmax + 1))
        rows, rhs = [], []
        for e in range(-n + 4, n - 4 + 1):
            row = []
            for k in unknowns:
                acc = sf.zero
                for ed, cd in den.items():
                    acc = acc + cd * delta_coeff(sf, a, k, e - ed)
                row.append(acc)
            rows.append(row)
            rhs.append(target.get(e, sf.zero))
        sol = linalg.solve(rows, rhs, sf.zero)
        if sol is None:
            raise ValueError("no delta combination matches the product")
        for k, c in zip(unknowns, sol):
            if c:
                key = (a, k)
                cur = deltas.get(key)
                deltas[key] = c if cur is None else cur + c
    return FormalDist(sf, d.window, out_laurent, deltas)


# ---------------------------------------------------------------------------
# the two-sided commutator series and its delta identity
# ---------------------------------------------------------------------------

def g_series(sf, sign: int, c: int, window: int) -> Series:
    """q**(s*c) + (q - 1/q) * [s*c]_q * sum_{m>=1} q**(s*m*c) z**m, s = sign."""
    s = 1 if sign >= 0 else -1
    coeffs = {0: sf.qpow(s * c)}
    pref = (sf.q - 1 / sf.q) * sf.qint(s * c)
    for m in range(1, window + 1):
        coeffs[m] = pref * sf.qpow(s * m * c)
    return Series(sf, AT_ZERO, window, coeffs)


def g_ratfunc(sf, sign: int, c: int) -> RatFunc:
    """Closed rational form (q**(sc) - z)/(1 - q**(sc) z), poles factored."""
    s = 1 if sign >= 0 else -1
    qc = sf.qpow(s * c)
    # (q^c - z)/(1 - q^c z) = (1/q^c)(z - q^c)/(z - q^-c)
    return RatFunc.from_factors(sf, 1 / qc, {qc: 1}, {1 / qc: 1})


def g_delta_identity_check(sf, c: int, window: int):
    """Check (G^s(x) - G^{-s}(1/x)) / (q - 1/q) = [s*c]_q delta(x q^{s*c}) for
    both signs, as two-sided coefficient families in the ratio variable x.

    Returns (ok, counterexample) where counterexample is None or a tuple
    (sign, exponent, lhs, rhs)."""
    for s in (1, -1):
        up = g_series(sf, s, c, window)          # series in x
        down = g_series(sf, -s, c, window)       # series in 1/x
        denom = sf.q - 1 / sf.q
        point = sf.qpow(-s * c)                  # delta(x q^{sc}) = delta(x / q^{-sc})
        target = sf.qint(s * c)
        for e in range(-window, window + 1):
            lhs = sf.zero
            if e >= 0:
                lhs = lhs + up.coeffs.get(e, sf.zero)
            if e <= 0:
                lhs = lhs - down.coeffs.get(-e, sf.zero)
            lhs = lhs / denom
            rhs = target * delta_coeff(sf, point, 0, e)
            if lhs != rhs:
                return False, (s, e, lhs, rhs)
    return True, None


# ---------------------------------------------------------------------------
# the distribution-equation solver
# ---------------------------------------------------------------------------

@dataclass
class SolveResult:
    dist: FormalDist
    nullspace_dim: int
    consistent: bool


def solve_dist_equation(sf, m: int, a, A: Series, B: Sequence[Series],
                        window: int) -> SolveResult:
    """Solve (z - a)(z - v)**m A(v) F(z) + sum_p B_p(v) delta^(p)(z/a) = 0
    for a delta-supported F(z) = sum_{p<=n+1} f_p delta^(p)(z/a).

    A and the B_p are expansions at zero in v.  The system is solved exactly
    on the coefficient window |z-exponent| <= window, v-order <= A.window.
    """
    if m not in (0, 1):
        raise ValueError("m must be 0 or 1")
    if not any(A.coeffs.values()):
        raise ValueError("A must be nonzero")
    # B_p for p = 0..n, solution order bound n + 1 (= 0 when B is empty)
    order_bound = len(B)
    # prefactor (z-a)(z-v)^m as a polynomial in z and v
    pref: Dict[Tuple[int, int], object] = {(1, 0): sf.one, (0, 0): -a}
    if m == 1:
        pref = {
            (2, 0): sf.one, (1, 0): -a,
            (1, 1): -sf.one, (0, 1): a,
        }
    vmax = A.window
    unknowns = list(range(order_bound + 1))
    rows, rhs = [], []
    for i in range(-window, window + 1):
        for j in range(0, vmax + 1):
            row = []
            for p in unknowns:
                acc = sf.zero
                for (dz, dv), cc in pref.items():
                    av = A.coeffs.get(j - dv, sf.zero)
                    if av:
                        acc = acc + cc * av * delta_coeff(sf, a, p, i - dz)
                row.append(acc)
            b = sf.zero
            for p, Bp in enumerate(B):
                bv = Bp.coeffs.get(j, sf.zero)
                if bv:
                    b = b + bv * delta_coeff(sf, a, p, i)
            rows.append(row)
            rhs.append(-b)
    sol = linalg.solve(rows, rhs, sf.zero)
    consistent = sol is not None
    if sol is None:
        sol = [sf.zero] * len(unknowns)
    null = linalg.nullspace(rows, sf.zero, sf.one)
    dist = FormalDist(sf, window, {}, {(a, p): c for p, c in zip(unknowns, sol) if c})
    return SolveResult(dist, len(null), consistent)
