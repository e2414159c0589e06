"""Evaluation of the double loop currents on dressed module vectors.

The evaluated currents act on a space spanned by symbols ``(w+, i, w-)``: a
basis index ``i`` of a finite-dimensional graded module together with two
ordered words of dressing factors, one word per Heisenberg family.  A factor
``(m, a, r)`` stands for the r-th derivative in ``a`` of the m-th dressed
current of its family, taken at the point ``a``.  No individual modes of the
dressing factors are ever needed: crossing a Cartan current through a factor
multiplies by an exact rational function of the current variable, and the
difference of the two Cartan currents produces a finite sum of delta
distributions whose support points extend the words.  The defining quotient
ideal is realized concretely, as the exact row-reduced span of the delta
atoms of its generating current applied to the relevant symbols.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field as dfield
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

from .dist import DeltaFactor, MDist, RFFactor, monomial_dist
from .formal import AT_INF, AT_ZERO, RatFunc, delta_coeff
from .heisen import Theta_closed, lambda_m_ratfunc, rho_m_ratfunc
from .loopmod import DrinfeldPoly, GradedRep, RelationReport
from .qchar import (AdjacencyRecord, LWeightRational, a_shift_ratfunc,
                    h_shift_ratfunc, is_t_dominant, reconstruct_lweight)
from .scalar import SpectralPoint

__all__ = [
    "HFactor", "Symbol", "BoundOverflow", "CanonicalizationError",
    "canonical_word", "hfac_ratfunc", "EvAction", "JSpan",
    "EvSpace", "TruncOp", "build_ev_space", "ev_op", "smash_mul_action",
    "check_qdaff_relations", "partial_fraction", "kdiff_atoms",
    "highest_t_space", "HighestTSpace", "adjacency_report",
    "t_current_op", "p_current_op",
    "twist_tau", "twist_sigma", "iota_m_op", "dynkin0_ops",
]


class BoundOverflow(Exception):
    """A computation left the enumerated symbol space or its degree bounds."""


class CanonicalizationError(Exception):
    """A dressing word admits no canonical rewriting within the rules."""


class HFactor(NamedTuple):
    m: int          # nonzero dressing index within the family
    point: object   # nonzero scalar, the evaluation point
    der: int        # derivative order with respect to the point


class Symbol(NamedTuple):
    plus: Tuple[HFactor, ...]
    index: int
    minus: Tuple[HFactor, ...]


def _fkey(f: HFactor):
    return (str(f.point), f.m)


def symbol_key(s: Symbol):
    return (s.index,
            tuple((str(f.point), f.m, f.der) for f in s.plus),
            tuple((str(f.point), f.m, f.der) for f in s.minus))


def factor_count(s: Symbol) -> int:
    return len(s.plus) + len(s.minus)


# ---------------------------------------------------------------------------
# rational helpers
# ---------------------------------------------------------------------------

def _over_var(g: RatFunc, a) -> RatFunc:
    """Turn g(x) into the rational function v |-> g(a/v)."""
    return g.recip_arg().shift_arg(g.sf.one / a)


def hfac_ratfunc(sf, fam: int, m: int, a, der: int = 0) -> RatFunc:
    """Crossing multiplier picked up by a Cartan current through the factor
    (m, a, der) of the given family, as an exact rational function of the
    current variable.  For der > 0 this is the der-th point derivative of
    the der = 0 multiplier."""
    g = lambda_m_ratfunc(sf, fam, m) * rho_m_ratfunc(sf, fam, m)
    if der == 0:
        return _over_var(g, a)
    x1 = RatFunc.monomial(sf, sf.one, 1)
    k = 0
    for _ in range(der):
        g = g.diff() * x1 + g.scale(sf(k))
        k -= 1
    return _over_var(g, a).scale(a ** k)


def _theta_partials(sf, fam: int, m1: int, m2: int, imax: int, jmax: int):
    """Mixed partials of Theta(v/z) in the homogeneous representation
    (g(u), alpha, beta) standing for g(u) v^alpha z^beta; index (i, j) is
    (d/dz)^i (d/dv)^j."""
    x1 = RatFunc.monomial(sf, sf.one, 1)
    tab = {(0, 0): (Theta_closed(sf, fam, m1, m2), 0, 0)}
    for j in range(jmax):
        g, al, be = tab[(0, j)]
        tab[(0, j + 1)] = (g.diff() * x1 + g.scale(sf(al)), al - 1, be)
    for j in range(jmax + 1):
        for i in range(imax):
            g, al, be = tab[(i, j)]
            tab[(i + 1, j)] = (g.diff() * x1.scale(-sf.one)
                               + g.scale(sf(be)), al, be - 1)
    return tab


# ---------------------------------------------------------------------------
# canonical words
# ---------------------------------------------------------------------------

def _merge_pair(sf, fam: int, f1: HFactor, f2: HFactor):
    """Compose adjacent factors when the left argument sits at the composed
    offset; None when the pair does not compose."""
    if f1.der or f2.der:
        return None
    if f1.point != f2.point * sf.qpow(2 * fam * f1.m):
        return None
    m = f1.m + f2.m
    if m == 0:
        return ()
    return (HFactor(m, f1.point, 0),)


def _theta_order(theta: RatFunc, u0) -> int:
    """Net vanishing order of a factored crossing function at u0."""
    net = 0
    _, zeros, _ = theta.num_factors
    for z, k in zeros.items():
        if z == u0:
            net += k
    for p, m in theta.poles.items():
        if p == u0:
            net -= m
    return net


def _exchange_pair(sf, fam: int, f1: HFactor, f2: HFactor):
    """Swap the adjacent word factors f1 f2 into sum_k c_k f2' f1'."""
    u0 = f2.point / f1.point
    tab = _theta_partials(sf, fam, f1.m, f2.m, f1.der, f2.der)
    out = []
    for i in range(f1.der + 1):
        for j in range(f2.der + 1):
            g, al, be = tab[(i, j)]
            val = g.eval(u0) * f2.point ** al * f1.point ** be
            if not val:
                continue
            c = sf(math.comb(f1.der, i) * math.comb(f2.der, j)) * val
            out.append((c, HFactor(f2.m, f2.point, f2.der - j),
                        HFactor(f1.m, f1.point, f1.der - i)))
    return out


def canonical_word(sf, fam: int, word: Sequence[HFactor],
                   _cache: Optional[dict] = None):
    """Rewrite a dressing word into its canonical combination, returned as a
    list of (coefficient, word) pairs.  Composable neighbours are merged; a
    pair whose crossing factor vanishes at the point ratio is swapped (the
    term dies or loses derivative orders); an out-of-order pair with a
    finite nonzero crossing value is swapped; a pair whose crossing factor
    has a pole there is already in its free order and stays."""
    key = (fam, tuple(word))
    if _cache is not None and key in _cache:
        return _cache[key]
    pending = [(sf.one, tuple(word))]
    out: Dict[Tuple[HFactor, ...], object] = {}
    guard = 0
    while pending:
        guard += 1
        if guard > 100000:
            raise CanonicalizationError("word rewriting does not terminate")
        coeff, w = pending.pop()
        if not coeff:
            continue
        changed = False
        for idx in range(len(w) - 1):
            f1, f2 = w[idx], w[idx + 1]
            merged = _merge_pair(sf, fam, f1, f2)
            if merged is not None:
                pending.append((coeff, w[:idx] + merged + w[idx + 2:]))
                changed = True
                break
            theta = Theta_closed(sf, fam, f1.m, f2.m)
            net = _theta_order(theta, f2.point / f1.point)
            if net < 0 or (net == 0 and _fkey(f1) <= _fkey(f2)):
                continue
            for c2, g1, g2 in _exchange_pair(sf, fam, f1, f2):
                pending.append((coeff * c2, w[:idx] + (g1, g2) + w[idx + 2:]))
            changed = True
            break
        if not changed:
            out[w] = out.get(w, sf.zero) + coeff
    res = [(c, w) for w, c in out.items() if c]
    if _cache is not None:
        _cache[key] = res
    return res


# ---------------------------------------------------------------------------
# vectors of symbols
# ---------------------------------------------------------------------------

Vec = Dict[Symbol, object]
DVec = Dict[Symbol, MDist]


def vec_add(sf, a: Vec, b: Vec, scale=None) -> Vec:
    out = dict(a)
    s = sf.one if scale is None else scale
    for k, v in b.items():
        out[k] = out.get(k, sf.zero) + v * s
    return {k: v for k, v in out.items() if v}


def dvec_add(sf, nvars: int, a: DVec, b: DVec) -> DVec:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, MDist.zero(sf, nvars)) + v
    return out


def _dvec_scale(dvec: DVec, md: MDist) -> DVec:
    return {k: v * md for k, v in dvec.items()}


# ---------------------------------------------------------------------------
# the action
# ---------------------------------------------------------------------------

class EvAction:
    """Action of the evaluated currents on the dressed symbols of one
    module.  Operators are maps Symbol -> DVec over a fixed number of formal
    variables; composition multiplies the scalar distribution parts."""

    def __init__(self, rep: GradedRep, nvars: int = 1):
        self.rep = rep
        self.sf = rep.sf
        self.nvars = nvars
        self._hfac_cache: dict = {}
        self._canon_cache: dict = {}
        self._k0inv_cache: dict = {}

    # -- elementary pieces --------------------------------------------------

    def hfac(self, fam: int, m: int, point, der: int = 0) -> RatFunc:
        key = (fam, m, point, der)
        got = self._hfac_cache.get(key)
        if got is None:
            got = hfac_ratfunc(self.sf, fam, m, point, der)
            self._hfac_cache[key] = got
        return got

    def canonical_symbol(self, s: Symbol):
        """List of (coefficient, Symbol) with both words canonical."""
        out = []
        for cp, wp in canonical_word(self.sf, +1, s.plus, self._canon_cache):
            for cm, wm in canonical_word(self.sf, -1, s.minus,
                                         self._canon_cache):
                out.append((cp * cm, Symbol(wp, s.index, wm)))
        return out

    def _mono(self, var: int) -> Tuple[int, ...]:
        return tuple(1 if i == var else 0 for i in range(self.nvars))

    def _cross_word(self, fam: int, word: Tuple[HFactor, ...]):
        """Triangular Cartan crossing through one word: list of
        (new_word, rational multiplier in the current variable)."""
        sf = self.sf
        out = [((), RatFunc.const(sf, sf.one))]
        for f in word:
            nxt = []
            for w0, r0 in out:
                for l in range(f.der + 1):
                    r = self.hfac(fam, f.m, f.point, l)
                    if l:
                        r = r.scale(sf(math.comb(f.der, l)))
                    nxt.append((w0 + (HFactor(f.m, f.point, f.der - l),),
                                r0 * r))
            out = nxt
        return out

    def cross_k(self, s: Symbol):
        """Full Cartan crossing k(v) s = sum R(v) s'; includes the module
        diagonal.  Output symbols are canonical."""
        base = self.rep.k_diag[s.index]
        out: Dict[Symbol, RatFunc] = {}
        for wp, rp in self._cross_word(+1, s.plus):
            for wm, rm in self._cross_word(-1, s.minus):
                r = base * rp * rm
                for c, s2 in self.canonical_symbol(Symbol(wp, s.index, wm)):
                    if s2 in out:
                        out[s2] = out[s2] + r.scale(c)
                    else:
                        out[s2] = r.scale(c)
        return list(out.items())

    def eigen(self, s: Symbol) -> RatFunc:
        """Generalized Cartan eigenvalue of a symbol: the module diagonal
        times the der = 0 crossing multipliers of every factor."""
        r = self.rep.k_diag[s.index]
        for f in s.plus:
            r = r * self.hfac(+1, f.m, f.point)
        for f in s.minus:
            r = r * self.hfac(-1, f.m, f.point)
        return r

    def kdiff_components(self, s: Symbol):
        """(k+ - k-)(w) s as a finite list of (Symbol, coeff, point, order)
        delta components in w."""
        out = []
        for s2, r in self.cross_k(s):
            for (b, rr), c in r.expansion_difference().items():
                out.append((s2, c, b, rr))
        return out

    # -- evaluated generator currents ---------------------------------------

    def k0_op(self, sign: int, var: int = 0, shift=None) -> Callable:
        """The evaluated zero-indexed Cartan current at argument z*shift:
        minus the opposite-sign loop Cartan current."""
        sf = self.sf
        direction = AT_ZERO if sign > 0 else AT_INF
        mono = self._mono(var)

        def op(s: Symbol) -> DVec:
            out: DVec = {}
            for s2, r in self.cross_k(s):
                if shift is not None:
                    r = r.shift_arg(shift)
                md = MDist.term(sf, self.nvars, -sf.one,
                                [RFFactor(r, mono, direction)])
                out[s2] = out.get(s2, MDist.zero(sf, self.nvars)) + md
            return out
        return op

    def _prepended(self, s: Symbol, f: HFactor, slot: int):
        w = (f,) + s.plus if slot > 0 else s.plus
        wm = (f,) + s.minus if slot < 0 else s.minus
        return self.canonical_symbol(Symbol(w, s.index, wm))

    def evK_op(self, sign: int, m: int, var: int = 0) -> Callable:
        """The evaluated Cartan current of index sign*m (m >= 1): the
        dressing prepend after the shifted Cartan difference."""
        if m < 1:
            raise ValueError("the dressing index m must be >= 1")
        sf = self.sf
        mono = self._mono(var)
        overall = sf.one if sign > 0 else -sf.one

        def op(s: Symbol) -> DVec:
            out: DVec = {}
            for s2, c, b, r in self.kdiff_components(s):
                b2 = b * sf.qpow(2 * m)
                c2 = c * sf.qpow(2 * m * r) * overall
                for l in range(r + 1):
                    fct = HFactor(sign * m, b2, l)
                    cl = c2 * sf(math.comb(r, l))
                    for c3, s3 in self._prepended(s2, fct, sign):
                        md = MDist.term(sf, self.nvars, cl * c3,
                                        [DeltaFactor(b2, mono, r - l)])
                        out[s3] = out.get(s3, MDist.zero(sf, self.nvars)) + md
            return out
        return op

    def evX_op(self, sign: int, r: int, var: int = 0,
               arg_perturb: int = 0) -> Callable:
        """The evaluated raising/lowering current of index r: the module
        current at the shifted argument, the same-side word crossing, and
        the dressing prepend."""
        sf = self.sf
        mono = self._mono(var)
        shift = sf.qpow(-2 * sign * r + arg_perturb)
        comps = self.rep.xp if sign > 0 else self.rep.xm
        direction = AT_ZERO if sign > 0 else AT_INF
        fam = sign

        def op(s: Symbol) -> DVec:
            out: DVec = {}
            word = s.plus if sign > 0 else s.minus
            other = s.minus if sign > 0 else s.plus
            for w2, rr in self._cross_word(fam, word):
                rc = rr.shift_arg(shift)
                for (p, jd), mat in comps.items():
                    p2 = p / shift
                    fold = sf.one / shift ** jd
                    for i in range(self.rep.dim):
                        cm = mat[i][s.index]
                        if not cm:
                            continue
                        s2 = (Symbol(w2, i, other) if sign > 0
                              else Symbol(other, i, w2))
                        base = cm * fold
                        if r == 0:
                            targets = [(base, s2, jd)]
                        else:
                            targets = []
                            for l in range(jd + 1):
                                fct = HFactor(r, p2, l)
                                cl = base * sf(math.comb(jd, l))
                                for c3, s3 in self._prepended(s2, fct, sign):
                                    targets.append((cl * c3, s3, jd - l))
                        for cc, s3, order in targets:
                            facs = [DeltaFactor(p2, mono, order)]
                            if rc.num != {0: sf.one} or rc.poles:
                                facs.append(RFFactor(rc, mono, direction))
                            md = MDist.term(sf, self.nvars, cc, facs)
                            out[s3] = out.get(
                                s3, MDist.zero(sf, self.nvars)) + md
            return out
        return op

    def gen_op(self, gen, var: int = 0) -> Callable:
        """Dispatch ('K', sign, m) / ('X', sign, r) / ('k', sign)."""
        kind = gen[0]
        if kind == "K":
            _, sign, m = gen
            if m == 0:
                return self.k0_op(sign, var)
            return self.evK_op(sign, m, var)
        if kind == "X":
            _, sign, r = gen
            return self.evX_op(sign, r, var)
        if kind == "k":
            _, sign = gen
            return self.loop_k_op(sign, var)
        raise ValueError(f"unknown generator {gen!r}")

    def loop_k_op(self, sign: int, var: int = 0) -> Callable:
        """The loop Cartan current itself (the negated zero-index current
        of the opposite sign)."""
        sf = self.sf
        direction = AT_INF if sign > 0 else AT_ZERO
        mono = self._mono(var)

        def op(s: Symbol) -> DVec:
            out: DVec = {}
            for s2, r in self.cross_k(s):
                md = MDist.term(sf, self.nvars, sf.one,
                                [RFFactor(r, mono, direction)])
                out[s2] = out.get(s2, MDist.zero(sf, self.nvars)) + md
            return out
        return op

    # -- inversion of the zero-index Cartan current --------------------------

    def k0_inv(self, sign: int, s: Symbol):
        """The inverse of the evaluated zero-index Cartan current on a
        symbol: list of (Symbol, rational in the current variable).  The
        action is triangular in the derivative orders, so the inverse is
        the diagonal reciprocal plus a finite nilpotent correction."""
        key = (sign, s)
        got = self._k0inv_cache.get(key)
        if got is not None:
            return got
        sf = self.sf
        pairs = self.cross_k(s)
        kap = None
        off = []
        for s2, r in pairs:
            if s2 == s:
                kap = r
            else:
                off.append((s2, r))
        if kap is None:
            raise ValueError("missing diagonal crossing term")
        kinv = kap.inv()
        out: Dict[Symbol, RatFunc] = {s: kinv.scale(-sf.one)}
        for s2, r in off:
            for s3, r3 in self.k0_inv(sign, s2):
                # (k^{-1}) e_s = kap^{-1} e_s - kap^{-1} sum r (k^{-1}) e_s2
                # and the evaluated current is -k, so flip both signs
                corr = (kinv * r * r3).scale(-sf.one)
                if s3 in out:
                    out[s3] = out[s3] + corr
                else:
                    out[s3] = corr
        res = list(out.items())
        self._k0inv_cache[key] = res
        return res


# ---------------------------------------------------------------------------
# the quotient ideal
# ---------------------------------------------------------------------------

class JSpan:
    """Lazily grown row-reduced span of the delta atoms of the quotient
    generator current, with word prefixes taken from the vectors being
    reduced."""

    def __init__(self, action: EvAction, mmax: int = 2):
        self.action = action
        self.sf = action.sf
        self.mmax = mmax
        self._done = set()
        self._row_cache: dict = {}
        # pivot symbol key -> (pivot symbol, row Vec normalized to pivot 1)
        self._pivots: Dict[object, Tuple[Symbol, Vec]] = {}

    # one side of the quotient relation each, as delta atoms
    def center_sides(self, s: Symbol, m: int):
        """Delta atoms (point, order) -> Vec of both sides of the m-th
        telescoped quotient relation applied to a symbol."""
        sf = self.sf
        act = self.action
        lhs: Dict[Tuple[object, int], Vec] = {}
        rhs: Dict[Tuple[object, int], Vec] = {}
        for s2, c, b, r in act.kdiff_components(s):
            # minus-family dressing after the shifted difference
            b2 = b * sf.qpow(2 * m)
            c2 = c * sf.qpow(2 * m * r)
            for l in range(r + 1):
                cl = c2 * sf(math.comb(r, l))
                for c3, s3 in act._prepended(s2, HFactor(-m, b2, l), -1):
                    key = (b2, r - l)
                    lhs[key] = vec_add(sf, lhs.get(key, {}), {s3: cl * c3})
            # inverse plus-family dressing at the unshifted difference
            for l in range(r + 1):
                cl = c * sf(math.comb(r, l)) * sf.qpow(-2 * m * l)
                fct = HFactor(-m, b * sf.qpow(-2 * m), l)
                for c3, s3 in act._prepended(s2, fct, +1):
                    key = (b, r - l)
                    rhs[key] = vec_add(sf, rhs.get(key, {}), {s3: cl * c3})
        return lhs, rhs

    def center_defect_atoms(self, s: Symbol, m: int) -> List[Vec]:
        lhs, rhs = self.center_sides(s, m)
        out = []
        for key in set(lhs) | set(rhs):
            v = vec_add(self.sf, lhs.get(key, {}), rhs.get(key, {}),
                        -self.sf.one)
            if v:
                out.append(v)
        return out

    def _prepend_vec(self, vec: Vec, plus_prefix, minus_prefix) -> Vec:
        act = self.action
        out: Vec = {}
        for s, c in vec.items():
            s2 = Symbol(tuple(plus_prefix) + s.plus, s.index,
                        tuple(minus_prefix) + s.minus)
            for c3, s3 in act.canonical_symbol(s2):
                out = vec_add(self.sf, out, {s3: c * c3})
        return out

    def _peels(self, t: Symbol):
        """Ways to strip one leading dressing factor off either word: the
        whole factor, or its unit head when the index is composite."""
        sf = self.sf
        out = []
        for slot, word, other in ((+1, t.plus, t.minus), (-1, t.minus, t.plus)):
            if not word:
                continue
            f, rest = word[0], word[1:]
            core = (Symbol(rest, t.index, other) if slot > 0
                    else Symbol(other, t.index, rest))
            out.append((slot, f, core))
            s = 1 if f.m > 0 else -1
            if abs(f.m) > 1 and f.der == 0:
                head = HFactor(s, f.point, 0)
                tail = HFactor(f.m - s, f.point * sf.qpow(2 * slot * s), 0)
                core2 = (Symbol((tail,) + rest, t.index, other) if slot > 0
                         else Symbol(other, t.index, (tail,) + rest))
                out.append((slot, head, core2))
        return out

    def _rows_for(self, t: Symbol) -> List[Vec]:
        key = symbol_key(t)
        got = self._row_cache.get(key)
        if got is not None:
            return got
        self._row_cache[key] = []  # cut cycles defensively
        rows: List[Vec] = []
        for m in range(1, self.mmax + 1):
            rows.extend(self.center_defect_atoms(t, m))
            rows.extend(self.center_defect_atoms(t, -m))
        for slot, f, core in self._peels(t):
            for r in self._rows_for(core):
                rows.append(r)
                pp = (f,) if slot > 0 else ()
                pm = (f,) if slot < 0 else ()
                row = self._prepend_vec(r, pp, pm)
                if row:
                    rows.append(row)
        self._row_cache[key] = rows
        return rows

    def _eliminate(self, vec: Vec) -> Vec:
        """Eliminate every pivot symbol from a vector.  Pivot rows carry
        only symbols strictly below their pivot, so the largest surviving
        symbol decreases at each step and the loop terminates."""
        sf = self.sf
        vec = {s: c for s, c in vec.items() if c}
        while True:
            hit = None
            for s in vec:
                got = self._pivots.get(symbol_key(s))
                if got is not None:
                    hit = (s, got[1])
                    break
            if hit is None:
                return vec
            s, row = hit
            c = vec.pop(s)
            for s2, c2 in row.items():
                if s2 == s:
                    continue
                c3 = vec.get(s2, sf.zero) - c * c2
                if c3:
                    vec[s2] = c3
                else:
                    vec.pop(s2, None)

    def _insert(self, row: Vec):
        row = self._eliminate(row)
        if not row:
            return
        pivot = max(row, key=symbol_key)
        inv = self.sf.one / row[pivot]
        self._pivots[symbol_key(pivot)] = (
            pivot, {s: c * inv for s, c in row.items()})

    def ensure(self, symbols):
        """Generate quotient rows for the given symbols and every symbol
        reachable by stripping their dressing factors."""
        for t in symbols:
            key = symbol_key(t)
            if key in self._done:
                continue
            self._done.add(key)
            for row in self._rows_for(t):
                self._insert(row)

    def reduce(self, vec: Vec) -> Vec:
        """Remainder of a vector after elimination against the span."""
        vec = {k: v for k, v in vec.items() if v}
        if not vec:
            return {}
        self.ensure(list(vec))
        return self._eliminate(vec)


# ---------------------------------------------------------------------------
# partial fractions of a Drinfeld ratio
# ---------------------------------------------------------------------------

def _drinfeld_ratio(sf, P: DrinfeldPoly) -> RatFunc:
    """The exact rational function prod (z - v/q^2)/(z - v) over the roots
    of P (monic normalization, no overall q power)."""
    num: Dict[object, int] = {}
    den: Dict[object, int] = {}
    for v in P.root_values(sf):
        key = v / sf.q ** 2
        num[key] = num.get(key, 0) + 1
        den[v] = den.get(v, 0) + 1
    return RatFunc.from_factors(sf, sf.one, num, den)


def partial_fraction(sf, P: DrinfeldPoly):
    """Decompose the Drinfeld ratio of P as C0 + sum_{a,p} C_p(a)/(1-a/z)^p.

    Returns (C0, {(a, p): C_p(a)}).  Reassembly is exact."""
    rf = _drinfeld_ratio(sf, P)
    poly, frac = rf.partial_fractions()
    # 1/(1-a/z)^p = sum_j comb(p, j) a^j / (z-a)^j  (plus 1 at j = 0)
    by_pole: Dict[object, Dict[int, object]] = {}
    for (p, j), c in frac.items():
        by_pole.setdefault(p, {})[j] = c
    table: Dict[Tuple[object, int], object] = {}
    c0 = poly.get(0, sf.zero)
    for a, comps in by_pole.items():
        mmax = max(comps)
        cs = {}
        for p in range(mmax, 0, -1):
            c = comps.get(p, sf.zero)
            for pp in range(p + 1, mmax + 1):
                c = c - cs[pp] * sf(math.comb(pp, p)) * a ** p
            cs[p] = c / a ** p
        for p, c in cs.items():
            if c:
                table[(a, p)] = c
                c0 = c0 - c
    return c0, table


def kdiff_atoms(sf, P: DrinfeldPoly):
    """Delta atoms {(a, r): coeff} of the two-sided Cartan difference on a
    highest vector with Drinfeld data P, derived from the partial fraction
    table alone: q^(deg P) sum_p C_p(a) [(1 - a/z)^(-p)]_(inf - zero)."""
    c0, table = partial_fraction(sf, P)
    out: Dict[Tuple[object, int], object] = {}
    for (a, p), c in table.items():
        rf = RatFunc(sf, {p: c * sf.qpow(P.degree)}, {a: p})
        for key, coeff in rf.expansion_difference().items():
            out[key] = out.get(key, sf.zero) + coeff
    return {k: v for k, v in out.items() if v}


# ---------------------------------------------------------------------------
# truncated spaces and operators
# ---------------------------------------------------------------------------

@dataclass
class EvSpace:
    """Enumerated symbol space of one module with its quotient data."""
    rep: GradedRep
    D: int
    F: int
    basis: List[Symbol]
    action: EvAction
    jspan: JSpan
    quotient_dim: int
    coords: Dict[Symbol, int] = dfield(default_factory=dict)

    def reduce(self, vec: Vec) -> Vec:
        return self.jspan.reduce(vec)


@dataclass
class TruncOp:
    """Windowed mode matrices of one evaluated current on an EvSpace."""
    modes: Dict[int, List[List[object]]]
    delta_support: Dict[Tuple[object, int], bool]
    bounds_ok: bool = True


def build_ev_space(rep: GradedRep, D: int, F: int) -> EvSpace:
    """Enumerate the symbols reachable from the bare module vectors by at
    most F dressing prepends with indices bounded by D, and row-reduce the
    quotient atoms over them."""
    action = EvAction(rep, nvars=1)
    sf = rep.sf
    jspan = JSpan(action, mmax=max(D, 1))
    gens = []
    for m in range(1, D + 1):
        gens.append(("K", +1, m))
        gens.append(("K", -1, m))
    for r in (-1, 1):
        if D >= 1:
            gens.append(("X", +1, r))
            gens.append(("X", -1, r))
    seen: Dict[Symbol, None] = {}
    frontier = [Symbol((), i, ()) for i in range(rep.dim)]
    for s in frontier:
        seen[s] = None
    while frontier:
        nxt = []
        for s in frontier:
            if factor_count(s) >= F:
                continue
            for gen in gens:
                op = action.gen_op(gen, var=0)
                for s2 in op(s):
                    if s2 not in seen and factor_count(s2) <= F:
                        seen[s2] = None
                        nxt.append(s2)
        frontier = nxt
    basis = sorted(seen, key=symbol_key)
    jspan.ensure(basis)
    cols = sorted({s for _, row in jspan._pivots.values() for s in row}
                  | set(basis), key=symbol_key)
    qdim = len(cols) - len(jspan._pivots)
    coords = {s: i for i, s in enumerate(cols)}
    return EvSpace(rep, D, F, basis, action, jspan, qdim, coords)


def smash_mul_action(space: EvSpace, gen, vec: Vec):
    """Left multiplication of a symbol vector by a generator.

    gen is ('K', sign, m), ('X', sign, r), ('k', sign) for current-valued
    output (a DVec over one variable), or ('H', slot, m, point, der) for a
    plain dressing prepend (a Vec)."""
    sf = space.rep.sf
    act = space.action
    if gen[0] == "H":
        _, slot, m, point, der = gen
        out: Vec = {}
        for s, c in vec.items():
            for c2, s2 in act._prepended(s, HFactor(m, point, der), slot):
                out = vec_add(sf, out, {s2: c * c2})
        return out
    op = act.gen_op(gen, var=0)
    out_d: DVec = {}
    for s, c in vec.items():
        for s2, md in op(s).items():
            out_d[s2] = out_d.get(s2, MDist.zero(sf, 1)) + md.scale(c)
    return out_d


def _dvec_modes(sf, dvec: DVec, window: int):
    """Per z-mode symbol vectors of a one-variable DVec."""
    modes: Dict[int, Vec] = {}
    for s, md in dvec.items():
        for (e,), c in md.window_grid(window).items():
            modes.setdefault(e, {})
            modes[e][s] = modes[e].get(s, sf.zero) + c
    return {e: {s: c for s, c in v.items() if c} for e, v in modes.items()}


def _delta_summary(dvec: DVec):
    out: Dict[Tuple[object, int], bool] = {}
    for md in dvec.values():
        for term in md.reduce().terms:
            for f in term.factors:
                if isinstance(f, DeltaFactor):
                    out[(f.point, f.order)] = True
    return out


def ev_op(space: EvSpace, gen, window: int) -> TruncOp:
    """Materialize one evaluated current as mode matrices on the quotient
    coordinates of the space."""
    sf = space.rep.sf
    n = len(space.coords)
    modes: Dict[int, List[List[object]]] = {}
    support: Dict[Tuple[object, int], bool] = {}
    op = space.action.gen_op(gen, var=0)
    for s in space.basis:
        j = space.coords[s]
        dvec = op(s)
        support.update(_delta_summary(dvec))
        for e, vec in _dvec_modes(sf, dvec, window).items():
            vec = space.reduce(vec)
            for s2, c in vec.items():
                if s2 not in space.coords:
                    raise BoundOverflow(
                        f"image symbol outside the enumerated space: {s2}")
                modes.setdefault(e, [[sf.zero] * n for _ in range(n)])
                modes[e][space.coords[s2]][j] = c
    return TruncOp(modes, support)


# ---------------------------------------------------------------------------
# relation verification
# ---------------------------------------------------------------------------

def _apply_op(sf, nvars: int, op: Callable, dvec: DVec) -> DVec:
    out: DVec = {}
    for s, md in dvec.items():
        for s2, md2 in op(s).items():
            out[s2] = out.get(s2, MDist.zero(sf, nvars)) + md2 * md
    return out


def _core(sf, nvars: int, s: Symbol) -> DVec:
    return {s: MDist.scalar(sf, nvars, sf.one)}


def _residual_detail(sf, jspan: JSpan, lhs: DVec, rhs: DVec, window: int):
    """None when lhs = rhs modulo the quotient on the window; otherwise a
    diagnostic tuple."""
    grids: Dict[Tuple[int, ...], Vec] = {}
    for s in set(lhs) | set(rhs):
        zero = MDist.zero(sf, next(iter(lhs.values())).nvars if lhs
                          else next(iter(rhs.values())).nvars)
        ga = lhs.get(s, zero).window_grid(window)
        gb = rhs.get(s, zero).window_grid(window)
        for e in set(ga) | set(gb):
            c = ga.get(e, sf.zero) - gb.get(e, sf.zero)
            if c:
                grids.setdefault(e, {})
                grids[e][s] = grids[e].get(s, sf.zero) + c
    for e, vec in grids.items():
        vec = {s: c for s, c in vec.items() if c}
        if not vec:
            continue
        rem = jspan.reduce(vec)
        if rem:
            s0, c0 = next(iter(rem.items()))
            return (e, s0, c0)
    return None


def _poly2(sf, c10, c01):
    """c10*v + c01*z as a two-variable distribution."""
    return (monomial_dist(sf, 2, c10, (1, 0))
            + monomial_dist(sf, 2, c01, (0, 1)))


def check_qdaff_relations(rep: GradedRep, mmax: int = 2,
                          rs: Sequence[int] = (-1, 0, 1), window: int = 4,
                          x_arg_perturb: int = 0,
                          cores: Optional[Sequence[int]] = None
                          ) -> RelationReport:
    """Verify the defining current relations of the double loop algebra at
    trivial central charge on the evaluated symbol space of a module, as
    exact windowed identities modulo the quotient."""
    sf = rep.sf
    q = sf.q
    act = EvAction(rep, nvars=2)
    jspan = JSpan(act, mmax=max(mmax, max(abs(r) for r in rs), 1))
    rpt = RelationReport()
    core_idx = range(rep.dim) if cores is None else cores
    cores_d = [(i, _core(sf, 2, Symbol((), i, ()))) for i in core_idx]

    def K(sign, m, var):
        if m == 0:
            return act.k0_op(sign, var)
        return act.evK_op(sign, m, var)

    def X(sign, r, var):
        return act.evX_op(sign, r, var, arg_perturb=x_arg_perturb)

    def compare(name, lhs, rhs):
        detail = _residual_detail(sf, jspan, lhs, rhs, window)
        rpt.add(name, detail)

    # Cartan-Cartan, like signs
    for sign in (+1, -1):
        tag = "+" if sign > 0 else "-"
        for m in range(mmax + 1):
            for n in range(mmax + 1):
                p_l = (_poly2(sf, sf.one, -q ** (2 * sign))
                       * _poly2(sf, sf.one, -q ** (2 * (m - n - sign))))
                p_r = (_poly2(sf, q ** (2 * sign), -sf.one)
                       * _poly2(sf, q ** (-2 * sign), -q ** (2 * (m - n))))
                for i, core in cores_d:
                    lhs = _dvec_scale(
                        _apply_op(sf, 2, K(sign, m, 0),
                                  _apply_op(sf, 2, K(sign, n, 1), core)),
                        p_l)
                    rhs = _dvec_scale(
                        _apply_op(sf, 2, K(sign, n, 1),
                                  _apply_op(sf, 2, K(sign, m, 0), core)),
                        p_r)
                    compare(f"K{tag}K{tag} m={m} n={n} core={i}", lhs, rhs)

    # Cartan-Cartan, opposite signs
    for m in range(mmax + 1):
        for n in range(mmax + 1):
            p_l = (_poly2(sf, q ** (2 * (1 - m)), -sf.one)
                   * _poly2(sf, q ** (2 * (n - 1)), -sf.one))
            p_r = (_poly2(sf, q ** (-2 * m), -q ** 2)
                   * _poly2(sf, q ** (2 * n), -q ** (-2)))
            for i, core in cores_d:
                lhs = _dvec_scale(
                    _apply_op(sf, 2, K(+1, m, 0),
                              _apply_op(sf, 2, K(-1, n, 1), core)), p_l)
                rhs = _dvec_scale(
                    _apply_op(sf, 2, K(-1, n, 1),
                              _apply_op(sf, 2, K(+1, m, 0), core)), p_r)
                compare(f"K+K- m={m} n={n} core={i}", lhs, rhs)

    # Cartan with same-sign current
    for sign in (+1, -1):
        tag = "+" if sign > 0 else "-"
        for m in range(mmax + 1):
            for r in rs:
                p_l = _poly2(sf, sf.one, -q ** (2 * sign))
                p_r = _poly2(sf, q ** (2 * sign), -sf.one)
                for i, core in cores_d:
                    lhs = _dvec_scale(
                        _apply_op(sf, 2, K(sign, m, 0),
                                  _apply_op(sf, 2, X(sign, r, 1), core)), p_l)
                    rhs = _dvec_scale(
                        _apply_op(sf, 2, X(sign, r, 1),
                                  _apply_op(sf, 2, K(sign, m, 0), core)), p_r)
                    compare(f"K{tag}X{tag} m={m} r={r} core={i}", lhs, rhs)

    # Cartan with opposite-sign current
    for sign in (+1, -1):
        tag = "+" if sign > 0 else "-"
        xtag = "-" if sign > 0 else "+"
        for m in range(mmax + 1):
            for r in rs:
                p_l = _poly2(sf, sf.one, -q ** (2 * (m - sign)))
                p_r = _poly2(sf, q ** (-2 * sign), -q ** (2 * m))
                for i, core in cores_d:
                    lhs = _dvec_scale(
                        _apply_op(sf, 2, K(sign, m, 0),
                                  _apply_op(sf, 2, X(-sign, r, 1), core)),
                        p_l)
                    rhs = _dvec_scale(
                        _apply_op(sf, 2, X(-sign, r, 1),
                                  _apply_op(sf, 2, K(sign, m, 0), core)),
                        p_r)
                    compare(f"K{tag}X{xtag} m={m} r={r} core={i}", lhs, rhs)

    # like-sign currents
    for sign in (+1, -1):
        tag = "+" if sign > 0 else "-"
        for r in rs:
            for s2 in rs:
                p_l = _poly2(sf, sf.one, -q ** (2 * sign))
                p_r = _poly2(sf, q ** (2 * sign), -sf.one)
                for i, core in cores_d:
                    lhs = _dvec_scale(
                        _apply_op(sf, 2, X(sign, r, 0),
                                  _apply_op(sf, 2, X(sign, s2, 1), core)),
                        p_l)
                    rhs = _dvec_scale(
                        _apply_op(sf, 2, X(sign, s2, 1),
                                  _apply_op(sf, 2, X(sign, r, 0), core)),
                        p_r)
                    compare(f"X{tag}X{tag} r={r} s={s2} core={i}", lhs, rhs)

    # opposite-sign currents: delta-supported Cartan difference
    pref = sf.one / (q - 1 / q)
    for r in rs:
        for s2 in rs:
            j = r + s2
            dlt = MDist.term(sf, 2, sf.one,
                             [DeltaFactor(q ** (2 * j), (1, -1), 0)])
            for i, core in cores_d:
                lhs1 = _apply_op(sf, 2, X(+1, r, 0),
                                 _apply_op(sf, 2, X(-1, s2, 1), core))
                lhs2 = _apply_op(sf, 2, X(-1, s2, 1),
                                 _apply_op(sf, 2, X(+1, r, 0), core))
                lhs = dvec_add(sf, 2, lhs1,
                               _dvec_scale(lhs2, MDist.scalar(sf, 2, -sf.one)))
                rhs: DVec = {}
                if j >= 0:
                    kp = _apply_op(sf, 2, K(+1, j, 0), core)
                    rhs = dvec_add(sf, 2, rhs, _dvec_scale(
                        kp, dlt.scale(pref)))
                if j <= 0:
                    km = _apply_op(sf, 2, K(-1, -j, 1), core)
                    rhs = dvec_add(sf, 2, rhs, _dvec_scale(
                        km, dlt.scale(-pref)))
                compare(f"X+X- r={r} s={s2} core={i}", lhs, rhs)

    # the telescoped quotient relation itself
    jsp1 = JSpan(act, mmax=1)
    for m in (1, 2):
        for i, _ in cores_d:
            s0 = Symbol((), i, ())
            lhs_atoms, rhs_atoms = jsp1.center_sides(s0, m)
            ok = None
            for key in set(lhs_atoms) | set(rhs_atoms):
                v = vec_add(sf, lhs_atoms.get(key, {}),
                            rhs_atoms.get(key, {}), -sf.one)
                rem = jspan.reduce(v)
                if rem:
                    ss, cc = next(iter(rem.items()))
                    ok = (key, ss, cc)
                    break
            rpt.add(f"center m={m} core={i}", ok)
    return rpt


def ev_iota0_check(rep: GradedRep, window: int = 4) -> RelationReport:
    """The evaluation retracts the zeroth loop embedding: the evaluated
    zero-index currents act on bare symbols exactly as the module
    currents."""
    sf = rep.sf
    act = EvAction(rep, nvars=1)
    rpt = RelationReport()
    for i in range(rep.dim):
        s0 = Symbol((), i, ())
        core = _core(sf, 1, s0)
        for sign, tag in ((+1, "+"), (-1, "-")):
            # x current through the evaluated index-0 current
            lhs = _apply_op(sf, 1, act.evX_op(sign, 0, 0), core)
            comps = rep.xp if sign > 0 else rep.xm
            rhs: DVec = {}
            for (p, jd), mat in comps.items():
                for i2 in range(rep.dim):
                    if mat[i2][i]:
                        md = MDist.term(sf, 1, mat[i2][i],
                                        [DeltaFactor(p, (1,), jd)])
                        s2 = Symbol((), i2, ())
                        rhs[s2] = rhs.get(s2, MDist.zero(sf, 1)) + md
            det = _grid_equal(sf, lhs, rhs, window)
            rpt.add(f"iota0 x{tag} core={i}", det)
            # negated opposite zero-index current equals the loop Cartan
            lhs2 = _dvec_scale(_apply_op(sf, 1, act.k0_op(-sign, 0), core),
                               MDist.scalar(sf, 1, -sf.one))
            kap = rep.k_diag[i]
            rhs2 = {s0: MDist.term(
                sf, 1, sf.one,
                [RFFactor(kap, (1,), AT_INF if sign > 0 else AT_ZERO)])}
            det2 = _grid_equal(sf, lhs2, rhs2, window)
            rpt.add(f"iota0 k{tag} core={i}", det2)
    return rpt


def _grid_equal(sf, lhs: DVec, rhs: DVec, window: int):
    for s in set(lhs) | set(rhs):
        za = lhs.get(s)
        zb = rhs.get(s)
        nv = (za or zb).nvars
        ga = (za or MDist.zero(sf, nv)).window_grid(window)
        gb = (zb or MDist.zero(sf, nv)).window_grid(window)
        for e in set(ga) | set(gb):
            if ga.get(e, sf.zero) != gb.get(e, sf.zero):
                return (s, e, ga.get(e, sf.zero), gb.get(e, sf.zero))
    return None


# ---------------------------------------------------------------------------
# highest t-weight spaces
# ---------------------------------------------------------------------------

@dataclass
class HighestTSpace:
    blocks: List[Tuple[RatFunc, List[Symbol]]]
    lweights: List[LWeightRational]
    records: List[AdjacencyRecord]
    t_dominant: bool
    kminus_supports: List[object]
    support_single: bool


def highest_t_space(rep: GradedRep, P: DrinfeldPoly, D: int = 2, F: int = 2,
                    top: int = 0, degree_bound: Optional[int] = None
                    ) -> HighestTSpace:
    """Close the bare highest vector under the evaluated Cartan currents
    modulo the quotient, decompose into eigen blocks, reconstruct their
    rational weights, and collect the adjacency data."""
    sf = rep.sf
    act = EvAction(rep, nvars=1)
    jspan = JSpan(act, mmax=max(D, 1))
    s0 = Symbol((), top, ())
    blocks: List[Tuple[RatFunc, List[Symbol]]] = [(act.eigen(s0), [s0])]
    block_of: Dict[Symbol, int] = {s0: 0}
    records: List[AdjacencyRecord] = []
    kminus_supports: List[object] = []
    support_single = True
    frontier = [s0]
    while frontier:
        nxt = []
        for s in frontier:
            if factor_count(s) >= F:
                continue
            src = block_of[s]
            for sign in (+1, -1):
                for m in range(1, D + 1):
                    op = act.evK_op(sign, m, 0)
                    per_point: Dict[object, Vec] = {}
                    for s2, md in op(s).items():
                        for term in md.reduce().terms:
                            (df,) = term.factors
                            key = (df.point, df.order)
                            v = jspan.reduce({s2: term.coeff})
                            for s3, c in v.items():
                                per_point.setdefault(df.point, {})
                                per_point[df.point][s3] = \
                                    per_point[df.point].get(s3, sf.zero) + c
                    target_support: Dict[int, set] = {}
                    for b, vec in per_point.items():
                        vec = {k: v for k, v in vec.items() if v}
                        for s3 in vec:
                            kap = act.eigen(s3)
                            for bi, (kap0, members) in enumerate(blocks):
                                if kap0 == kap:
                                    tgt = bi
                                    if s3 not in block_of:
                                        members.append(s3)
                                        block_of[s3] = bi
                                        nxt.append(s3)
                                    break
                            else:
                                tgt = len(blocks)
                                blocks.append((kap, [s3]))
                                block_of[s3] = tgt
                                nxt.append(s3)
                            target_support.setdefault(tgt, set()).add(b)
                            if sign < 0 and m == 1 and s == s0:
                                kminus_supports.append(b)
                    for tgt, pts in target_support.items():
                        if len(pts) > 1:
                            support_single = False
                        for b in pts:
                            pt = sf.point_from_value(b)
                            if pt is not None:
                                records.append(AdjacencyRecord(
                                    source=src, target=tgt, kind="K",
                                    sign=sign, a=pt, m=m))
        frontier = nxt
    bound = degree_bound if degree_bound is not None else P.degree + 2 * D
    window = 2 * bound + 2
    lws = []
    for kap, _members in blocks:
        lws.append(reconstruct_lweight(sf, kap.to_series(AT_INF, window),
                                       kap.to_series(AT_ZERO, window), bound))
    if any(r.kind == "K" for r in records):
        dom = is_t_dominant(lws, records)
    else:
        dom = True
    return HighestTSpace(blocks, lws, records, dom,
                         sorted(set(kminus_supports), key=str),
                         support_single)


def adjacency_report(rep: GradedRep, mmax: int = 2,
                     rs: Sequence[int] = (-1, 0, 1)) -> RelationReport:
    """Check the weight-shift laws on the evaluated space of a module: the
    Cartan currents connect eigen blocks through the dressing shift at their
    unique support point, and the raising/lowering currents connect them
    through an elementary shift."""
    sf = rep.sf
    act = EvAction(rep, nvars=1)
    rpt = RelationReport()
    seeds = [Symbol((), i, ()) for i in range(rep.dim)]
    layer2 = []
    for s in seeds:
        for sign in (+1, -1):
            op = act.evK_op(sign, 1, 0)
            for s2 in op(s):
                if s2 not in layer2:
                    layer2.append(s2)
    for s in seeds + layer2:
        kap = act.eigen(s)
        for sign in (+1, -1):
            for m in range(1, mmax + 1):
                op = act.evK_op(sign, m, 0)
                per_target: Dict[Symbol, set] = {}
                for s2, md in op(s).items():
                    for term in md.reduce().terms:
                        (df,) = term.factors
                        per_target.setdefault(s2, set()).add(df.point)
                for s2, pts in per_target.items():
                    name = (f"K{'+' if sign > 0 else '-'} m={m} "
                            f"{symbol_key(s)}->{symbol_key(s2)}")
                    if len(pts) != 1:
                        rpt.add(name + " single-support",
                                ("support", sorted(map(str, pts))))
                        continue
                    (b,) = pts
                    expect = h_shift_ratfunc(
                        sf, m, sf.point_from_value(b))
                    if sign < 0:
                        expect = expect.inv()
                    got = act.eigen(s2)
                    ok = None if got == kap * expect else \
                        ("eigen-ratio", symbol_key(s2))
                    rpt.add(name, ok)
        for sign in (+1, -1):
            for r in rs:
                op = act.evX_op(sign, r, 0)
                per_target: Dict[Symbol, set] = {}
                for s2, md in op(s).items():
                    for term in md.reduce().terms:
                        for f in term.factors:
                            if isinstance(f, DeltaFactor):
                                per_target.setdefault(s2, set()).add(f.point)
                for s2, pts in per_target.items():
                    name = (f"X{'+' if sign > 0 else '-'} r={r} "
                            f"{symbol_key(s)}->{symbol_key(s2)}")
                    if len(pts) != 1:
                        rpt.add(name + " single-support",
                                ("support", sorted(map(str, pts))))
                        continue
                    (b,) = pts
                    ratio = act.eigen(s2) * kap.inv()
                    match = _match_a_shift(sf, ratio, b, sign)
                    rpt.add(name, None if match else
                            ("no elementary shift", str(b)))
    return rpt


def _match_a_shift(sf, ratio: RatFunc, support, sign: int):
    """Find a lattice point near the support whose elementary shift (or its
    reciprocal, for a lowering current) equals the given eigen ratio."""
    base = sf.point_from_value(support)
    if base is None:
        return None
    for k in range(-4, 5):
        cand = base.shift(k)
        rf = a_shift_ratfunc(sf, cand)
        if sign < 0:
            rf = rf.inv()
        if ratio == rf:
            return cand
    return None


# ---------------------------------------------------------------------------
# derived currents
# ---------------------------------------------------------------------------

def t_current_apply(act: EvAction, sign: int, m: int, s: Symbol,
                    var: int = 0) -> DVec:
    """The ratio current of index sign*m applied to one symbol."""
    if m < 1:
        raise ValueError("m must be >= 1")
    sf = act.sf
    q = sf.q
    pref = (-sf.one if sign > 0 else sf.one) / (q - 1 / q)
    shift = q ** (-2 * m)
    direction = AT_ZERO if sign > 0 else AT_INF
    mono = act._mono(var)
    out: DVec = {}
    if sign > 0:
        # the inverted zero-index current sits leftmost, so it applies last
        for s2, md in act.evK_op(sign, m, var)(s).items():
            for s3, r3 in act.k0_inv(sign, s2):
                fac = RFFactor(r3.shift_arg(shift), mono, direction)
                md2 = MDist(sf, act.nvars,
                            [type(t)(t.coeff * pref, t.factors + (fac,))
                             for t in md.terms])
                out[s3] = out.get(s3, MDist.zero(sf, act.nvars)) + md2
    else:
        # mirrored display: the inverted current sits rightmost, apply first
        for s2, r2 in act.k0_inv(sign, s):
            fac = RFFactor(r2.shift_arg(shift), mono, direction)
            for s3, md in act.evK_op(sign, m, var)(s2).items():
                md2 = MDist(sf, act.nvars,
                            [type(t)(t.coeff * pref, t.factors + (fac,))
                             for t in md.terms])
                out[s3] = out.get(s3, MDist.zero(sf, act.nvars)) + md2
    return out


def t_current_op(space: EvSpace, sign: int, m: int, window: int) -> TruncOp:
    sf = space.rep.sf
    n = len(space.coords)
    modes: Dict[int, List[List[object]]] = {}
    support: Dict[Tuple[object, int], bool] = {}
    for s in space.basis:
        j = space.coords.get(s)
        dvec = t_current_apply(space.action, sign, m, s)
        support.update(_delta_summary(dvec))
        for e, vec in _dvec_modes(sf, dvec, window).items():
            vec = space.reduce(vec)
            for s2, c in vec.items():
                if s2 not in space.coords:
                    raise BoundOverflow(
                        f"image symbol outside the enumerated space: {s2}")
                modes.setdefault(e, [[sf.zero] * n for _ in range(n)])
                modes[e][space.coords[s2]][j] = c
    return TruncOp(modes, support)


def p_current_apply(act: EvAction, sign: int, s: Symbol,
                    var: int = 0) -> List[Tuple[Symbol, RatFunc]]:
    """The grouplike ratio of the opposite zero-index Cartan current at
    arguments z*q^2 and z, applied to one symbol.  Purely rational."""
    sf = act.sf
    out: Dict[Symbol, RatFunc] = {}
    for s2, r2 in act.cross_k(s):
        r2s = r2.shift_arg(sf.q ** 2).scale(-sf.one)
        for s3, r3 in act.k0_inv(-sign, s2):
            r = r3 * r2s
            if s3 in out:
                out[s3] = out[s3] + r
            else:
                out[s3] = r
    return list(out.items())


def p_current_op(space: EvSpace, sign: int, window: int) -> TruncOp:
    sf = space.rep.sf
    n = len(space.coords)
    modes: Dict[int, List[List[object]]] = {}
    direction = AT_INF if sign > 0 else AT_ZERO
    for s in space.basis:
        j = space.coords[s]
        for s2, r in p_current_apply(space.action, sign, s):
            lohi = ((-window, 0) if direction == AT_INF else (0, window))
            for e, c in r.expand(direction, *lohi).items():
                if not c:
                    continue
                if s2 not in space.coords:
                    raise BoundOverflow(
                        f"image symbol outside the enumerated space: {s2}")
                modes.setdefault(e, [[sf.zero] * n for _ in range(n)])
                modes[e][space.coords[s2]][j] = \
                    modes[e][space.coords[s2]][j] + c
    return TruncOp(modes, {})


# ---------------------------------------------------------------------------
# twists, embeddings and the other Dynkin node
# ---------------------------------------------------------------------------

def _scale_dvec_var(sf, dvec: DVec, var: int, c) -> DVec:
    """Substitute z_var -> c * z_var in every factor of a DVec."""
    out: DVec = {}
    for s, md in dvec.items():
        terms = []
        for t in md.terms:
            coeff = t.coeff
            facs = []
            for f in t.factors:
                e = f.mono[var]
                if not e:
                    facs.append(f)
                    continue
                ce = c ** e
                if isinstance(f, DeltaFactor):
                    coeff = coeff / ce ** f.order
                    facs.append(DeltaFactor(f.point / ce, f.mono, f.order))
                else:
                    facs.append(RFFactor(f.rf.shift_arg(ce), f.mono,
                                         f.direction))
            terms.append(type(t)(coeff, tuple(facs)))
        out[s] = MDist(sf, md.nvars, terms)
    return out


_TAU_ARG = {("K", +1): -1, ("K", -1): +1, ("X", +1): -1, ("X", -1): +1}


def _twisted_gen_op(act: EvAction, gen, var: int, arg_sign: int) -> Callable:
    base = act.gen_op(gen, var)
    if arg_sign == 1:
        return base
    sf = act.sf

    def op(s: Symbol) -> DVec:
        return _scale_dvec_var(sf, base(s), var, sf(-1))
    return op


@dataclass
class TwistedSpace:
    """An EvSpace with every current argument rescaled by a sign that
    depends on the current (the value of the twist at trivial central
    charge)."""
    space: EvSpace
    rule: Callable

    def gen_op(self, gen, var: int = 0) -> Callable:
        arg = self.rule(gen)
        return _twisted_gen_op(self.space.action, gen, var, arg)


def twist_tau(space: EvSpace) -> TwistedSpace:
    """Flip the argument of every plus-family current."""
    def rule(gen):
        if gen[0] in ("K", "X"):
            return _TAU_ARG[(gen[0], gen[1])] if gen[0] == "K" else \
                (-1 if gen[1] > 0 else 1)
        return 1
    return TwistedSpace(space, rule)


def twist_sigma(space: EvSpace) -> TwistedSpace:
    """Flip the argument of every dressed current."""
    def rule(gen):
        return -1 if gen[0] in ("K", "X") else 1
    return TwistedSpace(space, rule)


def iota_m_op(space: EvSpace, m: int, current, var: int = 0) -> Callable:
    """The m-th loop embedding composed with the evaluation: loop x
    currents land on the evaluated currents of index +-m, loop Cartan
    currents are fixed."""
    kind, sign = current
    act = space.action
    if kind == "x":
        if m == 0:
            return act.evX_op(sign, 0, var)
        return act.evX_op(sign, sign * m, var)
    if kind == "k":
        return act.loop_k_op(sign, var)
    raise ValueError(f"unknown loop current {current!r}")


def dynkin0_ops(space: EvSpace, var: int = 0) -> Dict[str, Callable]:
    """The images of the other Dynkin node's currents at trivial central
    charge, as symbol operators."""
    act = space.action
    sf = act.sf

    def x0_plus(s: Symbol) -> DVec:
        # minus the inverted plus zero-index Cartan current after the
        # lowering current of index 1
        out: DVec = {}
        inner = act.evX_op(-1, 1, var)(s)
        for s2, md in inner.items():
            for s3, r3 in act.k0_inv(+1, s2):
                fac = RFFactor(r3, act._mono(var), AT_ZERO)
                md2 = MDist(sf, act.nvars,
                            [type(t)(-t.coeff, t.factors + (fac,))
                             for t in md.terms])
                out[s3] = out.get(s3, MDist.zero(sf, act.nvars)) + md2
        return out

    def x0_minus(s: Symbol) -> DVec:
        # minus the raising current of index -1 after the inverted minus
        # zero-index Cartan current
        out: DVec = {}
        for s2, r2 in act.k0_inv(-1, s):
            fac = RFFactor(r2, act._mono(var), AT_INF)
            for s3, md in act.evX_op(+1, -1, var)(s2).items():
                md2 = MDist(sf, act.nvars,
                            [type(t)(-t.coeff, t.factors + (fac,))
                             for t in md.terms])
                out[s3] = out.get(s3, MDist.zero(sf, act.nvars)) + md2
        return out

    def k0(sign):
        def op(s: Symbol) -> DVec:
            out: DVec = {}
            for s2, r in act.k0_inv(-sign, s):
                md = MDist.term(sf, act.nvars, -sf.one,
                                [RFFactor(r, act._mono(var),
                                          AT_ZERO if sign < 0 else AT_INF)])
                out[s2] = out.get(s2, MDist.zero(sf, act.nvars)) + md
            return out
        return op

    return {"x0+": x0_plus, "x0-": x0_minus, "k0+": k0(+1), "k0-": k0(-1)}


def j_invariance_spot_check(space: EvSpace, trials: int = 20,
                            window: int = 4, seed: int = 0) -> bool:
    """Random combinations of quotient rows stay in the quotient span under
    the zero-index Cartan currents."""
    sf = space.rep.sf
    rng = random.Random(seed)
    rows = [row for _, row in space.jspan._pivots.values()]
    if not rows:
        return True
    act = space.action
    for _ in range(trials):
        vec: Vec = {}
        for row in rng.sample(rows, k=min(2, len(rows))):
            c = sf(rng.randint(1, 5))
            vec = vec_add(sf, vec, row, c)
        for sign in (+1, -1):
            dvec = smash_mul_action(space, ("K", sign, 0), vec)
            for e, mvec in _dvec_modes(sf, dvec, window).items():
                if space.reduce(mvec):
                    return False
    return True
