"""Compositions and antipode coefficients, tensor coproduct operators, and
the elliptic-Hall relation suite for the images of the ratio currents.

Everything acts at trivial central charge on the evaluated symbol spaces of
type (1, 0) modules, where the central currents are identically one.  Tensor
operators are maps on pairs of symbols, one leg per factor, each leg reduced
against its own quotient span.  A tensor term whose two legs are both
delta-supported in the same variable has no meaning as a distribution and is
rejected; every display verified here only ever needs terms with at most one
delta-supported leg.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .dist import DeltaFactor, MDist, RFFactor, monomial_dist
from .formal import AT_INF, AT_ZERO
from .loopmod import RelationReport
from .evalg import (BoundOverflow, EvAction, EvSpace, Symbol, TruncOp, Vec,
                    _apply_op, _core, _delta_summary, _dvec_scale, _poly2,
                    _scale_dvec_var, p_current_apply, t_current_apply)

__all__ = [
    "Composition", "compositions", "antipode_coeff",
    "coproduct0_K_on_tensor", "coproduct0_K_pair_op",
    "coproduct0_t_pair_op", "check_coproduct0_multiplicative",
    "check_coproduct0_consistency", "f_image_op", "check_eha_relations",
]


# ---------------------------------------------------------------------------
# compositions and antipode coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Composition:
    """An ordered tuple of positive integers."""
    parts: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts or any(p < 1 for p in self.parts):
            raise ValueError("composition parts must be positive integers")

    @property
    def weight(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)


def compositions(m: int, n: int) -> List[Composition]:
    """All ordered ways of writing m as a sum of n positive parts."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    out = []
    for cuts in itertools.combinations(range(1, m), n - 1):
        pts = (0,) + cuts + (m,)
        out.append(Composition(tuple(pts[i + 1] - pts[i]
                                     for i in range(n))))
    return out


def antipode_coeff(sf, m: int, lam: Composition):
    """The scalar weighting the ordered ratio-current product labelled by a
    composition in the antipode expansion: a (q - 1/q) power times a ratio
    of quantum integers, with cancellation performed on the formal multiset
    of indices so that zero quantum integers never evaluate prematurely.

    An index-zero factor that survives in the denominator raises
    ZeroDivisionError: such (m, lam) are outside the domain."""
    if lam.weight != m:
        raise ValueError("composition weight must equal m")
    num = [m + 1] + [p - 1 for p in lam.parts]
    den = [m - 1] + [p + 1 for p in lam.parts]
    ratio = sf.qratio_product(num, den)
    q = sf.q
    return (q - 1 / q) ** (len(lam) - 1) * ratio


# ---------------------------------------------------------------------------
# tensor legs and pair vectors
# ---------------------------------------------------------------------------

PairSym = Tuple[Symbol, Symbol]
PairDVec = Dict[PairSym, MDist]
PairVec = Dict[PairSym, object]


def _delta_vars(md: MDist) -> set:
    out = set()
    for t in md.terms:
        for f in t.factors:
            if isinstance(f, DeltaFactor):
                out.update(v for v, e in enumerate(f.mono) if e)
    return out


def _id_leg(sf, nvars: int) -> Callable:
    def op(s: Symbol):
        return {s: MDist.scalar(sf, nvars, sf.one)}
    return op


def _pair_add(sf, nvars: int, a: PairDVec, b: PairDVec) -> PairDVec:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, MDist.zero(sf, nvars)) + v
    return out


def _pair_scale(pd: PairDVec, md: MDist) -> PairDVec:
    return {k: v * md for k, v in pd.items()}


def _pair_apply(sf, nvars: int, legA: Callable, legB: Callable,
                pd: PairDVec) -> PairDVec:
    """One tensor term applied to a pair vector: the two legs act on their
    own slots and the scalar distribution parts multiply."""
    out: PairDVec = {}
    for (sA, sB), md0 in pd.items():
        dvA = legA(sA)
        if not dvA:
            continue
        dvB = legB(sB)
        for sA2, mdA in dvA.items():
            dA = _delta_vars(mdA)
            for sB2, mdB in dvB.items():
                if dA & _delta_vars(mdB):
                    raise ValueError(
                        "tensor legs are both delta-supported in the "
                        "same variable")
                key = (sA2, sB2)
                md = mdA * mdB * md0
                out[key] = out.get(key, MDist.zero(sf, nvars)) + md
    return out


def _pair_reduce(A: EvSpace, B: EvSpace, pvec: PairVec) -> PairVec:
    """Reduce the left legs against the quotient span of A, then the right
    legs against that of B."""
    sf = A.rep.sf
    byB: Dict[Symbol, Vec] = {}
    for (sA, sB), c in pvec.items():
        if c:
            byB.setdefault(sB, {})
            byB[sB][sA] = byB[sB].get(sA, sf.zero) + c
    mid: PairVec = {}
    for sB, v in byB.items():
        for sA2, c2 in A.jspan.reduce(v).items():
            mid[(sA2, sB)] = mid.get((sA2, sB), sf.zero) + c2
    byA: Dict[Symbol, Vec] = {}
    for (sA, sB), c in mid.items():
        if c:
            byA.setdefault(sA, {})
            byA[sA][sB] = byA[sA].get(sB, sf.zero) + c
    out: PairVec = {}
    for sA, v in byA.items():
        for sB2, c2 in B.jspan.reduce(v).items():
            out[(sA, sB2)] = out.get((sA, sB2), sf.zero) + c2
    return {k: v for k, v in out.items() if v}


def _pair_modes(sf, pd: PairDVec, window: int):
    modes: Dict[Tuple[int, ...], PairVec] = {}
    for key, md in pd.items():
        for e, c in md.window_grid(window).items():
            modes.setdefault(e, {})
            modes[e][key] = modes[e].get(key, sf.zero) + c
    return {e: {k: c for k, c in v.items() if c} for e, v in modes.items()}


def _pair_residual(sf, A: EvSpace, B: EvSpace, lhs: PairDVec, rhs: PairDVec,
                   window: int):
    """None when lhs = rhs modulo the two quotients on the window."""
    grids: Dict[Tuple[int, ...], PairVec] = {}
    for key in set(lhs) | set(rhs):
        nv = (lhs.get(key) or rhs.get(key)).nvars
        zero = MDist.zero(sf, nv)
        ga = lhs.get(key, zero).window_grid(window)
        gb = rhs.get(key, zero).window_grid(window)
        for e in set(ga) | set(gb):
            c = ga.get(e, sf.zero) - gb.get(e, sf.zero)
            if c:
                grids.setdefault(e, {})
                grids[e][key] = grids[e].get(key, sf.zero) + c
    for e, vec in grids.items():
        rem = _pair_reduce(A, B, vec)
        if rem:
            key, c = next(iter(rem.items()))
            return (e, key, c)
    return None


# ---------------------------------------------------------------------------
# the zeroth tensor coproduct
# ---------------------------------------------------------------------------

def _K_leg(act: EvAction, sign: int, idx: int, var: int,
           argc=None) -> Callable:
    base = act.k0_op(sign, var) if idx == 0 else act.evK_op(sign, idx, var)
    if argc is None:
        return base
    sf = act.sf

    def op(s: Symbol):
        return _scale_dvec_var(sf, base(s), var, argc)
    return op


def _p_leg(act: EvAction, sign: int, var: int, argc) -> Callable:
    """The grouplike ratio current at a rescaled argument, as a purely
    rational leg."""
    sf = act.sf
    mono = act._mono(var)
    direction = AT_INF if sign > 0 else AT_ZERO

    def op(s: Symbol):
        out = {}
        for s2, r in p_current_apply(act, sign, s):
            md = MDist.term(sf, act.nvars, sf.one,
                            [RFFactor(r.shift_arg(argc), mono, direction)])
            out[s2] = out.get(s2, MDist.zero(sf, act.nvars)) + md
        return out
    return op


def _t_leg(act: EvAction, sign: int, m: int, var: int, argc=None) -> Callable:
    sf = act.sf

    def op(s: Symbol):
        dv = t_current_apply(act, sign, m, s, var)
        if argc is not None:
            dv = _scale_dvec_var(sf, dv, var, argc)
        return dv
    return op


def coproduct0_K_pair_op(actA: EvAction, actB: EvAction, sign: int, m: int,
                         var: int = 0) -> Callable:
    """The zeroth tensor coproduct of the dressed Cartan current of index
    sign*m at trivial central charge, as a map on pair vectors.  Each of the
    m+1 terms carries the current of index k on one slot and of index m-k,
    at the argument rescaled by q^(-2k), on the other; the overall sign is
    minus.  Terms with two delta-supported legs (possible only for m >= 2)
    are rejected."""
    if m < 0:
        raise ValueError("m must be >= 0")
    sf = actA.sf
    nv = actA.nvars

    def op(pd: PairDVec) -> PairDVec:
        out: PairDVec = {}
        for k in range(m + 1):
            argc = sf.qpow(-2 * k) if k else None
            if sign > 0:
                legA = _K_leg(actA, +1, k, var)
                legB = _K_leg(actB, +1, m - k, var, argc)
            else:
                legA = _K_leg(actA, -1, m - k, var, argc)
                legB = _K_leg(actB, -1, k, var)
            out = _pair_add(sf, nv, out, _pair_apply(sf, nv, legA, legB, pd))
        return _pair_scale(out, MDist.scalar(sf, nv, -sf.one))
    return op


def coproduct0_t_pair_op(actA: EvAction, actB: EvAction, sign: int, m: int,
                         var: int = 0) -> Callable:
    """The zeroth tensor coproduct of the ratio current of index sign*m at
    trivial central charge: the primitive-like two-term shape dressed with
    grouplike ratio legs, plus cross terms for m >= 2 (which are rejected
    when both legs are delta-supported)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    sf = actA.sf
    nv = actA.nvars
    q = sf.q

    def p_prod_leg(act, psign, ks):
        legs = [_p_leg(act, psign, var, sf.qpow(-2 * k)) for k in ks]

        def op(s: Symbol):
            dv = {s: MDist.scalar(sf, nv, sf.one)}
            for leg in legs:
                dv = _apply_op(sf, nv, leg, dv)
            return dv
        return op

    def op(pd: PairDVec) -> PairDVec:
        out: PairDVec = {}
        if sign > 0:
            # index-m current on the left slot, identity on the right
            out = _pair_add(sf, nv, out, _pair_apply(
                sf, nv, _t_leg(actA, +1, m, var), _id_leg(sf, nv), pd))
            # full grouplike product on the left, index-m on the right
            out = _pair_add(sf, nv, out, _pair_apply(
                sf, nv, p_prod_leg(actA, -1, range(1, m + 1)),
                _t_leg(actB, +1, m, var), pd))
            for k in range(1, m):
                def legA(s, k=k):
                    dv = _t_leg(actA, +1, k, var)(s)
                    return _apply_op(sf, nv,
                                     p_prod_leg(actA, -1, range(k + 1, m + 1)),
                                     dv)
                term = _pair_apply(sf, nv, legA,
                                   _t_leg(actB, +1, m - k, var,
                                          sf.qpow(-2 * k)), pd)
                out = _pair_add(sf, nv, out, _pair_scale(
                    term, MDist.scalar(sf, nv, -(q - 1 / q))))
        else:
            out = _pair_add(sf, nv, out, _pair_apply(
                sf, nv, _t_leg(actA, -1, m, var),
                p_prod_leg(actB, +1, range(1, m + 1)), pd))
            out = _pair_add(sf, nv, out, _pair_apply(
                sf, nv, _id_leg(sf, nv), _t_leg(actB, -1, m, var), pd))
            for k in range(1, m):
                def legB(s, k=k):
                    dv = _t_leg(actB, -1, m, var)(s)
                    return _apply_op(sf, nv,
                                     p_prod_leg(actB, +1, range(k + 1, m + 1)),
                                     dv)
                term = _pair_apply(sf, nv,
                                   _t_leg(actA, -1, m - k, var,
                                          sf.qpow(-2 * k)), legB, pd)
                out = _pair_add(sf, nv, out, _pair_scale(
                    term, MDist.scalar(sf, nv, q - 1 / q)))
        return out
    return op


def _pair_coords(A: EvSpace, B: EvSpace):
    nB = len(B.coords)

    def index(key: PairSym) -> int:
        sA, sB = key
        iA = A.coords.get(sA)
        iB = B.coords.get(sB)
        if iA is None or iB is None:
            raise BoundOverflow(
                f"tensor image outside the enumerated pair space: {key}")
        return iA * nB + iB
    return index, len(A.coords) * nB


def coproduct0_K_on_tensor(sign: int, m: int, A: EvSpace, B: EvSpace,
                           window: int) -> TruncOp:
    """Materialize the zeroth tensor coproduct of the dressed Cartan current
    of index sign*m as mode matrices on the pair coordinates of two spaces."""
    sf = A.rep.sf
    op = coproduct0_K_pair_op(A.action, B.action, sign, m)
    index, n = _pair_coords(A, B)
    modes: Dict[int, List[List[object]]] = {}
    support: Dict[Tuple[object, int], bool] = {}
    for sA in A.basis:
        for sB in B.basis:
            j = index((sA, sB))
            pd = op({(sA, sB): MDist.scalar(sf, 1, sf.one)})
            support.update(_delta_summary(pd))
            for (e,), vec in _pair_modes(sf, pd, window).items():
                vec = _pair_reduce(A, B, vec)
                for key, c in vec.items():
                    modes.setdefault(e, [[sf.zero] * n for _ in range(n)])
                    modes[e][index(key)][j] = c
    return TruncOp(modes, support)


def check_coproduct0_multiplicative(A: EvSpace, B: EvSpace, m: int = 1,
                                    n: int = 1, window: int = 4
                                    ) -> RelationReport:
    """The tensor coproducts of the dressed Cartan currents satisfy the same
    exchange relations as the currents themselves, both for like and for
    opposite signs, as windowed pair-operator identities modulo the two
    quotients."""
    sf = A.rep.sf
    q = sf.q
    actA = EvAction(A.rep, nvars=2)
    actB = EvAction(B.rep, nvars=2)
    rpt = RelationReport()
    cores = [((i, j), {(Symbol((), i, ()), Symbol((), j, ())):
                       MDist.scalar(sf, 2, sf.one)})
             for i in range(A.rep.dim) for j in range(B.rep.dim)]

    def D(sign, idx, var):
        return coproduct0_K_pair_op(actA, actB, sign, idx, var)

    # like signs
    p_l = (_poly2(sf, sf.one, -q ** 2)
           * _poly2(sf, sf.one, -q ** (2 * (m - n - 1))))
    p_r = (_poly2(sf, q ** 2, -sf.one)
           * _poly2(sf, q ** (-2), -q ** (2 * (m - n))))
    for ij, core in cores:
        lhs = _pair_scale(D(+1, m, 0)(D(+1, n, 1)(core)), p_l)
        rhs = _pair_scale(D(+1, n, 1)(D(+1, m, 0)(core)), p_r)
        det = _pair_residual(sf, A, B, lhs, rhs, window)
        rpt.add(f"coprod K+K+ m={m} n={n} core={ij}", det)

    # opposite signs
    p_l = (_poly2(sf, q ** (2 * (1 - m)), -sf.one)
           * _poly2(sf, q ** (2 * (n - 1)), -sf.one))
    p_r = (_poly2(sf, q ** (-2 * m), -q ** 2)
           * _poly2(sf, q ** (2 * n), -q ** (-2)))
    for ij, core in cores:
        lhs = _pair_scale(D(+1, m, 0)(D(-1, n, 1)(core)), p_l)
        rhs = _pair_scale(D(-1, n, 1)(D(+1, m, 0)(core)), p_r)
        det = _pair_residual(sf, A, B, lhs, rhs, window)
        rpt.add(f"coprod K+K- m={m} n={n} core={ij}", det)
    return rpt


def check_coproduct0_consistency(A: EvSpace, B: EvSpace, window: int = 4
                                 ) -> RelationReport:
    """The index-one tensor coproduct of the dressed Cartan current agrees
    with the composite route through the ratio current: the index-one
    current factors as the zero-index current at a shifted argument times
    the ratio current, and the coproduct respects that factorization."""
    sf = A.rep.sf
    q = sf.q
    actA = A.action
    actB = B.action
    rpt = RelationReport()
    shift2 = sf.qpow(-2)
    cores = [((i, j), {(Symbol((), i, ()), Symbol((), j, ())):
                       MDist.scalar(sf, 1, sf.one)})
             for i in range(A.rep.dim) for j in range(B.rep.dim)]

    def grouplike_k0(sign):
        def op(pd):
            legA = actA.k0_op(sign, 0, shift=shift2)
            legB = actB.k0_op(sign, 0, shift=shift2)
            out = _pair_apply(sf, 1, legA, legB, pd)
            return _pair_scale(out, MDist.scalar(sf, 1, -sf.one))
        return op

    Dt_p = coproduct0_t_pair_op(actA, actB, +1, 1)
    Dt_m = coproduct0_t_pair_op(actA, actB, -1, 1)
    for ij, core in cores:
        lhs = coproduct0_K_pair_op(actA, actB, +1, 1)(core)
        rhs = _pair_scale(grouplike_k0(+1)(Dt_p(core)),
                          MDist.scalar(sf, 1, -(q - 1 / q)))
        det = _pair_residual(sf, A, B, lhs, rhs, window)
        rpt.add(f"coprod K+ m=1 vs ratio route core={ij}", det)

        lhs = coproduct0_K_pair_op(actA, actB, -1, 1)(core)
        rhs = _pair_scale(Dt_m(grouplike_k0(-1)(core)),
                          MDist.scalar(sf, 1, q - 1 / q))
        det = _pair_residual(sf, A, B, lhs, rhs, window)
        rpt.add(f"coprod K- m=1 vs ratio route core={ij}", det)
    return rpt


# ---------------------------------------------------------------------------
# images of the elliptic Hall generators
# ---------------------------------------------------------------------------

def _scale_truncop(op: TruncOp, c) -> TruncOp:
    return TruncOp({e: [[c * x for x in row] for row in mat]
                    for e, mat in op.modes.items()},
                   dict(op.delta_support), op.bounds_ok)


def f_image_op(gen: str, space: EvSpace, window: int) -> TruncOp:
    """The evaluated image of one elliptic Hall generator current on a
    space, as mode matrices.  gen is one of 'C', 'psi+', 'psi-', 'e+',
    'e-'."""
    from .evalg import t_current_op
    sf = space.rep.sf
    n = len(space.coords)
    if gen == "C":
        ident = [[sf.one if i == j else sf.zero for j in range(n)]
                 for i in range(n)]
        return TruncOp({0: ident}, {})
    if gen in ("psi+", "psi-"):
        sign = +1 if gen == "psi+" else -1
        direction = AT_INF if sign > 0 else AT_ZERO
        modes: Dict[int, List[List[object]]] = {}
        for s in space.basis:
            j = space.coords[s]
            for s2, r in p_current_apply(space.action, sign, s):
                rr = r.shift_arg(sf.qpow(-2))
                lohi = ((-window, 0) if direction == AT_INF
                        else (0, window))
                for e, c in rr.expand(direction, *lohi).items():
                    if not c:
                        continue
                    if s2 not in space.coords:
                        raise BoundOverflow(
                            f"image symbol outside the enumerated space:"
                            f" {s2}")
                    modes.setdefault(e, [[sf.zero] * n for _ in range(n)])
                    i = space.coords[s2]
                    modes[e][i][j] = modes[e][i][j] + c
        return TruncOp(modes, {})
    if gen == "e+":
        return t_current_op(space, +1, 1, window)
    if gen == "e-":
        c = sf.one / (sf.qpow(2) - sf.qpow(-2)) ** 2
        return _scale_truncop(t_current_op(space, -1, 1, window), c)
    raise ValueError(f"unknown generator current {gen!r}")


# ---------------------------------------------------------------------------
# the elliptic Hall relation suite
# ---------------------------------------------------------------------------

def _g_dist(sf, nvars: int, i: int, j: int) -> MDist:
    """The cubic exchange polynomial g(x_i, x_j) with parameter triple
    (q^-4, q^2, q^2), as a distribution."""
    def lin(c):
        ei = tuple(1 if k == i else 0 for k in range(nvars))
        ej = tuple(1 if k == j else 0 for k in range(nvars))
        return (monomial_dist(sf, nvars, sf.one, ei)
                + monomial_dist(sf, nvars, -c, ej))
    return lin(sf.qpow(-4)) * lin(sf.qpow(2)) * lin(sf.qpow(2))


def _g_one_one(sf):
    return ((sf.one - sf.qpow(-4)) * (sf.one - sf.qpow(2))
            * (sf.one - sf.qpow(2)))


def _psi_op(act: EvAction, sign: int, var: int) -> Callable:
    return _p_leg(act, sign, var, act.sf.qpow(-2))


def _e_op(act: EvAction, sign: int, var: int) -> Callable:
    sf = act.sf
    if sign > 0:
        def op(s: Symbol):
            return t_current_apply(act, +1, 1, s, var)
        return op
    c = sf.one / (sf.qpow(2) - sf.qpow(-2)) ** 2

    def op(s: Symbol):
        return {s2: md.scale(c)
                for s2, md in t_current_apply(act, -1, 1, s, var).items()}
    return op


def check_eha_relations(space: EvSpace, window: int = 4,
                        serre_modes: Sequence[int] = (0,),
                        cores: Optional[Sequence[int]] = None
                        ) -> RelationReport:
    """Verify the defining relations of the elliptic Hall algebra with
    parameter triple (q^-4, q^2, q^2) for the evaluated generator images on
    one space, as exact windowed identities modulo the quotient.  The cubic
    relation is checked at the listed residue modes only."""
    from .evalg import _residual_detail
    sf = space.rep.sf
    rep = space.rep
    act2 = EvAction(rep, nvars=2)
    jspan = space.jspan
    rpt = RelationReport()
    core_idx = range(rep.dim) if cores is None else cores
    cores2 = [(i, _core(sf, 2, Symbol((), i, ()))) for i in core_idx]
    g01 = _g_dist(sf, 2, 0, 1)
    g10 = _g_dist(sf, 2, 1, 0)

    def seq(op0, op1, core):
        # the var-1 current sits rightmost in the display, so apply it first
        return _apply_op(sf, 2, op0, _apply_op(sf, 2, op1, core))

    def compare(name, lhs, rhs):
        rpt.add(name, _residual_detail(sf, jspan, lhs, rhs, window))

    for sign, tag in ((+1, "+"), (-1, "-")):
        psi = _psi_op(act2, sign, 0)
        psi_w = _psi_op(act2, sign, 1)
        for i, core in cores2:
            compare(f"psi{tag}psi{tag} core={i}",
                    seq(psi, psi_w, core), seq(psi_w, psi, core))

    psi_p = _psi_op(act2, +1, 0)
    psi_m_w = _psi_op(act2, -1, 1)
    pre = g01 * g10
    for i, core in cores2:
        compare(f"psi+psi- core={i}",
                _dvec_scale(seq(psi_p, psi_m_w, core), pre),
                _dvec_scale(seq(psi_m_w, psi_p, core), pre))

    for sign, tag in ((+1, "+"), (-1, "-")):
        psi = _psi_op(act2, sign, 0)
        ep_w = _e_op(act2, +1, 1)
        em_w = _e_op(act2, -1, 1)
        for i, core in cores2:
            lhs = _dvec_scale(seq(psi, ep_w, core), g01)
            rhs = _dvec_scale(seq(ep_w, psi, core),
                              g10 * MDist.scalar(sf, 2, -sf.one))
            compare(f"psi{tag}e+ core={i}", lhs, rhs)
            lhs = _dvec_scale(seq(psi, em_w, core), g10)
            rhs = _dvec_scale(seq(em_w, psi, core),
                              g01 * MDist.scalar(sf, 2, -sf.one))
            compare(f"psi{tag}e- core={i}", lhs, rhs)

    ep = _e_op(act2, +1, 0)
    ep_w = _e_op(act2, +1, 1)
    em = _e_op(act2, -1, 0)
    em_w = _e_op(act2, -1, 1)
    g11 = _g_one_one(sf)
    dlt = MDist.term(sf, 2, sf.one, [DeltaFactor(sf.one, (-1, 1), 0)])
    for i, core in cores2:
        lhs = _pair_free_sub(sf, seq(ep, em_w, core), seq(em_w, ep, core))
        rhs: Dict[Symbol, MDist] = {}
        for s2, md in _apply_op(sf, 2, _psi_op(act2, +1, 1), core).items():
            rhs[s2] = rhs.get(s2, MDist.zero(sf, 2)) \
                + md * dlt.scale(sf.one / g11)
        for s2, md in _apply_op(sf, 2, _psi_op(act2, -1, 0), core).items():
            rhs[s2] = rhs.get(s2, MDist.zero(sf, 2)) \
                + md * dlt.scale(-sf.one / g11)
        compare(f"e+e- core={i}", lhs, rhs)

        lhs = _dvec_scale(seq(ep, ep_w, core), g01)
        rhs = _dvec_scale(seq(ep_w, ep, core),
                          g10 * MDist.scalar(sf, 2, -sf.one))
        compare(f"e+e+ core={i}", lhs, rhs)
        lhs = _dvec_scale(seq(em, em_w, core), g10)
        rhs = _dvec_scale(seq(em_w, em, core),
                          g01 * MDist.scalar(sf, 2, -sf.one))
        compare(f"e-e- core={i}", lhs, rhs)

    if serre_modes:
        act3 = EvAction(rep, nvars=3)
        # (v + z)(w^2 - v z) in the variables (v, w, z) = (0, 1, 2)
        pdist = (monomial_dist(sf, 3, sf.one, (1, 2, 0))
                 + monomial_dist(sf, 3, -sf.one, (2, 0, 1))
                 + monomial_dist(sf, 3, sf.one, (0, 2, 1))
                 + monomial_dist(sf, 3, -sf.one, (1, 0, 2)))
        for sign, tag in ((+1, "+"), (-1, "-")):
            e0 = _e_op(act3, sign, 0)
            e1 = _e_op(act3, sign, 1)
            e2 = _e_op(act3, sign, 2)
            for i in core_idx:
                core3 = _core(sf, 3, Symbol((), i, ()))
                x = _apply_op(sf, 3, e0,
                              _apply_op(sf, 3, e1,
                                        _apply_op(sf, 3, e2, core3)))
                x = _dvec_scale(x, pdist)
                for mres in serre_modes:
                    target = (-mres - 1,) * 3
                    w3 = abs(mres) + 2
                    vec: Vec = {}
                    for s2, md in x.items():
                        c = md.window_grid(w3).get(target, sf.zero)
                        if c:
                            vec[s2] = vec.get(s2, sf.zero) + c
                    rem = jspan.reduce(vec)
                    det = None if not rem else next(iter(rem.items()))
                    rpt.add(f"serre e{tag} mode={mres} core={i}", det)
    return rpt


def _pair_free_sub(sf, a, b):
    out = dict(a)
    for k, v in b.items():
        cur = out.get(k)
        neg = v.scale(-sf.one)
        out[k] = neg if cur is None else cur + neg
    return out
