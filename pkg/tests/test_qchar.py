import pytest
from hypothesis import given, settings, strategies as st

from qloopforge.formal import AT_INF, AT_ZERO, RatFunc, expand_rational
from qloopforge.loopmod import (
    DrinfeldPoly, evaluation_module, lweight_decompose, tensor,
)
from qloopforge.qchar import (
    AdjacencyRecord, LWeightRational, ReconstructionError, YMonomial,
    a_monomial, a_shift_ratfunc, a_shift_series, classical_weight,
    gamma_apply, h_monomial, h_shift_ratfunc, h_shift_series, is_l_dominant,
    is_t_dominant, lweight_ratfunc, lweight_series, m1_t_dominance_criterion,
    monomial_of, monomial_ratfunc, multiset_equivalent, reconstruct_lweight,
)
from qloopforge.scalar import ScalarField, SpectralPoint

sf = ScalarField(["a", "b"])
t, q = sf.t, sf.q
A = SpectralPoint("a")
B = SpectralPoint("b")
aval, bval = sf.param("a"), sf.param("b")


def P(*points):
    return DrinfeldPoly(tuple(points))


# -- monomials ---------------------------------------------------------------

def test_monomial_of_examples():
    assert monomial_of(LWeightRational(P(A), P())) == YMonomial(((A, 1),))
    assert monomial_of(LWeightRational(P(), P())) == YMonomial()
    lw = LWeightRational(P(A, A), P(B))
    assert monomial_of(lw).as_dict() == {A: 2, B: -1}


def test_ymonomial_algebra():
    m = YMonomial(((A, 1),)) * YMonomial(((A, 1), (B, -1)))
    assert m.as_dict() == {A: 2, B: -1}
    assert (m * m.inverse()) == YMonomial()
    assert m.exponent(B) == -1 and m.exponent(A.shift(5)) == 0
    assert str(YMonomial(((A.shift(2), -1), (A, 1)))) == "Y[a]*Y[a*q^2]^-1"
    assert str(YMonomial()) == "1"


def test_monomial_of_is_multiplicative():
    lw1 = LWeightRational(P(A), P(B.shift(1)))
    lw2 = LWeightRational(P(A.shift(4)), P(B.shift(3)))
    prod = LWeightRational(P(A, A.shift(4)), P(B.shift(1), B.shift(3)))
    assert monomial_of(prod) == monomial_of(lw1) * monomial_of(lw2)
    assert lweight_ratfunc(sf, prod) == (
        lweight_ratfunc(sf, lw1) * lweight_ratfunc(sf, lw2))


# -- shift factors -------------------------------------------------------------

def test_h_shift_series_m1_against_direct_expansion():
    num = {0: sf.one, 1: -(aval / q**2 + aval), 2: aval**2 / q**2}
    den = {0: sf.one, 1: -(aval * q**2 + aval / q**4), 2: aval**2 / q**2}
    for sign, direction in ((+1, AT_INF), (-1, AT_ZERO)):
        assert h_shift_series(sf, 1, A, sign, 6) == expand_rational(
            sf, num, den, direction, 6)
    assert h_shift_series(sf, 1, A, +1, 6).coeffs[0] == sf.one


def test_h_shift_inverse_pairing():
    for m in (1, 2, 3):
        h = h_shift_ratfunc(sf, m, A)
        assert h * h.inv() == RatFunc.const(sf, sf.one)
    with pytest.raises(ValueError):
        h_shift_ratfunc(sf, 0, A)


def test_h_monomial_matches_shift_factor():
    for m in (1, 2, 3):
        assert monomial_ratfunc(sf, h_monomial(m, A)) == h_shift_ratfunc(sf, m, A)
    assert h_monomial(0, A) == YMonomial()
    # at m = 1 the Y_a factors cancel
    assert h_monomial(1, A).as_dict() == {A.shift(-2): -1, A.shift(2): 1}
    assert h_monomial(2, A).as_dict() == {
        A.shift(-4): -1, A.shift(-2): -1, A: 1, A.shift(2): 1}


def test_a_monomial_matches_shift_factor():
    assert monomial_ratfunc(sf, a_monomial(A)) == a_shift_ratfunc(sf, A)
    for sign in (+1, -1):
        assert a_shift_series(sf, A, sign, 8) == a_shift_ratfunc(sf, A).to_series(
            AT_INF if sign > 0 else AT_ZERO, 8)
    assert a_monomial(A).as_dict() == {A: 1, A.shift(2): 1}


# -- Gamma moves ---------------------------------------------------------------

def test_gamma_identity_and_example():
    nu = {A: 1, A.shift(2): 1, B: 3}
    assert gamma_apply(0, A, nu) == nu
    assert gamma_apply(1, A, {A.shift(-2): 1, A: 1}) == {A: 1, A.shift(2): 1}


def test_gamma_inverse():
    nu = {A.shift(-4): 2, A.shift(-2): 1, B: 1}
    out = gamma_apply(2, A, nu)
    assert gamma_apply(-2, A.shift(-4), out) == nu


def test_gamma_precondition():
    with pytest.raises(ValueError):
        gamma_apply(1, A, {A.shift(-2): 1, B: 1})
    with pytest.raises(ValueError):
        gamma_apply(0, A, {A: 1, A.shift(2): -1})


def test_multiset_equivalent_basics():
    nu = {A: 1, A.shift(2): 1}
    assert multiset_equivalent(nu, nu, depth=0)
    moved = {A.shift(4): 1, A.shift(6): 1}
    assert multiset_equivalent(nu, moved, depth=1)
    assert not multiset_equivalent({A: 1}, {B: 1}, depth=5)
    # conserved quantities give certain negatives
    assert not multiset_equivalent(nu, {A: 1}, depth=5)
    assert not multiset_equivalent(nu, {A.shift(1): 1, A.shift(3): 1}, depth=5)


def test_multiset_equivalent_needs_enough_depth():
    nu = {A: 1, A.shift(2): 1, A.shift(4): 1, A.shift(6): 1}
    far = {A.shift(-4): 1, A.shift(-2): 1, A.shift(10): 1, A.shift(12): 1}
    # one slide relocates a single adjacent pair, so two are required here
    assert not multiset_equivalent(nu, far, depth=1)
    assert multiset_equivalent(nu, far, depth=2)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_multiset_equivalent_recognizes_random_chains(data):
    nu = {A: 1, A.shift(2): 1, A.shift(data.draw(st.integers(-2, 4))): 2}
    cur = dict(nu)
    steps = data.draw(st.integers(0, 3))
    done = 0
    for _ in range(steps):
        pairs = [p for p in cur
                 if cur.get(p, 0) >= 1 and cur.get(p.shift(2), 0) >= 1]
        if not pairs:
            break
        base = data.draw(st.sampled_from(sorted(pairs)))
        m = data.draw(st.integers(-1, 1))
        cur = gamma_apply(m, base.shift(2 * m), cur)
        done += 1
    assert sum(cur.values()) == sum(nu.values())
    assert multiset_equivalent(nu, cur, depth=done, margin=4)


# -- rational weights and reconstruction ---------------------------------------

def test_lweight_series_sign_convention():
    lw = LWeightRational(P(A), P(), sign=-1)
    s = lweight_series(sf, lw, +1, 4)
    assert s.coeffs[0] == -q
    pos = lweight_series(sf, LWeightRational(P(A), P()), +1, 4)
    assert pos.coeffs[0] == q


def test_reconstruct_round_trip_cases():
    cases = [
        LWeightRational(P(), P()),
        LWeightRational(P(A), P(), sign=-1),
        LWeightRational(P(), P(A.shift(2))),
        LWeightRational(DrinfeldPoly.segment(A, 2), P(), sign=-1),
        LWeightRational(P(A, A.shift(4)), P(B.shift(-1)), sign=1),
        LWeightRational(DrinfeldPoly.segment(A, 3), P(B)),
    ]
    for lw in cases:
        bound = max(lw.P.degree, lw.Q.degree, 1)
        w = 2 * bound + 2
        got = reconstruct_lweight(
            sf, lweight_series(sf, lw, +1, w), lweight_series(sf, lw, -1, w),
            bound)
        assert got == lw


def test_reconstruct_cancelling_segment():
    # adjacent P roots make the rational form collapse telescopically; the
    # split must still recover the full segment
    lw = LWeightRational(DrinfeldPoly.segment(A, 4), P(), sign=-1)
    got = reconstruct_lweight(
        sf, lweight_series(sf, lw, +1, 10), lweight_series(sf, lw, -1, 10), 4)
    assert got == lw


def test_reconstruct_rejects_bad_input():
    lw = LWeightRational(P(A), P())
    kp = lweight_series(sf, lw, +1, 6)
    km = lweight_series(sf, lw, -1, 6)
    with pytest.raises(ValueError):
        reconstruct_lweight(sf, kp, km, 3)  # windows below 2*bound + 2
    # a constant -q has no coprime rational form of matching degree
    const_p = expand_rational(sf, {0: -q}, {0: sf.one}, AT_INF, 6)
    const_m = expand_rational(sf, {0: -q}, {0: sf.one}, AT_ZERO, 6)
    with pytest.raises(ReconstructionError):
        reconstruct_lweight(sf, const_p, const_m, 2)
    # perturbing one coefficient breaks exact rationality
    bad = dict(kp.coeffs)
    bad[3] = bad.get(3, sf.zero) + sf.one
    from qloopforge.formal import Series
    with pytest.raises(ReconstructionError):
        reconstruct_lweight(sf, Series(sf, AT_INF, 6, bad), km, 1)


def test_reconstruct_from_module_blocks():
    w1 = evaluation_module(sf, 1, A)
    monos = set()
    for blk in lweight_decompose(w1):
        lw = reconstruct_lweight(sf, blk.kappa_plus, blk.kappa_minus, 1)
        assert lw.sign == 1
        monos.add(monomial_of(lw))
    assert monos == {YMonomial(((A, 1),)), YMonomial(((A.shift(2), -1),))}


def test_reconstruct_tensor_monomials():
    w = tensor(evaluation_module(sf, 1, A),
               evaluation_module(sf, 1, A.shift(2)))
    monos = set()
    for blk in lweight_decompose(w):
        lw = reconstruct_lweight(sf, blk.kappa_plus, blk.kappa_minus, 2)
        monos.add(monomial_of(lw))
    assert monos == {
        YMonomial(((A, 1), (A.shift(2), 1))),
        YMonomial(((A, 1), (A.shift(4), -1))),
        YMonomial(),
        YMonomial(((A.shift(2), -1), (A.shift(4), -1))),
    }


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_reconstruct_round_trip_random(data):
    ks = st.integers(-3, 3)
    proots = [A.shift(2 * data.draw(ks)) for _ in range(data.draw(st.integers(0, 2)))]
    qroots = [B.shift(data.draw(ks)) for _ in range(data.draw(st.integers(0, 2)))]
    sign = data.draw(st.sampled_from([1, -1]))
    lw = LWeightRational(P(*proots), P(*qroots), sign)
    bound = max(lw.P.degree, lw.Q.degree, 1)
    w = 2 * bound + 2
    got = reconstruct_lweight(
        sf, lweight_series(sf, lw, +1, w), lweight_series(sf, lw, -1, w), bound)
    assert got == lw


# -- dominance ------------------------------------------------------------------

def test_classical_weight_and_l_dominance():
    assert classical_weight(LWeightRational(P(A, B), P(A.shift(3)))) == 1
    good = [LWeightRational(P(A, A.shift(2)), P()),
            LWeightRational(P(B, B.shift(4)), P())]
    assert is_l_dominant(good)
    assert not is_l_dominant(good + [LWeightRational(P(A), P())])
    assert not is_l_dominant([LWeightRational(P(A, B), P(A.shift(3)))])
    assert not is_l_dominant([LWeightRational(P(), P())])


def test_is_t_dominant_root_conditions():
    lws = [LWeightRational(P(A.shift(4), A.shift(6)), P()),
           LWeightRational(P(A, A.shift(2)), P())]
    # raising K-current at point a q^2: needs roots a, a q^2 in the target P
    good = AdjacencyRecord(0, 1, "K", +1, A.shift(2), m=1)
    assert is_t_dominant(lws, [good])
    assert is_t_dominant(lws, [])
    # lowering current at the same point needs roots a q^2, a q^4 instead
    bad = AdjacencyRecord(0, 1, "K", -1, A.shift(2), m=1)
    assert not is_t_dominant(lws, [bad])
    # X-adjacencies impose no root condition here
    assert is_t_dominant(lws, [AdjacencyRecord(0, 1, "X", +1, B)])
    with pytest.raises(ValueError):
        is_t_dominant([LWeightRational(P(A), P(B.shift(1)))], [])


def test_m1_sufficient_criterion():
    lws = [LWeightRational(P(A.shift(4), A.shift(6)), P()),
           LWeightRational(P(A, A.shift(2)), P())]
    assert m1_t_dominance_criterion(lws, [AdjacencyRecord(0, 1, "K", +1, A, m=1)])
    assert not m1_t_dominance_criterion(
        lws, [AdjacencyRecord(0, 1, "K", +1, B, m=1)])
    assert not m1_t_dominance_criterion(
        lws, [AdjacencyRecord(0, 1, "K", +1, A, m=2)])


def test_adjacency_record_validation():
    with pytest.raises(ValueError):
        AdjacencyRecord(0, 1, "K", +1, A)  # missing m
    with pytest.raises(ValueError):
        AdjacencyRecord(0, 1, "Z", +1, A)
    with pytest.raises(ValueError):
        AdjacencyRecord(0, 1, "X", 0, A)
