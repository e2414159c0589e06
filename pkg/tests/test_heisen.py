import random

import pytest
from hypothesis import given, settings, strategies as st

from qloopforge.formal import AT_INF, AT_ZERO, RatFunc, expand_rational
from qloopforge.heisen import (
    Atom, CurrentSeries, Theta_closed, check_h_identities,
    check_lr_identities, current_L, current_R, dress_H, dress_L, dress_R,
    dress_atoms, h_atoms, invert_word, lambda_m_ratfunc, lambda_ratfunc,
    merged_shifts, normal_order, pbw_one, pbw_term, pbw_zero, reduce_word,
    rho_m_ratfunc, rho_ratfunc, theta_Theta_commutation_check, theta_coeff,
    theta_cross_ratfunc, theta_mn_closed, theta_mn_series, theta_ratfunc,
    theta_series, token_element, triangle_action, VLaurent, _recip_arg,
    cartan_conjugate,
)
from qloopforge.scalar import ScalarField

sf = ScalarField([])
t = sf.t


# ---------------------------------------------------------------------------
# theta
# ---------------------------------------------------------------------------

def test_theta_constant_term_is_one():
    for sign in (1, -1):
        assert theta_series(sf, sign, 4).coeffs[0] == sf.one


def test_theta_plus_against_expand_rational():
    # (1 - z)(1 - t^8 z) / (1 - t^4 z)^2, expanded by the generic divider
    num = {0: sf.one, -1: -(sf.one + t**8), -2: t**8}
    den = {0: sf.one, -1: -2 * t**4, -2: t**8}
    assert theta_series(sf, 1, 8) == expand_rational(sf, num, den, AT_ZERO, 8)


def test_theta_minus_is_shifted_theta_plus():
    assert theta_ratfunc(sf, -1) == theta_ratfunc(sf, 1).shift_arg(t**-8)
    shifted = theta_ratfunc(sf, 1).shift_arg(t**-8).to_series(AT_ZERO, 8)
    assert theta_series(sf, -1, 8) == shifted


def test_theta_coefficients_closed_form():
    gap = (t**2 - t**-2) ** 2
    for sign in (1, -1):
        for p in range(1, 7):
            assert theta_coeff(sf, sign, p) == -sf(p) * t**(4 * sign * p) * gap


# ---------------------------------------------------------------------------
# normal ordering
# ---------------------------------------------------------------------------

def oracle_normal_order(sf, sign, word, rng):
    """Exhaustive rewriting with a randomized choice of reduction site."""
    e0 = 0
    toks = []
    for kind, m in word:
        if (kind == "R") == (sign > 0):
            e0 += 1
        if m > 0:
            toks.append((kind, m))
    states = {tuple(toks): sf.one}
    while True:
        pick = None
        for w in states:
            sites = [i for i in range(len(w) - 1)
                     if w[i][0] == "R" and w[i + 1][0] == "L"]
            if sites:
                pick = (w, sites)
                break
        if pick is None:
            break
        w, sites = pick
        i = rng.choice(sites)
        c = states.pop(w)
        m, n = w[i][1], w[i + 1][1]
        for p in range(min(m, n) + 1):
            coef = sf.one if p == 0 else theta_coeff(sf, sign, p)
            mid = []
            if n - p:
                mid.append(("L", n - p))
            if m - p:
                mid.append(("R", m - p))
            w2 = w[:i] + tuple(mid) + w[i + 2:]
            states[w2] = states.get(w2, sf.zero) + c * coef
            if not states[w2]:
                del states[w2]
    out = {}
    for w, c in states.items():
        lam = tuple(sorted((m for k, m in w if k == "L"), reverse=True))
        mu = tuple(sorted((m for k, m in w if k == "R"), reverse=True))
        key = (lam, mu, e0)
        out[key] = out.get(key, sf.zero) + c
    return {k: v for k, v in out.items() if v}


def test_normal_order_already_ordered():
    el = normal_order(sf, 1, [("L", 1), ("R", 1)])
    assert el.terms == {((1,), (1,), 1): sf.one}


def test_normal_order_single_swap():
    el = normal_order(sf, 1, [("R", 1), ("L", 1)])
    th1 = theta_coeff(sf, 1, 1)
    assert el.terms == {((1,), (1,), 1): sf.one, ((), (), 1): th1}
    elm = normal_order(sf, -1, [("R", 1), ("L", 1)])
    assert elm.terms == {((1,), (1,), 1): sf.one,
                         ((), (), 1): theta_coeff(sf, -1, 1)}


def test_normal_order_zero_modes_are_units():
    assert normal_order(sf, 1, [("L", 0)]).terms == {((), (), 0): sf.one}
    assert normal_order(sf, 1, [("R", 0)]).terms == {((), (), 1): sf.one}
    assert normal_order(sf, -1, [("L", 0)]).terms == {((), (), 1): sf.one}
    assert normal_order(sf, -1, [("R", 0)]).terms == {((), (), 0): sf.one}


def test_normal_order_against_oracle_fixed_word():
    word = [("R", 2), ("L", 1), ("R", 1), ("L", 2)]
    for sign in (1, -1):
        got = normal_order(sf, sign, word)
        want = oracle_normal_order(sf, sign, word, random.Random(7))
        assert got.terms == want


token_st = st.tuples(st.sampled_from(["L", "R"]), st.integers(0, 4))


@settings(max_examples=40, deadline=None)
@given(st.lists(token_st, max_size=6), st.integers(0, 2**30),
       st.sampled_from([1, -1]))
def test_normal_order_matches_oracle_and_is_confluent(word, seed, sign):
    got = normal_order(sf, sign, word)
    for k in range(3):
        rng = random.Random(seed + k)
        assert got.terms == oracle_normal_order(sf, sign, word, rng)


def test_pbw_product_associative_and_graded():
    a = normal_order(sf, 1, [("R", 2), ("L", 1)])
    b = normal_order(sf, 1, [("R", 1), ("L", 3)])
    c = pbw_term(sf, 1, lam=(2, 1), mu=(2,), e=-1)
    assert (a * b) * c == a * (b * c)
    # contractions strip equal amounts from both sides of a word, so the
    # difference sum(lam) - sum(mu) is the same in every product term
    prod = a * b
    degs = {sum(l) - sum(m) for l, m, _ in prod.terms}
    assert degs == {(1 - 2) + (3 - 1)}


# ---------------------------------------------------------------------------
# dressing factors
# ---------------------------------------------------------------------------

def test_dress_atoms_pins():
    assert dress_atoms(1, 1) == (Atom(0, 1),)
    assert dress_atoms(1, 2) == (Atom(0, 1), Atom(-4, 1))
    assert dress_atoms(1, -1) == (Atom(4, -1),)
    assert dress_atoms(-1, 1) == (Atom(4, -1),)
    assert dress_atoms(-1, -2) == (Atom(0, 1), Atom(-4, 1))
    assert dress_atoms(1, 0) == ()


def test_current_inverse_roundtrip():
    for sign in (1, -1):
        for cur in (current_L(sf, sign, 5), current_R(sf, sign, 5)):
            one = CurrentSeries.one(sf, sign, cur.direction, 5)
            assert cur * cur.inverse() == one
            assert cur.inverse() * cur == one


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("m,n", [(1, 1), (2, -1), (-2, 1), (1, 2), (-1, -1)])
def test_lr_identities(sign, m, n):
    for name, ok in check_lr_identities(sf, sign, m, n, 6):
        assert ok, name


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("m", [1, 2, -1, -2])
def test_lr_identities_merged_shift_form(sign, m):
    c = 4 * sign * m
    inv = {k: -e for k, e in merged_shifts(dress_atoms(sign, -m)).items()}
    assert inv == merged_shifts(dress_atoms(sign, m), extra=c)
    for n in (1, -2):
        if m + n == 0:
            continue
        lhs = merged_shifts(dress_atoms(sign, m)
                            + tuple(Atom(a - c, e) for a, e
                                    in dress_atoms(sign, n)))
        rhs = merged_shifts(dress_atoms(sign, m + n))
        assert lhs == rhs


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("m", [1, 2, -1, -2])
@pytest.mark.parametrize("n", [1, 2, -1, -2])
def test_h_identities(sign, m, n):
    for name, ok in check_h_identities(sign, m, n):
        assert ok, (name, sign, m, n)


def test_h_word_reduction():
    w = (Atom(0, 1), Atom(4, 1), Atom(4, -1), Atom(0, 1))
    assert reduce_word(w) == (Atom(0, 1), Atom(0, 1))
    assert reduce_word(w + invert_word(w)) == ()


def test_dress_H_factor_shapes():
    facs = dress_H(sf, 1, 1, 4)
    assert [f.direction for f in facs] == [AT_ZERO, AT_INF]
    assert facs[0].mode(1) == pbw_term(sf, 1, lam=(1,))
    inv = dress_H(sf, 1, -1, 4)
    assert [f.direction for f in inv] == [AT_INF, AT_ZERO]
    # the inverted factors really invert the direct ones at shift 4
    assert inv[0] * current_R(sf, 1, 4).arg_shift(4) == \
        CurrentSeries.one(sf, 1, AT_INF, 4)


# ---------------------------------------------------------------------------
# crossing factors
# ---------------------------------------------------------------------------

def test_theta_mn_closed_base_cases():
    for sign in (1, -1):
        assert theta_mn_closed(sf, sign, 1, 1) == theta_ratfunc(sf, sign)
        one = RatFunc.const(sf, sf.one)
        assert theta_mn_closed(sf, sign, 1, 0) == one
        assert theta_mn_closed(sf, sign, 0, 2) == one


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("m", [1, 2, -1, -2])
@pytest.mark.parametrize("n", [1, 2, -1, -2])
def test_theta_mn_product_matches_closed_form(sign, m, n):
    closed = theta_mn_closed(sf, sign, m, n).to_series(AT_ZERO, 8)
    assert theta_mn_series(sf, sign, m, n, 8) == closed


def test_recip_arg():
    f = RatFunc.from_factors(sf, t**2, {t**4: 1, sf.one: 1}, {t**-4: 2})
    g = _recip_arg(f)
    x0 = t**6
    assert g.eval(x0) == f.eval(sf.one / x0)


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("m", [1, 2, -1, -2])
@pytest.mark.parametrize("n", [1, 2, -1, -2])
def test_theta_commutation(sign, m, n):
    assert theta_Theta_commutation_check(sf, sign, m, n, 6)


def test_theta_cross_equals_closed_pin():
    # hand-checked case (m, n) = (1, 1), sign +: the (u - 1) factors of the
    # two theta contributions cancel, leaving (u-t^4)^2 (u-t^-8) over
    # (u-t^-4)^2 (u-t^8)
    got = theta_cross_ratfunc(sf, 1, 1, 1)
    want = RatFunc.from_factors(sf, sf.one,
                                {t**4: 2, t**-8: 1},
                                {t**-4: 2, t**8: 1})
    assert got == want
    assert Theta_closed(sf, 1, 1, 1) == want


# ---------------------------------------------------------------------------
# loop-algebra action
# ---------------------------------------------------------------------------

def test_lambda_rho_base_cases():
    for sign in (1, -1):
        # the m = 1 L-dressing of sign +1 is the base current itself
        if sign > 0:
            assert lambda_m_ratfunc(sf, sign, 1) == lambda_ratfunc(sf, sign)
            assert rho_m_ratfunc(sf, sign, 1) == rho_ratfunc(sf, sign)
        else:
            # sign -1: the m = 1 dressing is an inverted shifted current
            shifted = lambda_ratfunc(sf, sign).shift_arg(t**4)
            assert lambda_m_ratfunc(sf, sign, 1) == shifted.inv()


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("m", [1, 2, -1, -2])
def test_dressed_multipliers_factor_over_atoms(sign, m):
    lam = RatFunc.const(sf, sf.one)
    rho = RatFunc.const(sf, sf.one)
    for a, e in dress_atoms(sign, m):
        fl = lambda_ratfunc(sf, sign).shift_arg(t**a)
        fr = rho_ratfunc(sf, sign).shift_arg(t**a)
        lam = lam * (fl if e > 0 else fl.inv())
        rho = rho * (fr if e > 0 else fr.inv())
    assert lam == lambda_m_ratfunc(sf, sign, m)
    assert rho == rho_m_ratfunc(sf, sign, m)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_lambda_rho_product_is_shift_multiplier(m):
    # lambda_m * rho_m recovers the kappa-ratio of the m-step shift, with
    # the spectral point replaced by the current variable
    zeros = {}
    for e in (4 * (m - 1), 4):
        zeros[t**e] = zeros.get(t**e, 0) + 1
    want = RatFunc.from_factors(
        sf, sf.one, zeros,
        {t**-4: 1, t**(4 * (m + 1)): 1})
    got = lambda_m_ratfunc(sf, 1, m) * rho_m_ratfunc(sf, 1, m)
    assert got == want
    inv = lambda_m_ratfunc(sf, -1, -m) * rho_m_ratfunc(sf, -1, -m)
    assert inv == want.inv()


def test_triangle_action_x_modes_are_zero():
    el = normal_order(sf, 1, [("R", 2), ("L", 1)])
    for eps in (1, -1):
        for n in range(3):
            assert not triangle_action(sf, ("x", eps, n), el)


def test_cartan_conjugate_unit_and_alpha():
    assert cartan_conjugate(sf, pbw_one(sf, 1)) == VLaurent.one(sf, 1)
    # the central unit is rescaled by t^4, its inverse by t^-4
    for sign in (1, -1):
        a = cartan_conjugate(sf, pbw_term(sf, sign, e=1))
        b = cartan_conjugate(sf, pbw_term(sf, sign, e=-1))
        assert a == VLaurent(sf, sign, {0: pbw_term(sf, sign, e=1,
                                                    coeff=t**4)})
        assert a * b == VLaurent.one(sf, sign)


def test_cartan_conjugate_mode_pins():
    lam = lambda_ratfunc(sf, 1).to_series(AT_ZERO, 2).coeffs
    got = cartan_conjugate(sf, pbw_term(sf, 1, lam=(1,)))
    assert got.mode(0) == pbw_term(sf, 1, lam=(1,), coeff=lam[0])
    assert got.mode(-1) == pbw_term(sf, 1, coeff=lam[1])
    assert not got.mode(1) and not got.mode(-2)
    rho = rho_ratfunc(sf, 1).to_series(AT_INF, 2).coeffs
    got = cartan_conjugate(sf, pbw_term(sf, 1, mu=(1,), e=1))
    assert got.mode(0) == pbw_term(sf, 1, mu=(1,), e=1, coeff=rho[0])
    assert got.mode(1) == pbw_term(sf, 1, e=1, coeff=rho[1])
    assert not got.mode(-1) and not got.mode(2)
    # mode pairing of the two Cartan towers against the same polynomial
    el = pbw_term(sf, 1, lam=(1,))
    assert triangle_action(sf, ("k", 1, 1), el) == pbw_term(
        sf, 1, coeff=lam[1])
    assert triangle_action(sf, ("k", -1, 1),
                           pbw_term(sf, 1, mu=(1,), e=1)) == pbw_term(
        sf, 1, e=1, coeff=rho[1])


@settings(max_examples=30, deadline=None)
@given(st.lists(token_st, max_size=3), st.lists(token_st, max_size=3),
       st.sampled_from([1, -1]))
def test_cartan_conjugate_is_multiplicative(wa, wb, sign):
    a = normal_order(sf, sign, wa)
    b = normal_order(sf, sign, wb)
    lhs = cartan_conjugate(sf, a * b)
    rhs = cartan_conjugate(sf, a) * cartan_conjugate(sf, b)
    assert lhs == rhs


def _dressed_action_rhs(sf, sign, mult, cur, j, down):
    """One z-mode of k(v) . C(z) = mult(z/v) C(z).

    The multiplier is expanded toward the end of the dressed current
    where its constant coefficient lives: small z for L-dressings
    (``down`` = -1, powers v^-jp), large z for R-dressings (+1).
    """
    co = mult.to_series(AT_ZERO if down < 0 else AT_INF, j).coeffs
    out = {}
    for jp in range(j + 1):
        term = cur.mode(j - jp).scale(co.get(jp, sf.zero))
        if term:
            out[down * jp] = term
    return VLaurent(sf, sign, out)


@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("m", [1, -1, 2])
def test_cartan_conjugate_on_dressed_currents(sign, m):
    window = 4
    curL = dress_L(sf, sign, m, window)
    curR = dress_R(sf, sign, m, window)
    for cur, mult, down in (
            (curL, lambda_m_ratfunc(sf, sign, m), -1),
            (curR, rho_m_ratfunc(sf, sign, m), 1)):
        for j in range(window + 1):
            lhs = cartan_conjugate(sf, cur.mode(j))
            rhs = _dressed_action_rhs(sf, sign, mult, cur, j, down)
            assert lhs == rhs, (j, cur.direction)
