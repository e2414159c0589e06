import pytest

from qloopforge.formal import AT_INF, AT_ZERO, RatFunc
from qloopforge.loopmod import (
    DrinfeldPoly, check_loop_relations, evaluation_module,
    highest_lweight_series, lowest_lweight_series, lweight_decompose,
    spectrum, tensor, trivial_module, _cp_ratfunc,
)
from qloopforge.scalar import ScalarField, SpectralPoint

sf = ScalarField(["a", "b"])
t, q = sf.t, sf.q
A = SpectralPoint("a")
aval = sf.param("a")


def test_basic_module_shape():
    w1 = evaluation_module(sf, 1, A)
    assert w1.dim == 2
    assert spectrum(w1) == {q, 1 / q}
    x0 = w1.x_mode(+1, 0)
    sq = [[sum((x0[i][k] * x0[k][j] for k in range(2)), sf.zero)
           for j in range(2)] for i in range(2)]
    assert not any(any(row) for row in sq)
    # raising/lowering mode matrices scale with the root
    assert w1.x_mode(+1, 3)[0][1] == aval**3
    assert w1.x_mode(-1, -2)[1][0] == aval**-2


def test_highest_lweight_series_displays():
    P0 = DrinfeldPoly(())
    s = highest_lweight_series(sf, P0, +1, 4)
    assert s.coeffs == {0: sf.one}
    P1 = DrinfeldPoly((A,))
    rf = RatFunc.from_factors(sf, q, {aval / q**2: 1}, {aval: 1})
    assert highest_lweight_series(sf, P1, +1, 5) == rf.to_series(AT_INF, 5)
    assert highest_lweight_series(sf, P1, -1, 5) == rf.to_series(AT_ZERO, 5)
    lo = RatFunc.from_factors(sf, 1 / q, {aval: 1}, {aval / q**2: 1})
    assert lowest_lweight_series(sf, P1, +1, 5) == lo.to_series(AT_INF, 5)


def test_highest_times_lowest_is_one():
    P = DrinfeldPoly.segment(A, 3)
    prod = _cp_ratfunc(sf, P) * _cp_ratfunc(sf, P, lowest=True)
    assert prod == RatFunc.const(sf, sf.one)


def test_w1_relations():
    rpt = check_loop_relations(evaluation_module(sf, 1, A), 4)
    assert rpt.passed, rpt.lines()


def test_w2_construction_and_relations():
    w2 = evaluation_module(sf, 2, A)
    assert w2.dim == 3
    assert spectrum(w2) == {q**2, sf.one, q**-2}
    rpt = check_loop_relations(w2, 4)
    assert rpt.passed, rpt.lines()
    # the top vector carries the Chari-Pressley highest weight of the segment
    top = w2.grading.index(max(w2.grading))
    assert w2.k_diag[top] == _cp_ratfunc(sf, DrinfeldPoly.segment(A, 2))


def test_w3_construction():
    w3 = evaluation_module(sf, 3, A)
    assert w3.dim == 4
    assert spectrum(w3) == {q**3, q, 1 / q, q**-3}
    top = w3.grading.index(max(w3.grading))
    assert w3.k_diag[top] == _cp_ratfunc(sf, DrinfeldPoly.segment(A, 3))


def test_tensor_relations_and_blocks():
    w = tensor(evaluation_module(sf, 1, A),
               evaluation_module(sf, 1, A.shift(2)))
    assert w.dim == 4
    rpt = check_loop_relations(w, 4)
    assert rpt.passed, rpt.lines()
    blocks = lweight_decompose(w)
    # regression: the four product l-weights stay pairwise distinct
    assert sorted(len(b.indices) for b in blocks) == [1, 1, 1, 1]


def test_tensor_with_trivial_module():
    w1 = evaluation_module(sf, 1, A)
    w = tensor(w1, trivial_module(sf))
    assert w.dim == 2
    assert w.k_diag[0] == w1.k_diag[0] and w.k_diag[1] == w1.k_diag[1]
    for key, m in w1.xp.items():
        assert w.xp[key] == m
    rpt = check_loop_relations(w, 3)
    assert rpt.passed


def test_tensor_highest_kappa_is_product():
    b = SpectralPoint("b")
    w = tensor(evaluation_module(sf, 1, A), evaluation_module(sf, 1, b))
    top = w.grading.index(max(w.grading))
    k1 = _cp_ratfunc(sf, DrinfeldPoly((A,)))
    k2 = _cp_ratfunc(sf, DrinfeldPoly((b,)))
    assert w.k_diag[top] == k1 * k2
    rpt = check_loop_relations(w, 4)
    assert rpt.passed, rpt.lines()


def test_lweight_decompose_w1():
    blocks = lweight_decompose(evaluation_module(sf, 1, A))
    assert len(blocks) == 2
    assert all(len(b.indices) == 1 for b in blocks)
    consts = {b.kappa_plus.coeffs.get(0) for b in blocks}
    assert consts == {q, 1 / q}
    for b in blocks:
        assert b.kappa_plus.coeffs[0] * b.kappa_minus.coeffs[0] == sf.one


def test_negative_control_detects_perturbation():
    w1 = evaluation_module(sf, 1, A)
    (key, m), = w1.xp.items()
    m[0][1] = m[0][1] + sf.one  # perturb one raising entry
    rpt = check_loop_relations(w1, 3)
    assert not rpt.passed
    failing = [name for name, ok, _ in rpt.results if not ok]
    assert "x+x-" in failing
