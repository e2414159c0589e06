from hypothesis import given, settings, strategies as st

from qloopforge import linalg
from qloopforge.scalar import ScalarField

sf = ScalarField(["a"])
Z, O = sf.zero, sf.one


def _mat(rows):
    return [[sf(x) for x in r] for r in rows]


def test_rref_pivots_and_rank():
    red, pivots = linalg.rref(_mat([[1, 2, 3], [2, 4, 6], [0, 1, 1]]), Z)
    assert pivots == [0, 1]
    assert len(red) == 2
    # identity in the pivot columns
    assert red[0][0] == O and red[0][1] == Z
    assert red[1][0] == Z and red[1][1] == O


def test_in_span_and_reduce():
    basis, pivots = linalg.rref(_mat([[1, 0, 1], [0, 1, 1]]), Z)
    assert linalg.in_span(basis, pivots, [sf(2), sf(3), sf(5)])
    assert not linalg.in_span(basis, pivots, [sf(2), sf(3), sf(6)])


def test_nullspace_annihilates():
    rows = _mat([[1, 2, 3, 4], [2, 4, 6, 8], [1, 0, 1, 0]])
    ns = linalg.nullspace(rows, Z, O)
    assert len(ns) == 2
    for v in ns:
        assert not any(linalg.mat_vec(rows, v))


def test_solve_consistent_and_not():
    rows = _mat([[1, 1], [1, -1]])
    x = linalg.solve(rows, [sf(3), sf(1)], Z)
    assert x == [sf(2), sf(1)]
    rows2 = _mat([[1, 1], [2, 2]])
    assert linalg.solve(rows2, [sf(1), sf(3)], Z) is None
    # consistent underdetermined system still returns a solution
    x2 = linalg.solve(rows2, [sf(1), sf(2)], Z)
    assert x2 is not None and x2[0] + x2[1] == sf(1)


small = st.integers(-4, 4)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=3))
def test_mat_inv_roundtrip(entries):
    a = _mat(entries)
    try:
        inv = linalg.mat_inv(a, Z, O)
    except ValueError:
        ns = linalg.nullspace(a, Z, O)
        assert ns  # singular means a nontrivial kernel
        return
    assert linalg.mat_mul(a, inv) == linalg.identity(3, Z, O)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.lists(small, min_size=3, max_size=3), min_size=2, max_size=4),
    st.lists(small, min_size=3, max_size=3),
)
def test_solve_residual(entries, xs):
    a = _mat(entries)
    x = [sf(v) for v in xs]
    b = linalg.mat_vec(a, x)
    sol = linalg.solve(a, b, Z)
    assert sol is not None
    assert linalg.mat_vec(a, sol) == b


def test_mat_inv_with_parameter_entries():
    a = sf.param("a")
    m = [[sf.one, a], [a, sf.one + a * a]]
    inv = linalg.mat_inv(m, Z, O)
    assert linalg.mat_mul(m, inv) == linalg.identity(2, Z, O)
