import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from dqgm.linalg import NotInSpan, SingularSystem, coordinates_in_span, inverse, kernel_basis, pivot_columns, rank, solve
from dqgm.scalars import EXACT, GaussianRational

from _support import gq


def _sympy_rank(m):
    def conv(x):
        x = GaussianRational.coerce(x)
        return sympy.Rational(x.re.numerator, x.re.denominator) + sympy.I * sympy.Rational(x.im.numerator, x.im.denominator)

    return sympy.Matrix([[conv(x) for x in row] for row in m]).rank()


def _random_low_rank(seed, rows, cols, r):
    rng = np.random.default_rng(seed)
    left = EXACT.zeros((rows, r))
    right = EXACT.zeros((r, cols))
    for idx in np.ndindex(left.shape):
        left[idx] = gq(rng)
    for idx in np.ndindex(right.shape):
        right[idx] = gq(rng)
    return left @ right


@given(st.integers(0, 10**6), st.integers(1, 6), st.integers(1, 6), st.integers(0, 4))
def test_exact_rank_three_ways(seed, rows, cols, r):
    m = _random_low_rank(seed, rows, cols, r)
    sparse = rank(m)
    assert sparse == rank(m, method="bareiss")
    assert sparse == _sympy_rank(m)
    assert sparse <= min(rows, cols, r)


@given(st.integers(0, 10**6), st.integers(1, 5), st.integers(1, 7))
def test_kernel_basis_exact(seed, rows, cols):
    m = _random_low_rank(seed, rows, cols, 2)
    ker = kernel_basis(m)
    assert len(ker) == cols - rank(m)
    for v in ker:
        assert EXACT.is_zero_matrix(m @ v)


def test_pivots_exact_and_float_agree():
    m = _random_low_rank(7, 4, 6, 2)
    piv = pivot_columns(m)
    assert len(piv) == rank(m) == 2
    assert rank(m[:, piv]) == 2
    fm = EXACT.to_float(m)
    assert pivot_columns(fm) == piv


def test_float_rank_threshold():
    m = np.diag([1.0, 1e-6, 1e-12])
    assert rank(m) == 2
    assert rank(m, rtol=1e-5) == 1
    assert rank(np.zeros((3, 3))) == 0
    assert rank(m, policy="entry") == 2


def test_float_kernel():
    m = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
    ker = kernel_basis(m)
    assert len(ker) == 2
    for v in ker:
        assert np.allclose(m @ v, 0)


def test_solve_and_inverse_exact():
    m = EXACT.array([[2, GaussianRational(0, 1)], [1, 3]])
    inv = inverse(m)
    assert EXACT.matrices_equal(m @ inv, EXACT.eye(2))
    x = solve(m, EXACT.array([1, 0]))
    assert EXACT.matrices_equal(m @ x, EXACT.array([1, 0]))


def test_solve_errors():
    m = EXACT.array([[1, 1], [1, 1]])
    with pytest.raises(SingularSystem, match="not unique"):
        solve(m, EXACT.array([1, 1]))
    tall = EXACT.array([[1], [1]])
    with pytest.raises(SingularSystem, match="inconsistent"):
        solve(tall, EXACT.array([1, 2]))
    with pytest.raises(SingularSystem):
        solve(np.array([[1.0], [1.0]]), np.array([1.0, 2.0]))


def test_coordinates_in_span():
    b = [EXACT.array([1, 0, 1]), EXACT.array([0, 1, 1])]
    c = coordinates_in_span(b, EXACT.array([2, 3, 5]))
    assert list(c) == [2, 3]
    with pytest.raises(NotInSpan):
        coordinates_in_span(b, EXACT.array([1, 0, 0]))
    with pytest.raises(ValueError, match="dependent"):
        coordinates_in_span([b[0], b[0]], b[0], check_independent=True)
    fc = coordinates_in_span([np.array([1.0, 1j]), np.array([0.0, 1.0])], np.array([2.0, 1 + 2j]))
    assert np.allclose(fc, [2, 1])
