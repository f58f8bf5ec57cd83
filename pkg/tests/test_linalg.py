import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from erspud.linalg import (DimensionError, SingularMatrixError, as_matrix, inverse, matmul,
                           numerical_rank, solve_linear)


def triple_loop(a, b):
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            for k in range(a.shape[1]):
                out[i, j] += a[i, k] * b[k, j]
    return out


def test_matmul_identity_and_zero(rng):
    m = rng.standard_normal((3, 4))
    assert np.array_equal(matmul(np.eye(3), m), m)
    assert np.array_equal(matmul(m, np.zeros((4, 2))), np.zeros((3, 2)))


def test_matmul_against_triple_loop(rng):
    a, b = rng.standard_normal((4, 3)), rng.standard_normal((3, 5))
    assert np.max(np.abs(matmul(a, b) - triple_loop(a, b))) <= 1e-12


def test_matmul_shape_mismatch():
    with pytest.raises(DimensionError):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_as_matrix_rejects_nonfinite_and_vectors():
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(DimensionError):
        as_matrix([1.0, 2.0])


finite = st.floats(-10, 10, allow_nan=False)


@given(arrays(np.float64, (3, 4), elements=finite), arrays(np.float64, (4, 2), elements=finite),
       arrays(np.float64, (2, 5), elements=finite))
def test_matmul_associative(a, b, c):
    left = matmul(matmul(a, b), c)
    right = matmul(a, matmul(b, c))
    scale = 1.0 + np.abs(a).sum() * np.abs(b).max() * np.abs(c).max()
    assert np.max(np.abs(left - right)) <= 1e-10 * scale


def test_rank_examples(rng):
    assert numerical_rank(np.eye(5), 1e-9) == 5
    m = rng.standard_normal((4, 6))
    m[3] = m[1]
    assert numerical_rank(m) == 3
    low = rng.standard_normal((6, 3)) @ rng.standard_normal((3, 6))
    assert numerical_rank(low) == 3
    assert numerical_rank(np.zeros((3, 3))) == 0


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_rank_invariant_under_row_permutation(seed, k):
    g = np.random.default_rng(seed)
    m = g.standard_normal((6, k)) @ g.standard_normal((k, 7))
    perm = g.permutation(6)
    assert numerical_rank(m[perm]) == numerical_rank(m) == k


def test_solve_examples(rng):
    b = rng.standard_normal((4, 3))
    assert np.allclose(solve_linear(np.eye(4), b), b, rtol=0, atol=0)
    assert np.array_equal(solve_linear(2 * np.eye(3), np.eye(3)), np.eye(3) / 2)


def test_solve_residual(rng):
    a = rng.standard_normal((8, 8)) + 8 * np.eye(8)
    b = rng.standard_normal((8, 2))
    x = solve_linear(a, b)
    assert np.max(np.abs(a @ x - b)) <= 1e-12 * (1 + np.abs(b).max())
    v = solve_linear(a, b[:, 0])
    assert v.shape == (8,)
    assert np.allclose(inverse(a) @ a, np.eye(8), atol=1e-12)


def test_solve_singular_raises():
    with pytest.raises(SingularMatrixError):
        solve_linear(np.ones((3, 3)), np.ones(3))
    with pytest.raises(DimensionError):
        solve_linear(np.ones((2, 3)), np.ones(2))
