import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sazf.errors import NegativeEigenvalue, NotHermitian, ShapeError, SingularGram
from sazf.linalg import (
    gram_factor,
    left_pseudo_inverse,
    log_det_capacity,
    pseudo_inverse,
    right_pseudo_inverse,
    trace_of_inverse_gram,
)

from conftest import crandn


def gauss_jordan_inverse(M):
    """Plain Gauss-Jordan with partial pivoting, list-of-lists complex."""
    n = len(M)
    aug = [[complex(M[i][j]) for j in range(n)] + [1.0 + 0j if i == j else 0j for j in range(n)]
           for i in range(n)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(aug[r][col]))
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r != col:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return np.array([row[n:] for row in aug])


def test_right_pinv_trivial():
    np.testing.assert_allclose(right_pseudo_inverse(np.eye(2)), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(right_pseudo_inverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]),
                               atol=1e-15)


def test_right_pinv_matches_elimination(rng):
    A = crandn(rng, 2, 3)
    M = right_pseudo_inverse(A)
    oracle = A.conj().T @ gauss_jordan_inverse((A @ A.conj().T).tolist())
    np.testing.assert_allclose(M, oracle, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(A @ M, np.eye(2), atol=1e-10)


def test_left_pinv_trivial():
    np.testing.assert_allclose(left_pseudo_inverse(np.eye(3)), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(left_pseudo_inverse(np.array([[1.0], [0.0], [0.0]])),
                               [[1.0, 0.0, 0.0]], atol=1e-15)


def test_left_pinv_matches_elimination(rng):
    A = crandn(rng, 4, 2)
    M = left_pseudo_inverse(A)
    oracle = gauss_jordan_inverse((A.conj().T @ A).tolist()) @ A.conj().T
    np.testing.assert_allclose(M, oracle, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(M @ A, np.eye(2), atol=1e-10)


def test_pinv_shape_errors(rng):
    with pytest.raises(ShapeError):
        right_pseudo_inverse(crandn(rng, 3, 2))
    with pytest.raises(ShapeError):
        left_pseudo_inverse(crandn(rng, 2, 3))
    with pytest.raises(ShapeError):
        right_pseudo_inverse(np.zeros(3))


def test_pinv_singular_gram():
    rank_one = np.outer([1.0, 2.0], [1.0, 1.0, 1.0])
    with pytest.raises(SingularGram):
        right_pseudo_inverse(rank_one)
    with pytest.raises(SingularGram):
        left_pseudo_inverse(rank_one.T)
    with pytest.raises(SingularGram):
        right_pseudo_inverse(np.diag([1.0, 1e-7]))   # condition 1e14


def test_pseudo_inverse_dispatches_by_shape(rng):
    wide, tall = crandn(rng, 2, 5), crandn(rng, 5, 2)
    np.testing.assert_allclose(wide @ pseudo_inverse(wide), np.eye(2), atol=1e-12)
    np.testing.assert_allclose(pseudo_inverse(tall) @ tall, np.eye(2), atol=1e-12)


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        right_pseudo_inverse(np.array([[1.0, np.nan]]))


@settings(max_examples=60, deadline=None)
@given(rows=st.integers(1, 8), extra=st.integers(0, 24), seed=st.integers(0, 2**32 - 1))
def test_pinv_identity_property(rows, extra, seed):
    rng = np.random.default_rng(seed)
    A = crandn(rng, rows, rows + extra) * rng.uniform(0.1, 10)
    try:
        M = right_pseudo_inverse(A)
    except SingularGram:
        return
    assert np.linalg.norm(A @ M - np.eye(rows)) / np.sqrt(rows) < 1e-10
    L = left_pseudo_inverse(A.T)
    assert np.linalg.norm(L @ A.T - np.eye(rows)) / np.sqrt(rows) < 1e-10


def test_gram_factor_condition_estimate():
    f = gram_factor(np.diag([1.0, 10.0]))
    assert f.condition_estimate == pytest.approx(100.0)
    assert f.inverse_trace() == pytest.approx(1.01)


def test_log_det_trivial():
    assert log_det_capacity(np.zeros((4, 4)), 1.0) == 0.0
    assert log_det_capacity(np.eye(2), 3.0) == pytest.approx(4.0, abs=1e-14)


def test_log_det_matches_eigenvalue_product(rng):
    A = crandn(rng, 3, 3)
    G = A @ A.conj().T
    oracle = np.log2(np.prod(1 + 0.5 * np.linalg.eigvals(G)).real)
    assert log_det_capacity(G, 0.5) == pytest.approx(oracle, abs=1e-9)


def test_log_det_rejects_bad_input(rng):
    with pytest.raises(NotHermitian):
        log_det_capacity(np.array([[1.0, 1.0], [0.0, 1.0]]), 1.0)
    with pytest.raises(NegativeEigenvalue):
        log_det_capacity(np.diag([1.0, -1.0]), 1.0)
    with pytest.raises(ValueError):
        log_det_capacity(np.eye(2), -1.0)
    with pytest.raises(ShapeError):
        log_det_capacity(np.ones((2, 3)), 1.0)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), k=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_log_det_monotone_in_scale(n, k, seed):
    rng = np.random.default_rng(seed)
    A = crandn(rng, n, k)
    G = A @ A.conj().T
    values = [log_det_capacity(G, s) for s in np.linspace(0, 50, 26)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    assert values[0] == 0.0


def test_trace_of_inverse_gram_trivial():
    assert trace_of_inverse_gram(np.eye(3)) == pytest.approx(3.0)
    assert trace_of_inverse_gram(np.diag([2.0, 2.0])) == pytest.approx(0.5)


def test_trace_of_inverse_gram_wishart_mean():
    rng = np.random.default_rng(7)
    samples = [trace_of_inverse_gram(crandn(rng, 3, 200)) for _ in range(10_000)]
    assert np.mean(samples) == pytest.approx(3 / 197, rel=0.02)
