import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from udapipe.errors import InsufficientSamplesError, NotPositiveDefiniteError, SingularMatrixError
from udapipe.linalg import (
    cholesky,
    covariance,
    jacobi_eigen,
    regularize,
    solve_lower_triangular,
    sym_eigen,
)

from conftest import random_spd, rel_fro


def brute_covariance(X):
    n, d = len(X), len(X[0])
    means = [sum(row[j] for row in X) / n for j in range(d)]
    return np.array(
        [[sum((row[a] - means[a]) * (row[b] - means[b]) for row in X) / (n - 1) for b in range(d)] for a in range(d)]
    )


class TestCovariance:
    def test_hand_example(self):
        X = [[1, 0], [-1, 0], [0, 2], [0, -2]]
        np.testing.assert_allclose(covariance(X), np.diag([2 / 3, 8 / 3]), atol=1e-15)

    def test_identical_rows(self):
        np.testing.assert_array_equal(covariance([[3.0, 1.0], [3.0, 1.0]]), np.zeros((2, 2)))

    def test_single_column(self):
        np.testing.assert_allclose(covariance([[1.0], [3.0]]), [[2.0]])

    def test_one_row_rejected(self):
        with pytest.raises(InsufficientSamplesError):
            covariance([[1.0, 2.0]])

    def test_matches_brute_force(self, rng):
        X = rng.standard_normal((15, 4))
        np.testing.assert_allclose(covariance(X), brute_covariance(X.tolist()), rtol=1e-12, atol=1e-14)

    def test_row_permutation_invariant(self, rng):
        X = rng.standard_normal((40, 6))
        perm = rng.permutation(40)
        np.testing.assert_allclose(covariance(X[perm]), covariance(X), atol=1e-12)

    @given(c=st.floats(-50, 50).filter(lambda v: abs(v) > 1e-3))
    @settings(max_examples=30, deadline=None)
    def test_scaling(self, c):
        X = np.random.default_rng(1).standard_normal((30, 5))
        S = covariance(X)
        assert rel_fro(covariance(X * c), c * c * S) <= 1e-10


class TestRegularize:
    def test_default_lambda_on_zero(self):
        np.testing.assert_array_equal(regularize(np.zeros((2, 2)), 1e-6), np.diag([1e-6, 1e-6]))

    def test_zero_lambda_is_identity(self, rng):
        S = random_spd(rng, 4)
        np.testing.assert_array_equal(regularize(S, 0.0), (S + S.T) / 2)

    def test_diagonal_shift(self):
        np.testing.assert_array_equal(regularize(np.eye(2), 0.5), np.diag([1.5, 1.5]))


class TestCholesky:
    def test_hand_example(self):
        L = cholesky([[4.0, 2.0], [2.0, 3.0]])
        np.testing.assert_allclose(L, [[2.0, 0.0], [1.0, np.sqrt(2.0)]], atol=1e-15)

    def test_identity(self):
        np.testing.assert_array_equal(cholesky(np.eye(3)), np.eye(3))

    def test_indefinite(self):
        with pytest.raises(NotPositiveDefiniteError):
            cholesky([[1.0, 2.0], [2.0, 1.0]])

    def test_singular_psd_rejected(self):
        with pytest.raises(NotPositiveDefiniteError):
            cholesky([[1.0, 1.0], [1.0, 1.0]])

    def test_structure_and_reconstruction(self, rng):
        for d in (1, 2, 7, 33):
            S = random_spd(rng, d)
            L = cholesky(S)
            assert np.all(np.triu(L, 1) == 0)
            assert np.all(np.diag(L) > 0)
            assert rel_fro(L @ L.T, S) <= 1e-10

    def test_agrees_with_lapack(self, rng):
        S = random_spd(rng, 12)
        np.testing.assert_allclose(cholesky(S), np.linalg.cholesky(S), rtol=1e-10, atol=1e-12)


class TestTriangularSolve:
    def test_identity(self, rng):
        B = rng.standard_normal((3, 4))
        np.testing.assert_array_equal(solve_lower_triangular(np.eye(3), B), B)

    def test_hand_example(self):
        X = solve_lower_triangular([[2.0, 0.0], [1.0, 1.0]], [[2.0], [3.0]])
        np.testing.assert_allclose(X, [[1.0], [2.0]])

    def test_reciprocal_diagonal(self):
        np.testing.assert_allclose(solve_lower_triangular(np.diag([2.0, 4.0]), np.eye(2)), np.diag([0.5, 0.25]))

    def test_zero_diagonal(self):
        with pytest.raises(SingularMatrixError):
            solve_lower_triangular([[1.0, 0.0], [1.0, 0.0]], np.eye(2))

    @pytest.mark.parametrize("transpose", [False, True])
    def test_residual(self, rng, transpose):
        L = cholesky(random_spd(rng, 20))
        B = rng.standard_normal((20, 5))
        X = solve_lower_triangular(L, B, transpose=transpose)
        lhs = (L.T if transpose else L) @ X
        assert np.linalg.norm(lhs - B) / np.linalg.norm(B) <= 1e-10

    def test_vector_rhs(self):
        x = solve_lower_triangular([[2.0, 0.0], [1.0, 1.0]], [2.0, 3.0])
        assert x.shape == (2,)
        np.testing.assert_allclose(x, [1.0, 2.0])


def _check_eigen(S, w, V):
    d = S.shape[0]
    assert np.all(np.diff(w) <= 0)
    np.testing.assert_allclose(V.T @ V, np.eye(d), atol=1e-8)
    norm = np.linalg.norm(S, 2)
    assert np.max(np.abs(S @ V - V * w)) <= 1e-7 * max(norm, 1.0)
    idx = np.argmax(np.abs(V), axis=0)
    assert np.all(V[idx, np.arange(d)] >= 0)


@pytest.mark.parametrize("solver", [sym_eigen, jacobi_eigen], ids=["lapack", "jacobi"])
class TestEigen:
    def test_diagonal(self, solver):
        w, V = solver(np.diag([1.0, 4.0, 2.0]))
        np.testing.assert_allclose(w, [4.0, 2.0, 1.0])
        np.testing.assert_allclose(np.abs(V), np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]]), atol=1e-12)

    def test_identity(self, solver):
        w, _ = solver(np.eye(4))
        np.testing.assert_allclose(w, np.ones(4))

    def test_two_by_two(self, solver):
        w, V = solver([[2.0, 1.0], [1.0, 2.0]])
        np.testing.assert_allclose(w, [3.0, 1.0], atol=1e-12)
        r = 1 / np.sqrt(2)
        np.testing.assert_allclose(V, [[r, r], [r, -r]], atol=1e-12)

    def test_random_properties(self, solver, rng):
        for d in (3, 8, 16):
            G = rng.standard_normal((d, d))
            S = (G + G.T) / 2
            w, V = solver(S)
            _check_eigen(S, w, V)
            assert rel_fro(V @ np.diag(w) @ V.T, S) <= 1e-8


def test_solvers_agree(rng):
    G = rng.standard_normal((10, 10))
    S = G @ G.T
    w1, V1 = sym_eigen(S)
    w2, V2 = jacobi_eigen(S)
    np.testing.assert_allclose(w1, w2, rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(V1, V2, atol=1e-7)


@given(arrays(np.float64, (5, 5), elements=st.floats(-10, 10)))
@settings(max_examples=50, deadline=None)
def test_eigen_reconstruction_property(G):
    S = (G + G.T) / 2
    w, V = sym_eigen(S)
    scale = max(np.linalg.norm(S), 1e-300)
    assert np.linalg.norm(V @ np.diag(w) @ V.T - S) / scale <= 1e-8 or np.linalg.norm(S) == 0


def test_covariance_overflow_is_numerical():
    from udapipe.errors import NumericalError
    from udapipe.linalg import covariance

    with pytest.raises(NumericalError):
        covariance(np.array([[1e200, 0.0], [-1e200, 1.0]]))


@pytest.mark.parametrize("seed", range(20))
def test_jacobi_converges_on_spd_gram_matrices(seed):
    # M^T M + I once stalled: the off-diagonal norm was computed by cancellation
    M = np.random.default_rng(seed).standard_normal((6, 6))
    S = M.T @ M + np.eye(6)
    w, V = jacobi_eigen(S)
    wr, Vr = sym_eigen(S)
    assert np.max(np.abs(w - wr)) <= 1e-10 * wr[0]
    assert np.max(np.abs(V - Vr)) <= 1e-8


def test_jacobi_tiny_coupling_no_overflow():
    S = np.array([[1.0, 1e-300], [1e-300, 2.0]])
    with np.errstate(over="raise"):
        w, _ = jacobi_eigen(S)
    np.testing.assert_allclose(w, [2.0, 1.0])
