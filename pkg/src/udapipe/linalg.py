"""Dense linear algebra used by the PCA and CORAL stages.

Everything works on float64 ``numpy`` arrays. Symmetric inputs are
symmetrized on entry (``(S + S.T) / 2``) so tiny asymmetries from
floating-point accumulation never leak into factorizations.
"""

import numpy as np

from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    InsufficientSamplesError,
    NotPositiveDefiniteError,
    NumericalError,
    SingularMatrixError,
    ValidationError,
)

PIVOT_TOL = 1e-12


def as_matrix(X, name="X"):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValidationError(f"{name} must be a non-empty 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError(f"{name} contains non-finite entries")
    return X


def symmetrize(S):
    S = as_matrix(S, "S")
    if S.shape[0] != S.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got {S.shape}")
    return (S + S.T) / 2.0


def covariance(X):
    """Column covariance with divisor ``n - 1``."""
    X = as_matrix(X)
    n = X.shape[0]
    if n < 2:
        raise InsufficientSamplesError(f"covariance needs at least 2 rows, got {n}")
    centered = X - X.mean(axis=0)
    with np.errstate(over="ignore", invalid="ignore"):
        S = centered.T @ centered / (n - 1)
    if not np.all(np.isfinite(S)):
        raise NumericalError("covariance overflowed; rescale the features")
    return symmetrize(S)


def regularize(S, lam):
    if lam < 0:
        raise ValidationError(f"regularization must be non-negative, got {lam}")
    S = symmetrize(S)
    return S + lam * np.eye(S.shape[0])


def cholesky(S):
    """Lower-triangular ``L`` with ``L @ L.T == S``.

    A pivot at or below ``PIVOT_TOL * max(diag(S))`` raises
    :class:`NotPositiveDefiniteError`; CORAL uses that as its cue to fall
    back to an eigendecomposition.
    """
    S = symmetrize(S)
    d = S.shape[0]
    tol = PIVOT_TOL * max(float(np.max(np.diag(S))), 0.0)
    L = np.zeros_like(S)
    for j in range(d):
        row = L[j, :j]
        pivot = S[j, j] - row @ row
        if not pivot > tol:
            raise NotPositiveDefiniteError(
                f"non-positive pivot {pivot:.3e} at column {j} (tolerance {tol:.3e})"
            )
        L[j, j] = np.sqrt(pivot)
        if j + 1 < d:
            L[j + 1:, j] = (S[j + 1:, j] - L[j + 1:, :j] @ row) / L[j, j]
    return L


def solve_lower_triangular(L, B, transpose=False):
    """Solve ``L X = B`` by forward substitution (``L.T X = B`` if ``transpose``)."""
    L = as_matrix(L, "L")
    B = np.asarray(B, dtype=np.float64)
    vector = B.ndim == 1
    if vector:
        B = B[:, None]
    d = L.shape[0]
    if L.shape[1] != d or B.shape[0] != d:
        raise DimensionMismatchError(f"cannot solve {L.shape} system with right-hand side {B.shape}")
    diag = np.diag(L)
    if np.any(diag == 0.0):
        raise SingularMatrixError("triangular matrix has a zero on its diagonal")
    X = np.zeros_like(B)
    if transpose:
        U = L.T
        for i in range(d - 1, -1, -1):
            X[i] = (B[i] - U[i, i + 1:] @ X[i + 1:]) / diag[i]
    else:
        for i in range(d):
            X[i] = (B[i] - L[i, :i] @ X[:i]) / diag[i]
    return X[:, 0] if vector else X


def _fix_signs(V):
    # largest-magnitude entry of each column made non-negative; first one wins ties
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def sym_eigen(S):
    """Eigenvalues (descending) and orthonormal eigenvector columns of symmetric ``S``."""
    S = symmetrize(S)
    try:
        w, V = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"symmetric eigensolver did not converge: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(V))):
        raise NumericalError("symmetric eigensolver produced non-finite output")
    order = np.argsort(-w, kind="stable")
    return w[order], _fix_signs(V[:, order])


def jacobi_eigen(S, max_sweeps=100, tol=1e-12):
    """Cyclic Jacobi eigensolver.

    Slow (one plane rotation at a time) but self-contained; kept as an
    independent cross-check for :func:`sym_eigen`. Output follows the same
    ordering and sign convention.
    """
    A = symmetrize(S).copy()
    d = A.shape[0]
    V = np.eye(d)
    threshold = tol * max(np.linalg.norm(A), np.finfo(float).tiny)
    upper = np.triu(np.ones((d, d), dtype=bool), 1)

    def off_norm():
        # summed directly; ||A||^2 - ||diag A||^2 cancels down to noise
        return np.sqrt(2.0 * np.sum(A[upper] ** 2))

    for _ in range(max_sweeps):
        if off_norm() <= threshold:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
    else:
        if off_norm() > threshold:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], _fix_signs(V[:, order])
