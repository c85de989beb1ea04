"""Correlation alignment (CORAL) of source features onto target second-order statistics.

With ``Σ_s + λI = L_s L_sᵀ`` and ``Σ_t + λI = L_t L_tᵀ`` the map
``z -> L_t L_s⁻¹ (z - μ_s) + μ_t`` whitens the source and re-colours it
with the target factor, so the transformed source covariance equals the
regularized target covariance. ``L_s⁻¹`` is never formed; ``Aᵀ`` comes
from a triangular back-substitution.

``literal=True`` instead uses ``A = L_s⁻¹ L_t`` with ``z Aᵀ``. That variant
does not reproduce the target covariance in general and is kept only for
comparison.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InsufficientSamplesError, NotPositiveDefiniteError, ValidationError
from .linalg import as_matrix, cholesky, covariance, regularize, solve_lower_triangular, sym_eigen

log = logging.getLogger(__name__)

EIGEN_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class CoralParams:
    transform_A: np.ndarray
    source_mean: np.ndarray
    target_mean: np.ndarray
    lam: float
    used_fallback: bool = False
    align_means: bool = True
    literal: bool = False

    @property
    def dim(self):
        return self.transform_A.shape[0]

    def to_dict(self):
        return {
            "transform_A": self.transform_A.tolist(),
            "source_mean": self.source_mean.tolist(),
            "target_mean": self.target_mean.tolist(),
            "lambda": self.lam,
            "used_fallback": self.used_fallback,
            "align_means": self.align_means,
            "literal": self.literal,
        }

    @classmethod
    def from_dict(cls, data):
        d = len(data["source_mean"])
        return cls(
            np.asarray(data["transform_A"], dtype=np.float64).reshape(d, d),
            np.asarray(data["source_mean"], dtype=np.float64),
            np.asarray(data["target_mean"], dtype=np.float64),
            float(data["lambda"]),
            bool(data["used_fallback"]),
            bool(data["align_means"]),
            bool(data["literal"]),
        )


def _eigen_factor(S, lam):
    # S ≈ V diag(w) Vᵀ with w floored; returns the factor and its inverse
    w, V = sym_eigen(S)
    w = np.maximum(w, max(lam, EIGEN_FLOOR))
    root = np.sqrt(w)
    return V * root, (V / root).T


def fit_coral(X_source, X_target, lam=1e-6, align_means=True, literal=False):
    Xs = as_matrix(X_source, "X_source")
    Xt = as_matrix(X_target, "X_target")
    if Xs.shape[1] != Xt.shape[1]:
        raise DimensionMismatchError(f"source has {Xs.shape[1]} features, target {Xt.shape[1]}")
    if Xs.shape[0] < 2 or Xt.shape[0] < 2:
        raise InsufficientSamplesError("CORAL needs at least 2 rows per domain")
    if lam < 0:
        raise ValidationError(f"lambda must be non-negative, got {lam}")
    S_s = regularize(covariance(Xs), lam)
    S_t = regularize(covariance(Xt), lam)

    used_fallback = False
    try:
        L_s = cholesky(S_s)
        L_t = cholesky(S_t)
        if literal:
            A = solve_lower_triangular(L_s, L_t)
        else:
            A = solve_lower_triangular(L_s, L_t.T, transpose=True).T
    except NotPositiveDefiniteError as exc:
        log.warning("CORAL: Cholesky failed (%s); using eigendecomposition fallback", exc)
        used_fallback = True
        F_s, F_s_inv = _eigen_factor(S_s, lam)
        F_t, _ = _eigen_factor(S_t, lam)
        A = F_s_inv @ F_t if literal else F_t @ F_s_inv

    return CoralParams(A, Xs.mean(axis=0), Xt.mean(axis=0), float(lam), used_fallback, align_means, literal)


def apply_coral(params, X):
    """Map rows ``z -> (z - μ_s) Aᵀ + μ_t`` (or ``z Aᵀ`` with mean alignment off)."""
    X = as_matrix(X)
    if X.shape[1] != params.dim:
        raise DimensionMismatchError(f"CORAL fitted on {params.dim} features, got {X.shape[1]}")
    if params.align_means:
        return (X - params.source_mean) @ params.transform_A.T + params.target_mean
    return X @ params.transform_A.T
