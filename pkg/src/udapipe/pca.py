"""PCA fitted on the pooled rows of both domains.

No labels are involved. The two domains are simply stacked, so the larger
one dominates the covariance estimate; no re-weighting is attempted.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InsufficientSamplesError, ValidationError
from .linalg import as_matrix, covariance, sym_eigen


@dataclass(frozen=True, eq=False)
class PcaParams:
    mean: np.ndarray
    components: np.ndarray  # (n_components, d_in), orthonormal rows
    explained_variance: np.ndarray
    clamped: bool = False

    @property
    def input_dim(self):
        return self.mean.shape[0]

    @property
    def n_components(self):
        return self.components.shape[0]

    def to_dict(self):
        return {
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "clamped": self.clamped,
        }

    @classmethod
    def from_dict(cls, data):
        d = len(data["mean"])
        return cls(
            np.asarray(data["mean"], dtype=np.float64),
            np.asarray(data["components"], dtype=np.float64).reshape(-1, d),
            np.asarray(data["explained_variance"], dtype=np.float64),
            bool(data["clamped"]),
        )


def fit_joint_pca(X_source, X_target, n_components):
    Xs = as_matrix(X_source, "X_source")
    Xt = as_matrix(X_target, "X_target")
    if Xs.shape[1] != Xt.shape[1]:
        raise DimensionMismatchError(f"source has {Xs.shape[1]} features, target {Xt.shape[1]}")
    if n_components < 1:
        raise ValidationError(f"n_components must be >= 1, got {n_components}")
    pooled = np.vstack([Xs, Xt])
    n, d = pooled.shape
    if n < 2:
        raise InsufficientSamplesError("PCA needs at least 2 pooled rows")
    limit = min(d, n - 1)
    clamped = n_components > limit
    if clamped:
        warnings.warn(f"n_components={n_components} exceeds rank limit {limit}; clamped", RuntimeWarning, stacklevel=2)
        n_components = limit
    if n < 3 * n_components:
        warnings.warn(
            f"only {n} pooled rows for {n_components} components (fewer than 3 per component)",
            RuntimeWarning,
            stacklevel=2,
        )
    values, vectors = sym_eigen(covariance(pooled))
    return PcaParams(
        pooled.mean(axis=0),
        np.ascontiguousarray(vectors[:, :n_components].T),
        values[:n_components],
        clamped,
    )


def apply_pca(params, X):
    X = as_matrix(X)
    if X.shape[1] != params.input_dim:
        raise DimensionMismatchError(f"PCA fitted on {params.input_dim} features, got {X.shape[1]}")
    return (X - params.mean) @ params.components.T
