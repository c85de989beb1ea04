"""Supervised top-k feature selection by one-way ANOVA F-statistic (two classes)."""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InsufficientSamplesError, MissingClassError, ValidationError
from .linalg import as_matrix

TINY = 1e-24


def _check_labels(X, y):
    y = np.asarray(y)
    if y.shape != (X.shape[0],):
        raise DimensionMismatchError(f"{y.size} labels for {X.shape[0]} rows")
    if not np.all((y == 0) | (y == 1)):
        raise ValidationError("labels must be 0 or 1")
    for c in (0, 1):
        if not np.any(y == c):
            raise MissingClassError(f"class {c} is absent")
    return y.astype(np.int64)


def anova_f_scores(X, y):
    """F = MS_between / MS_within for each column.

    Zero within-class spread with non-zero between-class spread scores
    ``+inf``; a column with neither scores 0.
    """
    X = as_matrix(X)
    y = _check_labels(X, y)
    n = X.shape[0]
    if n < 3:
        raise InsufficientSamplesError("ANOVA needs at least 3 samples")
    grand = X.mean(axis=0)
    ss_between = np.zeros(X.shape[1])
    ss_within = np.zeros(X.shape[1])
    for c in (0, 1):
        Xc = X[y == c]
        mc = Xc.mean(axis=0)
        ss_between += Xc.shape[0] * (mc - grand) ** 2
        ss_within += np.sum((Xc - mc) ** 2, axis=0)
    ms_between = ss_between / (2 - 1)
    ms_within = ss_within / (n - 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        F = ms_between / ms_within
    flat = ms_within < TINY
    F[flat] = np.where(ms_between[flat] >= TINY, np.inf, 0.0)
    return F


@dataclass(frozen=True, eq=False)
class SelectedFeatures:
    indices: np.ndarray  # ascending original column indices
    scores: np.ndarray  # F-score of every original column
    clamped: bool = False  # k exceeded the number of columns

    @property
    def input_dim(self):
        return self.scores.shape[0]

    def to_dict(self):
        return {
            "indices": self.indices.tolist(),
            "scores": [float(s) if np.isfinite(s) else "inf" for s in self.scores],
            "clamped": self.clamped,
        }

    @classmethod
    def from_dict(cls, data):
        scores = np.array([np.inf if s == "inf" else float(s) for s in data["scores"]])
        return cls(np.asarray(data["indices"], dtype=np.int64), scores, bool(data["clamped"]))


def top_k(scores, k):
    """Indices of the ``k`` largest scores, lower index first on ties, returned ascending."""
    scores = np.asarray(scores, dtype=np.float64)
    order = np.lexsort((np.arange(scores.size), -scores))
    return np.sort(order[:k])


def fit_select(X, y, k):
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    F = anova_f_scores(X, y)
    d = F.size
    clamped = k > d
    if clamped:
        warnings.warn(f"k={k} exceeds {d} features; keeping all of them", RuntimeWarning, stacklevel=2)
    return SelectedFeatures(top_k(F, min(k, d)), F, clamped)


def apply_select(sel, X):
    X = as_matrix(X)
    if X.shape[1] != sel.input_dim:
        raise DimensionMismatchError(f"selector fitted on {sel.input_dim} features, got {X.shape[1]}")
    return X[:, sel.indices]
