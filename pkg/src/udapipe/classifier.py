"""Class-weighted, L2-regularized binary logistic regression.

Objective (``C`` is the inverse regularization strength, intercept not
penalized)::

    sum_i w[y_i] * log(1 + exp(-s_i * (x_i . w + b))) + ||w||^2 / (2 C),   s_i = 2 y_i - 1

Minimized by full-batch gradient descent with Armijo backtracking.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, MissingClassError, ValidationError
from .linalg import as_matrix

MAX_ITER = 1000
GRAD_TOL = 1e-6
ARMIJO_C1 = 1e-4
BACKTRACK = 0.5
MIN_STEP = 1e-20


@dataclass(frozen=True)
class ClassWeights:
    w0: float
    w1: float

    def __post_init__(self):
        if not (self.w0 > 0 and self.w1 > 0):
            raise ValidationError("class weights must be positive")

    def per_sample(self, y):
        return np.where(np.asarray(y) == 1, self.w1, self.w0)


UNIT_WEIGHTS = ClassWeights(1.0, 1.0)


def balanced_weights(y):
    """``w_c = n / (2 n_c)``."""
    y = np.asarray(y)
    n = y.size
    n1 = int(np.sum(y == 1))
    n0 = int(np.sum(y == 0))
    if n0 == 0 or n1 == 0:
        raise MissingClassError("balanced weights need both classes")
    return ClassWeights(n / (2.0 * n0), n / (2.0 * n1))


@dataclass(frozen=True, eq=False)
class LogRegModel:
    weights: np.ndarray
    intercept: float
    c_inverse_reg: float
    converged: bool
    iterations: int

    def to_dict(self):
        return {
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "c_inverse_reg": self.c_inverse_reg,
            "converged": self.converged,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            np.asarray(data["weights"], dtype=np.float64),
            float(data["intercept"]),
            float(data["c_inverse_reg"]),
            bool(data["converged"]),
            int(data["iterations"]),
        )


def _softplus(z):
    # log(1 + exp(z)) without overflow
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _sigmoid(z):
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def loss_and_gradient(w, b, X, y, weights, c):
    """Weighted objective and its gradient; the gradient's last entry is d/db."""
    s = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
    sw = weights.per_sample(y)
    margin = s * (X @ w + b)
    loss = np.sum(sw * _softplus(-margin)) + (w @ w) / (2.0 * c)
    coef = -sw * s * _sigmoid(-margin)
    grad = np.empty(w.size + 1)
    grad[:-1] = X.T @ coef + w / c
    grad[-1] = np.sum(coef)
    return float(loss), grad


def fit_logreg(X, y, c=0.01, weights=None):
    """Fit from zero initialization; ``weights=None`` means balanced class weights."""
    X = as_matrix(X)
    y = np.asarray(y)
    if y.shape != (X.shape[0],):
        raise DimensionMismatchError(f"{y.size} labels for {X.shape[0]} rows")
    if not (np.any(y == 0) and np.any(y == 1)):
        raise MissingClassError("logistic regression needs both classes")
    if not c > 0:
        raise ValidationError(f"C must be positive, got {c}")
    if weights is None:
        weights = balanced_weights(y)

    w = np.zeros(X.shape[1])
    b = 0.0
    loss, grad = loss_and_gradient(w, b, X, y, weights, c)
    iterations = 0
    while True:
        if np.max(np.abs(grad)) <= GRAD_TOL:
            converged = True
            break
        converged = False
        if iterations == MAX_ITER:
            break
        g2 = grad @ grad
        step = 1.0
        while step >= MIN_STEP:
            w_new = w - step * grad[:-1]
            b_new = b - step * grad[-1]
            loss_new, grad_new = loss_and_gradient(w_new, b_new, X, y, weights, c)
            if loss_new <= loss - ARMIJO_C1 * step * g2:
                break
            step *= BACKTRACK
        else:
            break  # no descent left at machine precision
        w, b, loss, grad = w_new, b_new, loss_new, grad_new
        iterations += 1
    return LogRegModel(w, float(b), float(c), converged, iterations)


def predict_proba(model, X):
    X = as_matrix(X)
    if X.shape[1] != model.weights.size:
        raise DimensionMismatchError(f"model expects {model.weights.size} features, got {X.shape[1]}")
    return _sigmoid(X @ model.weights + model.intercept)


def predict(model, X, threshold=0.5):
    """Label 1 iff probability >= threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValidationError(f"threshold must lie in [0, 1], got {threshold}")
    return (predict_proba(model, X) >= threshold).astype(np.int64)
