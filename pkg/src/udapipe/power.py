"""Per-feature Yeo-Johnson transform with maximum-likelihood exponents, then standardization."""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InsufficientSamplesError
from .linalg import as_matrix

BRANCH_TOL = 1e-10
LOG_MAX = np.log(1e300)
LAMBDA_BOUNDS = (-5.0, 5.0)
SEARCH_TOL = 1e-5
VAR_FLOOR = 1e-24


def _yj(x, lam):
    """Vectorized transform; also returns a mask of entries clamped against overflow."""
    x, lam = np.broadcast_arrays(np.asarray(x, dtype=np.float64), np.asarray(lam, dtype=np.float64))
    out = np.zeros(x.shape)
    clamped = np.zeros(x.shape, dtype=bool)
    pos = x >= 0
    neg = ~pos

    log_branch = pos & (np.abs(lam) < BRANCH_TOL)
    out[log_branch] = np.log1p(x[log_branch])
    power = pos & ~log_branch
    if power.any():
        lp = lam[power]
        e = lp * np.log1p(x[power])
        over = e > LOG_MAX
        clamped[power] = over
        out[power] = np.expm1(np.minimum(e, LOG_MAX)) / lp

    log_branch = neg & (np.abs(lam - 2.0) < BRANCH_TOL)
    out[log_branch] = -np.log1p(-x[log_branch])
    power = neg & ~log_branch
    if power.any():
        q = 2.0 - lam[power]
        e = q * np.log1p(-x[power])
        over = e > LOG_MAX
        clamped[power] = over
        out[power] = -np.expm1(np.minimum(e, LOG_MAX)) / q
    return out, clamped


def yj_value(x, lam):
    """Yeo-Johnson transform of ``x`` (scalar or array) with exponent ``lam``."""
    out, clamped = _yj(x, lam)
    if clamped.any():
        warnings.warn(f"Yeo-Johnson overflow: {int(clamped.sum())} value(s) clamped", RuntimeWarning, stacklevel=2)
    return out if out.ndim else float(out)


def _log_likelihood(X, lambdas):
    n = X.shape[0]
    psi, _ = _yj(X, lambdas)
    var = psi.var(axis=0)
    jacobian = np.sum(np.sign(X) * np.log1p(np.abs(X)), axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ll = -0.5 * n * np.log(var) + (lambdas - 1.0) * jacobian
    bad = ~(var >= VAR_FLOOR) | ~np.isfinite(var)
    return np.where(bad, -np.inf, ll)


def yj_log_likelihood(column, lam):
    """Gaussian profile log-likelihood of the transformed column (variance divisor ``n``).

    Returns ``-inf`` when the transformed variance drops below 1e-24.
    """
    column = np.asarray(column, dtype=np.float64).reshape(-1, 1)
    if column.shape[0] < 2:
        raise InsufficientSamplesError("log-likelihood needs at least 2 values")
    return float(_log_likelihood(column, np.array([float(lam)]))[0])


def _golden_section_max(X, lo, hi, tol):
    # runs the same number of steps for every column, so results don't depend on batching
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    m = X.shape[1]
    a = np.full(m, lo)
    b = np.full(m, hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = _log_likelihood(X, c)
    fd = _log_likelihood(X, d)
    steps = int(np.ceil(np.log(tol / (hi - lo)) / np.log(invphi)))
    for _ in range(steps):
        left = fc >= fd  # maximum lies in [a, d]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        d_new = np.where(left, c, a + invphi * (b - a))
        c_new = np.where(left, b - invphi * (b - a), d)
        fd_new = np.where(left, fc, np.nan)
        fc_new = np.where(left, np.nan, fd)
        need = np.where(left, c_new, d_new)
        f_need = _log_likelihood(X, need)
        fc = np.where(left, f_need, fc_new)
        fd = np.where(left, fd_new, f_need)
        c, d = c_new, d_new
    return (a + b) / 2.0


@dataclass(frozen=True, eq=False)
class PowerParams:
    lambdas: np.ndarray
    post_means: np.ndarray
    post_stds: np.ndarray
    constant: np.ndarray  # True where the input column was constant

    @property
    def dim(self):
        return self.lambdas.shape[0]

    def to_dict(self):
        return {
            "lambdas": self.lambdas.tolist(),
            "post_means": self.post_means.tolist(),
            "post_stds": self.post_stds.tolist(),
            "constant": self.constant.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            np.asarray(data["lambdas"], dtype=np.float64),
            np.asarray(data["post_means"], dtype=np.float64),
            np.asarray(data["post_stds"], dtype=np.float64),
            np.asarray(data["constant"], dtype=bool),
        )


def fit_power(X):
    """Fit one exponent per column by golden-section search on [-5, 5].

    Constant columns get exponent 1 and unit scale, and are flagged in
    ``PowerParams.constant``.
    """
    X = as_matrix(X)
    if X.shape[0] < 2:
        raise InsufficientSamplesError("power transform needs at least 2 rows")
    constant = np.ptp(X, axis=0) == 0
    lambdas = np.ones(X.shape[1])
    live = ~constant
    if live.any():
        lambdas[live] = _golden_section_max(X[:, live], *LAMBDA_BOUNDS, SEARCH_TOL)
    psi, clamped = _yj(X, lambdas)
    if clamped.any():
        warnings.warn(f"Yeo-Johnson overflow while fitting: {int(clamped.sum())} value(s) clamped", RuntimeWarning, stacklevel=2)
    means = psi.mean(axis=0)
    stds = psi.std(axis=0, ddof=1)
    degenerate = constant | ~(stds > 0)
    stds = np.where(degenerate, 1.0, stds)
    if constant.any():
        warnings.warn(f"{int(constant.sum())} constant feature(s): exponent fixed at 1, unit scale", RuntimeWarning, stacklevel=2)
    return PowerParams(lambdas, means, stds, constant | degenerate)


def apply_power(params, X):
    X = as_matrix(X)
    if X.shape[1] != params.dim:
        raise DimensionMismatchError(f"power transform fitted on {params.dim} features, got {X.shape[1]}")
    psi, clamped = _yj(X, params.lambdas)
    if clamped.any():
        warnings.warn(f"Yeo-Johnson overflow: {int(clamped.sum())} value(s) clamped", RuntimeWarning, stacklevel=2)
    return (psi - params.post_means) / params.post_stds
