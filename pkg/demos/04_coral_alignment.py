"""
Aligning source covariance to the target
========================================

CORAL whitens the source with its Cholesky factor and re-colours it with
the target factor. The small ridge lam makes every factor well defined;
the price is that the aligned covariance falls short of the target by
exactly lam * A A^T.
"""

import numpy as np

from udapipe.coral import apply_coral, fit_coral
from udapipe.linalg import covariance

rng = np.random.default_rng(3)
d = 5
Xs = rng.standard_normal((2000, d)) @ rng.standard_normal((d, d))
Xt = rng.standard_normal((2000, d)) @ rng.standard_normal((d, d)) + 3.0

lam = 1e-6
params = fit_coral(Xs, Xt, lam)
aligned = apply_coral(params, Xs)
target = covariance(Xt) + lam * np.eye(d)

A = params.transform_A
rel = lambda a, b: np.linalg.norm(a - b) / np.linalg.norm(b)
print("before:", rel(covariance(Xs), target))
print("after: ", rel(covariance(aligned), target))
print("after, ridge term added back:", rel(covariance(aligned) + lam * A @ A.T, target))
print("means now agree:", np.allclose(aligned.mean(axis=0), Xt.mean(axis=0)))

# a rank-deficient target cannot be Cholesky-factored without a ridge;
# the eigendecomposition fallback takes over
base = rng.standard_normal((2000, d - 1))
flat = np.column_stack([base, base.sum(axis=1)])
fb = fit_coral(Xs, flat, 0.0)
print("fallback used:", fb.used_fallback, " matching:", rel(covariance(apply_coral(fb, Xs)), covariance(flat)))

# the variant with the factors in the other order does not match covariances
lit = fit_coral(Xs, Xt, lam, literal=True)
print("reversed-order variant:", rel(covariance(apply_coral(lit, Xs)), target))
