"""
Keeping discriminative features, then projecting both domains
=============================================================

ANOVA F-scores rank features by class separation on the labeled source.
Joint PCA is then fitted on source and target rows together, so the
retained axes describe both domains.
"""

import numpy as np

from udapipe.pca import apply_pca, fit_joint_pca
from udapipe.selection import anova_f_scores, apply_select, fit_select

rng = np.random.default_rng(2)
n, d = 400, 40
y = rng.integers(0, 2, n)
X = rng.standard_normal((n, d))
X[:, :5] += 1.5 * y[:, None]  # only the first five columns carry the label

F = anova_f_scores(X, y)
print("top F-scores:", np.round(np.sort(F)[::-1][:8], 1))

sel = fit_select(X, y, 10)
print("kept columns:", sel.indices.tolist())

# an unlabeled target with its own offset
Xt = rng.standard_normal((300, d)) + 0.5
Xs_sel, Xt_sel = apply_select(sel, X), apply_select(sel, Xt)

pca = fit_joint_pca(Xs_sel, Xt_sel, 4)
print("explained variance:", np.round(pca.explained_variance, 3))
Z = apply_pca(pca, np.vstack([Xs_sel, Xt_sel]))
print("projected covariance is diagonal:")
print(np.round(np.cov(Z.T), 3))
