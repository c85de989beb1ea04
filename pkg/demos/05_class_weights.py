"""
Balanced class weights against majority collapse
================================================

With one positive for every nine negatives and strong regularization, an
unweighted logistic regression mostly predicts the majority class.
Weighting each class by n / (2 n_c) restores the minority recall.
"""

import numpy as np

from udapipe.classifier import UNIT_WEIGHTS, balanced_weights, fit_logreg, predict

rng = np.random.default_rng(4)
u = np.ones(5) / np.sqrt(5)
X = np.vstack([rng.standard_normal((1800, 5)) - u, rng.standard_normal((200, 5)) + u])
y = np.r_[np.zeros(1800, int), np.ones(200, int)]

print("weights:", balanced_weights(y))
for name, weights in (("balanced", None), ("unweighted", UNIT_WEIGHTS)):
    model = fit_logreg(X, y, c=0.01, weights=weights)
    p = predict(model, X)
    r0, r1 = np.mean(p[y == 0] == 0), np.mean(p[y == 1] == 1)
    print(f"{name:>10}: recall0 {r0:.3f}  recall1 {r1:.3f}  gap {abs(r0 - r1):.3f}  iterations {model.iterations}")
