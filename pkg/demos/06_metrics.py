"""
Threshold metrics, ROC, AUC and EER
===================================

Class 1 is the positive (deepfake) class and higher scores lean towards
it. AUC is the trapezoidal area under the ROC, which equals the share of
correctly ordered positive/negative pairs with ties counted half.
"""

import numpy as np

from udapipe.metrics import auc, eer, evaluate_scores, roc_curve

y = np.array([1, 0, 1, 0])
s = np.array([0.9, 0.6, 0.4, 0.1])
curve = roc_curve(s, y)
print("ROC vertices:", list(zip(curve.fpr.tolist(), curve.tpr.tolist())))
print("AUC:", auc(curve), " EER:", eer(curve))

rng = np.random.default_rng(5)
y = rng.integers(0, 2, 2000)
scores = 1 / (1 + np.exp(-(2 * y - 1 + rng.standard_normal(2000))))
report = evaluate_scores(y, scores)
for key, value in report.to_dict().items():
    print(f"{key:>10}: {value}")
