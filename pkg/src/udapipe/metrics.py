"""Detection metrics. Class 1 (deepfake) is the positive class and higher scores mean "more likely positive"."""

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, MissingClassError, ValidationError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n(self):
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray  # descending, starts at +inf
    fpr: np.ndarray
    tpr: np.ndarray


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    acc_class0: float
    acc_class1: float
    confusion: ConfusionCounts
    auc: Optional[float] = None
    eer: Optional[float] = None
    flags: tuple = field(default_factory=tuple)

    def to_dict(self):
        out = {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }
        if self.auc is not None:
            out["auc"] = self.auc
        if self.eer is not None:
            out["eer"] = self.eer
        out["acc_class0"] = self.acc_class0
        out["acc_class1"] = self.acc_class1
        out["confusion"] = {"tp": self.confusion.tp, "fp": self.confusion.fp, "tn": self.confusion.tn, "fn": self.confusion.fn}
        out["flags"] = list(self.flags)
        return out


def _ratio(num, den, name, flags):
    if den == 0:
        flags.append(f"{name}_undefined")
        return 0.0
    return num / den


def _labels(y, name="y"):
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValidationError(f"{name} must be 1-D")
    if not np.all((y == 0) | (y == 1)):
        raise ValidationError(f"{name} must contain only 0 and 1")
    return y.astype(np.int64)


def confusion_counts(y, y_hat):
    y, y_hat = _labels(y), _labels(y_hat, "y_hat")
    if y.size != y_hat.size:
        raise DimensionMismatchError(f"{y.size} labels vs {y_hat.size} predictions")
    return ConfusionCounts(
        tp=int(np.sum((y == 1) & (y_hat == 1))),
        fp=int(np.sum((y == 0) & (y_hat == 1))),
        tn=int(np.sum((y == 0) & (y_hat == 0))),
        fn=int(np.sum((y == 1) & (y_hat == 0))),
    )


def classification_metrics(y, y_hat):
    """Threshold metrics; any 0/0 ratio is reported as 0 and named in ``flags``."""
    cc = confusion_counts(y, y_hat)
    if cc.n == 0:
        raise ValidationError("need at least one sample")
    flags = []
    precision = _ratio(cc.tp, cc.tp + cc.fp, "precision", flags)
    recall = _ratio(cc.tp, cc.tp + cc.fn, "recall", flags)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return MetricsReport(
        accuracy=(cc.tp + cc.tn) / cc.n,
        precision=precision,
        recall=recall,
        f1=f1,
        acc_class0=_ratio(cc.tn, cc.tn + cc.fp, "acc_class0", flags),
        acc_class1=_ratio(cc.tp, cc.tp + cc.fn, "acc_class1", flags),
        confusion=cc,
        flags=tuple(flags),
    )


def roc_curve(scores, y):
    """One vertex per distinct score, swept from the highest; tied scores move together."""
    scores = np.asarray(scores, dtype=np.float64)
    y = _labels(y)
    if scores.shape != y.shape:
        raise DimensionMismatchError(f"{scores.size} scores for {y.size} labels")
    n_pos = int(np.sum(y == 1))
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MissingClassError("ROC needs both classes")
    order = np.argsort(-scores, kind="stable")
    s, t = scores[order], y[order]
    last_of_group = np.r_[s[1:] != s[:-1], True]
    tp = np.cumsum(t)[last_of_group]
    fp = np.cumsum(1 - t)[last_of_group]
    return RocCurve(
        thresholds=np.r_[np.inf, s[last_of_group]],
        fpr=np.r_[0.0, fp / n_neg],
        tpr=np.r_[0.0, tp / n_pos],
    )


def auc(curve):
    """Trapezoidal area under the ROC curve."""
    dx = np.diff(curve.fpr)
    return float(np.sum(dx * (curve.tpr[1:] + curve.tpr[:-1]) / 2.0))


def eer(curve):
    """Equal error rate, interpolated linearly between the bracketing ROC vertices."""
    gap = curve.fpr - (1.0 - curve.tpr)
    i = int(np.argmax(gap >= 0))
    if gap[i] == 0 or i == 0:
        return float(curve.fpr[i])
    g0, g1 = gap[i - 1], gap[i]
    frac = -g0 / (g1 - g0)
    return float(curve.fpr[i - 1] + frac * (curve.fpr[i] - curve.fpr[i - 1]))


def evaluate_scores(y, scores, threshold=0.5):
    """Full report from probabilities; AUC and EER are skipped when one class is missing."""
    y = _labels(y)
    scores = np.asarray(scores, dtype=np.float64)
    report = classification_metrics(y, (scores >= threshold).astype(np.int64))
    if np.all(y == y[0]):
        warnings.warn("single-class evaluation set: AUC and EER omitted", RuntimeWarning, stacklevel=2)
        return replace(report, flags=report.flags + ("single_class",))
    curve = roc_curve(scores, y)
    return replace(report, auc=auc(curve), eer=eer(curve))
