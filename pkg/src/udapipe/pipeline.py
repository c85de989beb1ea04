"""Stage orchestration, ablation ladder and multi-seed comparison.

Stage order is fixed: power transform -> ANOVA selection -> joint PCA ->
CORAL -> logistic regression. CORAL maps the *source* into the target's
second-order statistics, so at inference time target rows go through
power/selection/PCA only.

Fitting never sees target labels: :func:`fit_pipeline` reads
``TransferRun.source`` and ``TransferRun.target_unlabeled`` and nothing else.
"""

import contextlib
import io
import json
import math
import warnings
from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from .classifier import LogRegModel, fit_logreg, predict_proba
from .coral import CoralParams, apply_coral, fit_coral
from .pca import PcaParams, apply_pca, fit_joint_pca
from .power import PowerParams, apply_power, fit_power
from .selection import SelectedFeatures, apply_select, fit_select
from .dataset import LabeledDataset, SplitSpec, generate_synthetic_domains, stratified_split
from .errors import DimensionMismatchError, DuplicateSeedError, StageError, UdaError, ValidationError
from .metrics import MetricsReport, evaluate_scores
from .stats import mean_sd, paired_t_test

FORMAT_VERSION = 1
STAGES = ("power", "select", "pca", "coral")
RUNG_LABELS = (
    "Baseline (Raw Wav2Vec)",
    "+ Power Transform",
    "+ Feature Selection",
    "+ PCA",
    "+ CORAL",
)


@dataclass(frozen=True)
class PipelineConfig:
    enable_power: bool = True
    enable_select: bool = True
    enable_pca: bool = True
    enable_coral: bool = True
    k_select: int = 512
    n_components: int = 256
    coral_lambda: float = 1e-6
    coral_literal_formula: bool = False
    coral_align_means: bool = True
    power_fit_domain: str = "source_only"
    logreg_c: float = 0.01
    threshold: float = 0.5
    seed: int = 42

    def __post_init__(self):
        if self.k_select < 1:
            raise ValidationError("k_select must be >= 1")
        if self.n_components < 1:
            raise ValidationError("n_components must be >= 1")
        if not self.coral_lambda >= 0:
            raise ValidationError("coral_lambda must be >= 0")
        if self.power_fit_domain not in ("source_only", "joint"):
            raise ValidationError("power_fit_domain must be 'source_only' or 'joint'")
        if not self.logreg_c > 0:
            raise ValidationError("logreg_c must be > 0")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValidationError("threshold must lie in [0, 1]")
        if self.enable_select and self.enable_pca and self.k_select < self.n_components:
            warnings.warn(
                f"k_select={self.k_select} < n_components={self.n_components}; PCA will be clamped",
                RuntimeWarning,
                stacklevel=3,
            )

    @property
    def enabled(self):
        return tuple(s for s in STAGES if getattr(self, f"enable_{s}"))

    def with_stages(self, *names):
        unknown = set(names) - set(STAGES)
        if unknown:
            raise ValidationError(f"unknown stages {sorted(unknown)}")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return replace(self, **{f"enable_{s}": s in names for s in STAGES})

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True, eq=False)
class TransferRun:
    """Labeled source, unlabeled target features for adaptation, labeled target test set."""

    source: LabeledDataset
    target_unlabeled: np.ndarray
    target_test: Optional[LabeledDataset] = None

    def __post_init__(self):
        if not self.source.labeled:
            raise ValidationError("source domain must be labeled")
        target = self.target_unlabeled
        if isinstance(target, LabeledDataset):
            target = target.features
        target = np.array(target, dtype=np.float64)
        target.setflags(write=False)
        object.__setattr__(self, "target_unlabeled", target)
        if target.ndim != 2 or target.shape[1] != self.source.d:
            raise DimensionMismatchError(f"target has shape {target.shape}, source has {self.source.d} features")
        if self.target_test is not None and self.target_test.d != self.source.d:
            raise DimensionMismatchError("target test set dimension differs from source")


@dataclass(frozen=True, eq=False)
class FittedPipeline:
    config: PipelineConfig
    model: LogRegModel
    power: Optional[PowerParams] = None
    select: Optional[SelectedFeatures] = None
    pca: Optional[PcaParams] = None
    coral: Optional[CoralParams] = None

    @property
    def stages(self):
        return tuple(s for s in STAGES if getattr(self, s) is not None)

    @property
    def input_dim(self):
        if self.power is not None:
            return self.power.dim
        if self.select is not None:
            return self.select.input_dim
        if self.pca is not None:
            return self.pca.input_dim
        if self.coral is not None:
            return self.coral.dim
        return self.model.weights.size

    def dims(self):
        """Feature count after each applied stage, starting with the input."""
        out = [self.input_dim]
        for s in self.stages:
            if s == "select":
                out.append(self.select.indices.size)
            elif s == "pca":
                out.append(self.pca.n_components)
            else:
                out.append(out[-1])
        return out

    def to_dict(self):
        out = {"format_version": FORMAT_VERSION, "config": self.config.to_dict(), "stages": list(self.stages)}
        for s in self.stages:
            out[s] = getattr(self, s).to_dict()
        out["model"] = self.model.to_dict()
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, data):
        if data.get("format_version") != FORMAT_VERSION:
            raise ValidationError(f"unsupported model format_version {data.get('format_version')!r}")
        loaders = {
            "power": PowerParams,
            "select": SelectedFeatures,
            "pca": PcaParams,
            "coral": CoralParams,
        }
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            config = PipelineConfig.from_dict(data["config"])
        parts = {s: loaders[s].from_dict(data[s]) for s in data["stages"]}
        fp = cls(config, LogRegModel.from_dict(data["model"]), **parts)
        _check_chain(fp)
        return fp

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _check_chain(fp):
    d = fp.input_dim
    if fp.select is not None:
        if fp.select.input_dim != d:
            raise DimensionMismatchError("selection input does not match power output")
        d = fp.select.indices.size
    if fp.pca is not None:
        if fp.pca.input_dim != d:
            raise DimensionMismatchError("PCA input does not match the previous stage")
        d = fp.pca.n_components
    if fp.coral is not None:
        if fp.coral.dim != d:
            raise DimensionMismatchError("CORAL dimension does not match the previous stage")
    if fp.model.weights.size != d:
        raise DimensionMismatchError("classifier dimension does not match the previous stage")


@contextlib.contextmanager
def _stage(name):
    try:
        yield
    except StageError:
        raise
    except UdaError as exc:
        raise StageError(name, exc) from exc


def fit_pipeline(run, config):
    cfg = config
    Xs = run.source.features
    ys = run.source.labels
    Xt = np.array(run.target_unlabeled)
    parts = {}

    if cfg.enable_power:
        with _stage("power"):
            fit_rows = Xs if cfg.power_fit_domain == "source_only" else np.vstack([Xs, Xt])
            parts["power"] = fit_power(fit_rows)
            Xs = apply_power(parts["power"], Xs)
            Xt = apply_power(parts["power"], Xt)
    if cfg.enable_select:
        with _stage("select"):
            parts["select"] = fit_select(Xs, ys, cfg.k_select)
            Xs = apply_select(parts["select"], Xs)
            Xt = apply_select(parts["select"], Xt)
    if cfg.enable_pca:
        with _stage("pca"):
            parts["pca"] = fit_joint_pca(Xs, Xt, cfg.n_components)
            Xs = apply_pca(parts["pca"], Xs)
            Xt = apply_pca(parts["pca"], Xt)
    if cfg.enable_coral:
        with _stage("coral"):
            parts["coral"] = fit_coral(
                Xs, Xt, cfg.coral_lambda, align_means=cfg.coral_align_means, literal=cfg.coral_literal_formula
            )
            Xs = apply_coral(parts["coral"], Xs)
    with _stage("classifier"):
        model = fit_logreg(Xs, ys, cfg.logreg_c)
    fp = FittedPipeline(cfg, model, **parts)
    _check_chain(fp)
    return fp


def transform_for_inference(fp, X):
    """Power, selection and PCA as fitted; the CORAL map is never applied here."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != fp.input_dim:
        raise DimensionMismatchError(f"pipeline expects {fp.input_dim} features, got shape {X.shape}")
    if fp.power is not None:
        X = apply_power(fp.power, X)
    if fp.select is not None:
        X = apply_select(fp.select, X)
    if fp.pca is not None:
        X = apply_pca(fp.pca, X)
    return X


def evaluate(fp, target_test):
    if not target_test.labeled:
        raise ValidationError("evaluation needs a labeled test set")
    scores = predict_proba(fp.model, transform_for_inference(fp, target_test.features))
    return evaluate_scores(target_test.labels, scores, fp.config.threshold)


# --- ablation ---------------------------------------------------------------------


def ladder_configs(config):
    """The five cumulative configurations, baseline first."""
    return [config.with_stages(*STAGES[:i]) for i in range(len(STAGES) + 1)]


def _delta(new, old):
    if new is None or old is None:
        return None
    return new - old


@dataclass(frozen=True)
class AblationReport:
    labels: tuple
    reports: tuple  # MetricsReport per rung

    def deltas(self, metric):
        values = [getattr(r, metric) for r in self.reports]
        return [None] + [_delta(b, a) for a, b in zip(values, values[1:])]

    def total_delta(self, metric):
        return _delta(getattr(self.reports[-1], metric), getattr(self.reports[0], metric))

    def to_dict(self):
        rows = []
        deltas = {m: self.deltas(m) for m in ("accuracy", "auc", "eer")}
        for i, (label, rep) in enumerate(zip(self.labels, self.reports)):
            rows.append(
                {
                    "label": label,
                    "metrics": rep.to_dict(),
                    "delta_accuracy": deltas["accuracy"][i],
                    "delta_auc": deltas["auc"][i],
                    "delta_eer": deltas["eer"][i],
                }
            )
        return {
            "rungs": rows,
            "total_delta": {m: self.total_delta(m) for m in ("accuracy", "auc", "eer")},
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def to_csv(self):
        def cell(v):
            return "" if v is None else repr(float(v))

        buf = io.StringIO()
        buf.write("label,accuracy,auc,eer,delta_accuracy\n")
        for label, rep, delta in zip(self.labels, self.reports, self.deltas("accuracy")):
            buf.write(",".join([label, cell(rep.accuracy), cell(rep.auc), cell(rep.eer), cell(delta)]) + "\n")
        return buf.getvalue()

    def telescoping_gap(self, metric="accuracy"):
        """|sum of step deltas - total delta|; zero up to rounding."""
        steps = [d for d in self.deltas(metric)[1:]]
        total = self.total_delta(metric)
        if total is None or any(d is None for d in steps):
            return None
        return abs(math.fsum(steps) - total)


def run_ablation(run, config):
    if run.target_test is None:
        raise ValidationError("ablation needs a labeled target test set")
    reports = []
    for cfg in ladder_configs(config):
        reports.append(evaluate(fit_pipeline(run, cfg), run.target_test))
    return AblationReport(RUNG_LABELS, tuple(reports))


# --- multi-seed --------------------------------------------------------------------


def _check_seeds(seeds):
    seeds = [int(s) for s in seeds]
    if len(seeds) < 2:
        raise ValidationError("multi-seed runs need at least 2 seeds")
    if len(set(seeds)) != len(seeds):
        raise DuplicateSeedError(f"duplicate seeds in {seeds}")
    return sorted(seeds)


@dataclass(frozen=True)
class MultiSeedReport:
    seeds: tuple
    baseline_accuracy: tuple
    full_accuracy: tuple

    def summary(self):
        diff = np.asarray(self.full_accuracy) - np.asarray(self.baseline_accuracy)
        out = {}
        for name, values in (("baseline", self.baseline_accuracy), ("full", self.full_accuracy), ("difference", diff)):
            m, sd = mean_sd(values)
            out[name] = {"mean": m, "sd": sd}
        return out

    def ttest(self):
        return paired_t_test(self.full_accuracy, self.baseline_accuracy)

    def to_dict(self):
        rows = [
            {"seed": s, "baseline_accuracy": b, "full_accuracy": f}
            for s, b, f in zip(self.seeds, self.baseline_accuracy, self.full_accuracy)
        ]
        return {"rows": rows, "summary": self.summary(), "ttest": self.ttest().to_dict()}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1) + "\n"


def multi_seed_run(make_run, config, seeds):
    """Baseline (all stages off) vs ``config`` for each seed; ``make_run(seed)`` builds the data."""
    seeds = _check_seeds(seeds)
    baseline, full = [], []
    for seed in seeds:
        run = make_run(seed)
        cfg = replace(config, seed=seed)
        baseline.append(evaluate(fit_pipeline(run, cfg.with_stages()), run.target_test).accuracy)
        full.append(evaluate(fit_pipeline(run, cfg), run.target_test).accuracy)
    return MultiSeedReport(tuple(seeds), tuple(baseline), tuple(full))


def multi_seed_ablation(make_run, config, seeds):
    """Per-seed accuracy of every ladder rung plus paired t-tests between consecutive rungs."""
    seeds = _check_seeds(seeds)
    table = np.empty((len(seeds), len(RUNG_LABELS)))
    for i, seed in enumerate(seeds):
        run = make_run(seed)
        for j, cfg in enumerate(ladder_configs(replace(config, seed=seed))):
            table[i, j] = evaluate(fit_pipeline(run, cfg), run.target_test).accuracy
    tests = [paired_t_test(table[:, j + 1], table[:, j]) for j in range(len(RUNG_LABELS) - 1)]
    return table, tests


# --- run factories -----------------------------------------------------------------


def split_run(source, target, seed, train_fraction=0.8, transductive=False):
    """Build a run from two labeled datasets with seeded stratified splits.

    The source keeps its training part. The target's training part becomes
    the unlabeled adaptation set and its held-out part the test set; with
    ``transductive`` the adaptation set is the whole target instead.
    """
    spec = SplitSpec(train_fraction, seed)
    source_train, _ = stratified_split(source, spec)
    target_adapt, target_test = stratified_split(target, spec)
    adapt = target.features if transductive else target_adapt.features
    return TransferRun(source_train, adapt, target_test)


def synthetic_run(shift_spec, seed, adapt_fraction=0.8):
    """Generate both domains for ``seed`` and split the target into adaptation and test parts."""
    source, target = generate_synthetic_domains(replace(shift_spec, seed=seed))
    adapt, test = stratified_split(target, SplitSpec(adapt_fraction, seed))
    return TransferRun(source, adapt.features, test)
