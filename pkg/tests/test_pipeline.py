import json
import warnings

import numpy as np
import pytest

from udapipe.dataset import LabeledDataset, SyntheticShiftSpec, generate_synthetic_domains
from udapipe.errors import DimensionMismatchError, DuplicateSeedError, StageError, ValidationError
from udapipe.classifier import fit_logreg
from udapipe.pipeline import (
    RUNG_LABELS,
    FittedPipeline,
    MultiSeedReport,
    PipelineConfig,
    TransferRun,
    evaluate,
    fit_pipeline,
    ladder_configs,
    multi_seed_ablation,
    multi_seed_run,
    run_ablation,
    split_run,
    synthetic_run,
    transform_for_inference,
)

SMALL = SyntheticShiftSpec(n_source=300, n_target=300, seed=0)


def small_config(**kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return PipelineConfig(k_select=32, n_components=16, **kw)


@pytest.fixture(scope="module")
def run():
    return synthetic_run(SMALL, 0)


class TestConfig:
    def test_defaults(self):
        d = PipelineConfig().to_dict()
        assert (d["k_select"], d["n_components"], d["coral_lambda"], d["logreg_c"], d["seed"]) == (512, 256, 1e-6, 0.01, 42)
        assert d["power_fit_domain"] == "source_only" and d["threshold"] == 0.5
        assert all(d[f"enable_{s}"] for s in ("power", "select", "pca", "coral"))
        assert d["coral_literal_formula"] is False and d["coral_align_means"] is True

    def test_k_below_n_warns(self):
        with pytest.warns(RuntimeWarning, match="clamped"):
            PipelineConfig(k_select=8, n_components=16)

    def test_k_below_n_silent_when_pca_off(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            PipelineConfig(k_select=8, n_components=16, enable_pca=False)

    @pytest.mark.parametrize(
        "bad",
        [{"k_select": 0}, {"n_components": 0}, {"coral_lambda": -1.0}, {"logreg_c": 0.0}, {"threshold": 1.5}, {"power_fit_domain": "target"}],
    )
    def test_validation(self, bad):
        with pytest.raises(ValidationError):
            PipelineConfig(**bad)

    def test_round_trip(self):
        cfg = small_config(enable_coral=False, seed=7)
        assert PipelineConfig.from_dict(cfg.to_dict()) == cfg
        with pytest.raises(ValidationError):
            PipelineConfig.from_dict({"k": 3})

    def test_ladder(self):
        rungs = ladder_configs(PipelineConfig())
        assert [c.enabled for c in rungs] == [(), ("power",), ("power", "select"), ("power", "select", "pca"), ("power", "select", "pca", "coral")]


class TestFit:
    def test_dimension_chain(self, run):
        fp = fit_pipeline(run, small_config())
        assert fp.stages == ("power", "select", "pca", "coral")
        assert fp.dims() == [64, 64, 32, 16, 16]
        assert transform_for_inference(fp, run.target_unlabeled).shape == (run.target_unlabeled.shape[0], 16)

    def test_baseline_is_plain_classifier(self, run):
        fp = fit_pipeline(run, PipelineConfig().with_stages())
        assert fp.stages == () and fp.dims() == [64]
        direct = fit_logreg(run.source.features, run.source.labels, 0.01)
        assert fp.model.weights.tobytes() == direct.weights.tobytes()
        X = run.target_test.features
        np.testing.assert_array_equal(transform_for_inference(fp, X), X)

    def test_disabled_stage_contracts_chain(self, run):
        fp = fit_pipeline(run, small_config(enable_select=False))
        assert fp.stages == ("power", "pca", "coral") and fp.dims() == [64, 64, 16, 16]

    def test_deterministic(self, run):
        a = fit_pipeline(run, small_config())
        b = fit_pipeline(synthetic_run(SMALL, 0), small_config())
        assert a.to_json() == b.to_json()

    def test_target_labels_never_used(self):
        source, target = generate_synthetic_domains(SMALL)
        with_labels = TransferRun(source, target)
        without = TransferRun(source, target.without_labels())
        a, b = fit_pipeline(with_labels, small_config()), fit_pipeline(without, small_config())
        assert a.to_json() == b.to_json()
        # only features are kept for adaptation
        assert isinstance(with_labels.target_unlabeled, np.ndarray)
        assert not with_labels.target_unlabeled.flags.writeable

    def test_inference_skips_coral(self, run):
        fp = fit_pipeline(run, small_config())
        without = fit_pipeline(run, small_config(enable_coral=False))
        X = run.target_test.features
        np.testing.assert_array_equal(transform_for_inference(fp, X), transform_for_inference(without, X))

    def test_inference_is_pure(self, run):
        fp = fit_pipeline(run, small_config())
        X = run.target_test.features.copy()
        first = transform_for_inference(fp, X)
        assert np.array_equal(first, transform_for_inference(fp, X))
        assert np.array_equal(X, run.target_test.features)

    def test_joint_power_fit_differs(self, run):
        a = fit_pipeline(run, small_config(power_fit_domain="source_only"))
        b = fit_pipeline(run, small_config(power_fit_domain="joint"))
        assert not np.array_equal(a.power.lambdas, b.power.lambdas)

    def test_stage_errors_are_tagged(self):
        X = np.zeros((6, 3))
        src = LabeledDataset(np.random.default_rng(0).standard_normal((6, 3)), [0, 0, 0, 1, 1, 1])
        with pytest.raises(StageError) as info:
            fit_pipeline(TransferRun(src, X[:1]), small_config(enable_power=False, enable_select=False, enable_pca=False))
        assert info.value.stage == "coral"

    def test_run_validation(self, run):
        with pytest.raises(ValidationError):
            TransferRun(run.source.without_labels(), run.target_unlabeled)
        with pytest.raises(DimensionMismatchError):
            TransferRun(run.source, np.zeros((5, 3)))

    def test_dimension_mismatch_at_inference(self, run):
        fp = fit_pipeline(run, small_config())
        with pytest.raises(DimensionMismatchError):
            transform_for_inference(fp, np.zeros((2, 5)))


class TestSerialization:
    def test_json_round_trip(self, run):
        fp = fit_pipeline(run, small_config())
        back = FittedPipeline.from_json(fp.to_json())
        assert back.to_json() == fp.to_json()
        X = run.target_test.features
        assert evaluate(back, run.target_test) == evaluate(fp, run.target_test)
        np.testing.assert_array_equal(transform_for_inference(back, X), transform_for_inference(fp, X))

    def test_absent_stages_omitted(self, run):
        data = json.loads(fit_pipeline(run, small_config(enable_coral=False)).to_json())
        assert data["format_version"] == 1 and "coral" not in data and data["stages"] == ["power", "select", "pca"]

    def test_version_checked(self, run):
        data = fit_pipeline(run, small_config()).to_dict()
        data["format_version"] = 2
        with pytest.raises(ValidationError):
            FittedPipeline.from_dict(data)

    def test_broken_chain_rejected(self, run):
        data = fit_pipeline(run, small_config()).to_dict()
        data["model"]["weights"] = data["model"]["weights"][:-1]
        with pytest.raises(DimensionMismatchError):
            FittedPipeline.from_dict(data)


class TestEvaluate:
    def test_no_shift_is_easy(self):
        spec = SyntheticShiftSpec(n_source=400, n_target=400, class_separation=8.0, rotation_strength=0.0,
                                  translation_strength=0.0, skew_strength=0.0, seed=3)
        run = synthetic_run(spec, 3)
        assert evaluate(fit_pipeline(run, small_config()), run.target_test).accuracy >= 0.99

    def test_pure(self, run):
        fp = fit_pipeline(run, small_config())
        assert evaluate(fp, run.target_test).to_dict() == evaluate(fp, run.target_test).to_dict()

    def test_single_class_test_set(self, run):
        fp = fit_pipeline(run, small_config())
        t = run.target_test
        ones = t.subset(np.flatnonzero(t.labels == 1))
        with pytest.warns(RuntimeWarning):
            rep = evaluate(fp, ones)
        assert rep.auc is None and "single_class" in rep.flags

    def test_needs_labels(self, run):
        fp = fit_pipeline(run, small_config())
        with pytest.raises(ValidationError):
            evaluate(fp, run.target_test.without_labels())


class TestAblation:
    def test_labels_and_telescoping(self, run):
        rep = run_ablation(run, small_config())
        assert rep.labels == RUNG_LABELS == (
            "Baseline (Raw Wav2Vec)", "+ Power Transform", "+ Feature Selection", "+ PCA", "+ CORAL",
        )
        for metric in ("accuracy", "auc", "eer"):
            d = rep.deltas(metric)
            assert d[0] is None
            values = [getattr(r, metric) for r in rep.reports]
            assert d[1:] == [b - a for a, b in zip(values, values[1:])]
        assert rep.telescoping_gap() <= 1e-12

    def test_first_rung_equals_baseline_fit(self, run):
        rep = run_ablation(run, small_config())
        assert rep.reports[0] == evaluate(fit_pipeline(run, small_config().with_stages()), run.target_test)

    def test_reproducible_bytes(self, run):
        a = run_ablation(run, small_config())
        b = run_ablation(synthetic_run(SMALL, 0), small_config())
        assert a.to_json() == b.to_json() and a.to_csv() == b.to_csv()

    def test_csv_layout(self, run):
        lines = run_ablation(run, small_config()).to_csv().splitlines()
        assert lines[0] == "label,accuracy,auc,eer,delta_accuracy"
        assert [l.split(",")[0] for l in lines[1:]] == list(RUNG_LABELS)
        assert lines[1].endswith(",")

    def test_needs_test_set(self, run):
        with pytest.raises(ValidationError):
            run_ablation(TransferRun(run.source, run.target_unlabeled), small_config())

    @pytest.mark.slow
    def test_coral_rung_helps_on_second_order_shift(self):
        spec = SyntheticShiftSpec(n_source=1000, n_target=1000, rotation_strength=0.8,
                                  translation_strength=0.0, skew_strength=0.0)
        wins = 0
        for seed in range(10):
            rep = run_ablation(synthetic_run(spec, seed), PipelineConfig(seed=seed))
            wins += rep.deltas("accuracy")[-1] > 0
        assert wins >= 9


class TestMultiSeed:
    def test_shape_and_summary(self):
        rep = multi_seed_run(lambda s: synthetic_run(SMALL, s), small_config(), range(4))
        assert rep.seeds == (0, 1, 2, 3) and len(rep.baseline_accuracy) == 4
        d = rep.to_dict()
        full = [r["full_accuracy"] for r in d["rows"]]
        assert d["summary"]["full"]["mean"] == pytest.approx(np.mean(full), abs=1e-15)
        assert d["summary"]["full"]["sd"] == pytest.approx(np.std(full, ddof=1), abs=1e-15)
        assert d["ttest"]["degrees_freedom"] == 3

    def test_seed_order_does_not_matter(self):
        a = multi_seed_run(lambda s: synthetic_run(SMALL, s), small_config(), [2, 0, 1])
        b = multi_seed_run(lambda s: synthetic_run(SMALL, s), small_config(), [0, 1, 2])
        assert a.to_json() == b.to_json()

    def test_constant_summary(self):
        rep = MultiSeedReport((0, 1, 2), (0.5, 0.5, 0.5), (0.7, 0.8, 0.9))
        assert rep.summary()["baseline"]["sd"] == 0.0

    def test_seed_validation(self):
        with pytest.raises(DuplicateSeedError):
            multi_seed_run(lambda s: None, small_config(), [3, 3])
        with pytest.raises(ValidationError):
            multi_seed_run(lambda s: None, small_config(), [3])

    def test_ablation_table(self):
        table, tests = multi_seed_ablation(lambda s: synthetic_run(SMALL, s), small_config(), [0, 1, 2])
        assert table.shape == (3, 5) and len(tests) == 4

    def test_split_run_protocol(self):
        source, target = generate_synthetic_domains(SMALL)
        r = split_run(source, target, 0)
        assert r.source.n == 240 and r.target_unlabeled.shape[0] == 240 and r.target_test.n == 60
        test_ids = set(r.target_test.ids)
        assert r.target_unlabeled.shape[0] + len(test_ids) == target.n
        rt = split_run(source, target, 0, transductive=True)
        assert rt.target_unlabeled.shape[0] == 300
