"""Command-line interface: split, synth, fit, eval, ablate, multiseed.

Exit codes: 0 success, 1 I/O error, 2 validation error, 3 numerical failure.
Outputs are rendered completely before the first file is written, so a
failing command leaves no partial files behind.
"""

import argparse
import json
import logging
import os
import sys
import warnings
from dataclasses import fields

from .dataset import (
    SplitSpec,
    SyntheticShiftSpec,
    format_csv,
    generate_synthetic_domains,
    read_embeddings_csv,
    stratified_split,
)
from .errors import NumericalError, StageError, ValidationError
from .pipeline import (
    FittedPipeline,
    PipelineConfig,
    TransferRun,
    evaluate,
    fit_pipeline,
    multi_seed_run,
    run_ablation,
    split_run,
)

EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("udapipe")

_CONFIG_HELP = {
    "enable_power": "Yeo-Johnson power transform + standardization",
    "enable_select": "ANOVA F-test feature selection",
    "enable_pca": "joint source+target PCA",
    "enable_coral": "CORAL covariance alignment",
    "k_select": "features kept by ANOVA selection",
    "n_components": "joint PCA components",
    "coral_lambda": "ridge added to both covariances before factorization",
    "coral_literal_formula": "use A = L_s^-1 L_t instead of the covariance-matching map",
    "coral_align_means": "re-center aligned source rows at the target mean",
    "power_fit_domain": "rows used to fit the power transform",
    "logreg_c": "inverse L2 regularization strength",
    "threshold": "decision threshold on P(deepfake)",
    "seed": "random seed",
}


def _add_config_flags(parser):
    group = parser.add_argument_group("pipeline configuration")
    defaults = PipelineConfig()
    for f in fields(PipelineConfig):
        default = getattr(defaults, f.name)
        name = f.name[len("enable_"):] if f.name.startswith("enable_") else f.name
        flag = "--" + name.replace("_", "-")
        kwargs = {"dest": f.name, "default": default, "help": _CONFIG_HELP[f.name]}
        if isinstance(default, bool):
            group.add_argument(flag, action=argparse.BooleanOptionalAction, **kwargs)
        elif f.name == "power_fit_domain":
            group.add_argument(flag, choices=("source_only", "joint"), **kwargs)
        else:
            group.add_argument(flag, type=type(default), **kwargs)


def _config_from_args(args):
    values = {f.name: getattr(args, f.name) for f in fields(PipelineConfig)}
    return PipelineConfig(**values)


def parse_seeds(text):
    """``"0..9"``, ``"1,3,5"`` or mixtures such as ``"0..3,7"``."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        try:
            if ".." in part:
                lo, hi = part.split("..")
                seeds.extend(range(int(lo), int(hi) + 1))
            else:
                seeds.append(int(part))
        except ValueError:
            raise ValidationError(f"cannot parse seed list {text!r}") from None
    return seeds


def _sibling_csv(path):
    root, ext = os.path.splitext(path)
    return (root if ext.lower() == ".json" else path) + ".csv"


def _write_all(outputs):
    for path, text in outputs:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        log.info("wrote %s", path)


# --- subcommands --------------------------------------------------------------------


def cmd_split(args):
    spec = SplitSpec(args.ratio, args.seed)
    ds = read_embeddings_csv(args.input, require_labels=True)
    train, test = stratified_split(ds, spec)
    _write_all([(args.train_out, format_csv(train)), (args.test_out, format_csv(test))])
    print(f"split {ds.n} rows -> {train.n} train / {test.n} test (seed {args.seed})")


def cmd_synth(args):
    with open(args.spec, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.spec}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ValidationError("synthetic spec must be a JSON object")
    try:
        spec = SyntheticShiftSpec.from_dict(raw)
    except TypeError as exc:
        raise ValidationError(str(exc)) from None
    split = SplitSpec(args.adapt_fraction, spec.seed)
    source, target = generate_synthetic_domains(spec)
    adapt, test = stratified_split(target, split)
    _write_all(
        [
            (args.source_out, format_csv(source)),
            (args.target_train_out, format_csv(adapt.without_labels())),
            (args.target_test_out, format_csv(test)),
        ]
    )
    print(f"source {source.n} rows, target adaptation {adapt.n} rows (unlabeled), target test {test.n} rows")


def cmd_fit(args):
    config = _config_from_args(args)
    source = read_embeddings_csv(args.source, require_labels=True)
    target = read_embeddings_csv(args.target).features  # labels, if any, are dropped here
    fp = fit_pipeline(TransferRun(source, target), config)
    _write_all([(args.model_out, fp.to_json())])
    chain = " -> ".join(str(d) for d in fp.dims())
    print(f"stages: {', '.join(fp.stages) or 'none'}; dims {chain}; classifier converged={fp.model.converged}")


def cmd_eval(args):
    with open(args.model, encoding="utf-8") as fh:
        try:
            fp = FittedPipeline.from_json(fh.read())
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValidationError(f"{args.model}: malformed model file ({exc})") from None
    test = read_embeddings_csv(args.test, require_labels=True)
    report = evaluate(fp, test)
    _write_all([(args.report_out, json.dumps(report.to_dict(), indent=1) + "\n")])
    for key, value in report.to_dict().items():
        if isinstance(value, float):
            print(f"{key:>10}: {value:.4f}")


def cmd_ablate(args):
    config = _config_from_args(args)
    source = read_embeddings_csv(args.source, require_labels=True)
    target = read_embeddings_csv(args.target).features
    test = read_embeddings_csv(args.test, require_labels=True)
    report = run_ablation(TransferRun(source, target, test), config)
    _write_all([(args.report_out, report.to_json()), (_sibling_csv(args.report_out), report.to_csv())])
    deltas = report.deltas("accuracy")
    for label, rep, delta in zip(report.labels, report.reports, deltas):
        step = "--" if delta is None else f"{100 * delta:+.1f}"
        print(f"{label:<24} acc {100 * rep.accuracy:5.1f}  step {step}")
    gap = report.telescoping_gap()
    print(f"telescoping check: sum of steps vs total accuracy delta, |gap| = {gap:.1e}")


def cmd_multiseed(args):
    config = _config_from_args(args)
    seeds = parse_seeds(args.seeds)
    if len(seeds) < 2:
        raise ValidationError("multiseed needs at least 2 seeds")
    SplitSpec(args.train_fraction, 0)
    source = read_embeddings_csv(args.source, require_labels=True)
    target = read_embeddings_csv(args.target, require_labels=True)

    def make_run(seed):
        return split_run(source, target, seed, args.train_fraction, args.transductive)

    report = multi_seed_run(make_run, config, seeds)
    _write_all([(args.report_out, report.to_json())])
    summary = report.summary()
    t = report.ttest()
    print(f"baseline {summary['baseline']['mean']:.4f} +/- {summary['baseline']['sd']:.4f}")
    print(f"full     {summary['full']['mean']:.4f} +/- {summary['full']['sd']:.4f}")
    sig = ", ".join(f"p < {a}" for a in t.significant_at) or "not significant"
    print(f"paired t-test: t({t.degrees_freedom}) = {t.t_statistic:.3f} ({sig})")


# --- entry point ---------------------------------------------------------------------


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="udapipe", description=__doc__.splitlines()[0], formatter_class=fmt)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="stratified train/test split of a labeled CSV", formatter_class=fmt)
    p.add_argument("--input", required=True)
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    p.add_argument("--ratio", type=float, default=0.8, help="training fraction")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("synth", help="generate synthetic shifted domains", formatter_class=fmt)
    p.add_argument("--spec", required=True, help="JSON object with SyntheticShiftSpec fields")
    p.add_argument("--source-out", required=True)
    p.add_argument("--target-train-out", required=True, help="unlabeled target adaptation rows")
    p.add_argument("--target-test-out", required=True, help="labeled target test rows")
    p.add_argument("--adapt-fraction", type=float, default=0.8, help="share of target rows used for adaptation")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit the pipeline and write a model JSON", formatter_class=fmt)
    p.add_argument("--source", required=True, help="labeled source CSV")
    p.add_argument("--target", required=True, help="target CSV (labels ignored)")
    p.add_argument("--model-out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="evaluate a fitted model on a labeled test CSV", formatter_class=fmt)
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--report-out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="five-rung cumulative ablation", formatter_class=fmt)
    p.add_argument("--source", required=True, help="labeled source CSV")
    p.add_argument("--target", required=True, help="target adaptation CSV (labels ignored)")
    p.add_argument("--test", required=True, help="labeled target test CSV")
    p.add_argument("--report-out", required=True, help="JSON report; a .csv sibling is written too")
    _add_config_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("multiseed", help="baseline vs full pipeline over several seeds", formatter_class=fmt)
    p.add_argument("--source", required=True, help="labeled source CSV")
    p.add_argument("--target", required=True, help="labeled target CSV, re-split per seed")
    p.add_argument("--seeds", default="0..9", help="seed list, e.g. 0..9 or 1,2,5")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--transductive", action="store_true", help="adapt on the whole target, test rows included")
    p.add_argument("--report-out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_multiseed)
    return parser


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    previous = warnings.showwarning
    warnings.showwarning = _show_warning
    try:
        args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL if exc.numerical else EXIT_VALIDATION
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    finally:
        warnings.showwarning = previous
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
