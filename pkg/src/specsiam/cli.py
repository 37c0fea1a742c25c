"""Command-line surface: every pipeline stage as a subcommand.

Artifacts land under --out (default from SPECSIAM_OUT, else ./runs), each run
leaving a run_manifest.json with the fully resolved configuration so results
can be reproduced from the manifest alone. Progress goes to stderr, machine
artifacts to files. Exit codes: 0 success, 1 usage, 2 data error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import classify as classify_mod
from . import evaluate
from .bayesopt import write_trace_csv
from .classify import ClassifierKind, ClassifierSpec, LabeledFeatures
from .errors import DataError, NumericalError
from .evaluate import MetricsReport, PipelineConfig
from .pairing import balance_pairs, build_pairs, stats_from_labels
from .siamese import NetConfig, extract_features, init_model, load_checkpoint, save_checkpoint, train
from .signals import Label, generate_synthetic_cohort, load_dataset, read_manifest, save_dataset
from .spectral import StftConfig, WindowFn, compute_images, export_image_csv, export_image_pgm

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _out_dir(args) -> Path:
    root = args.out or os.environ.get("SPECSIAM_OUT") or "runs"
    out = Path(root)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_file_config(args) -> dict:
    if not getattr(args, "config", None):
        return {}
    path = Path(args.config)
    if not path.is_file():
        raise DataError(f"config file not found: {path}")
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise DataError(f"config file {path} must hold a JSON object")
    return cfg


def _resolve(args, file_cfg: dict, defaults: dict) -> dict:
    """defaults <- config file <- explicitly passed flags."""
    resolved = dict(defaults)
    for key in defaults:
        if key in file_cfg:
            resolved[key] = file_cfg[key]
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            resolved[key] = cli_value
    return resolved


def _write_run_manifest(out: Path, command: str, resolved: dict) -> None:
    payload = {"command": command, "resolved": resolved}
    (out / "run_manifest.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _stft_defaults() -> dict:
    cfg = StftConfig()
    return {
        "window_s": cfg.window_s,
        "hop_s": cfg.hop_s,
        "window_fn": cfg.window_fn.value,
        "upper_value": cfg.upper_value,
    }


def _net_defaults() -> dict:
    cfg = NetConfig()
    return {
        "kernel_size": cfg.kernel_size,
        "conv1_filters": cfg.conv1_filters,
        "conv2_filters": cfg.conv2_filters,
        "output_dim": cfg.output_dim,
        "l1_lambda": cfg.l1_lambda,
        "margin": cfg.margin,
        "learning_rate": cfg.learning_rate,
        "dropout_p": cfg.dropout_p,
        "epochs": cfg.epochs,
        "pooling": cfg.pooling,
        "distance": cfg.distance,
    }


def _stft_from(resolved: dict) -> StftConfig:
    return StftConfig(
        window_s=float(resolved["window_s"]),
        hop_s=float(resolved["hop_s"]),
        window_fn=WindowFn(resolved["window_fn"]),
        upper_value=float(resolved["upper_value"]),
    )


def _net_from(resolved: dict, seed: int) -> NetConfig:
    return NetConfig(
        kernel_size=int(resolved["kernel_size"]),
        conv1_filters=int(resolved["conv1_filters"]),
        conv2_filters=int(resolved["conv2_filters"]),
        output_dim=int(resolved["output_dim"]),
        l1_lambda=float(resolved["l1_lambda"]),
        margin=float(resolved["margin"]),
        learning_rate=float(resolved["learning_rate"]),
        dropout_p=float(resolved["dropout_p"]),
        epochs=int(resolved["epochs"]),
        pooling=str(resolved["pooling"]),
        distance=str(resolved["distance"]),
        seed=seed,
    )


def _add_stft_flags(parser) -> None:
    parser.add_argument("--window-s", dest="window_s", type=float)
    parser.add_argument("--hop-s", dest="hop_s", type=float)
    parser.add_argument("--window-fn", dest="window_fn", choices=["rectangular", "hann"])
    parser.add_argument("--upper-value", dest="upper_value", type=float)


def _add_net_flags(parser) -> None:
    parser.add_argument("--kernel-size", dest="kernel_size", type=int)
    parser.add_argument("--conv1-filters", dest="conv1_filters", type=int)
    parser.add_argument("--conv2-filters", dest="conv2_filters", type=int)
    parser.add_argument("--output-dim", dest="output_dim", type=int)
    parser.add_argument("--l1-lambda", dest="l1_lambda", type=float)
    parser.add_argument("--margin", dest="margin", type=float)
    parser.add_argument("--learning-rate", dest="learning_rate", type=float)
    parser.add_argument("--dropout-p", dest="dropout_p", type=float)
    parser.add_argument("--epochs", dest="epochs", type=int)
    parser.add_argument("--pooling", dest="pooling", choices=["none", "max2x2"])
    parser.add_argument("--distance", dest="distance", choices=["cosine", "euclidean"])


def _add_clf_flags(parser) -> None:
    parser.add_argument("--knn-k", dest="knn_k", type=int)
    parser.add_argument("--svm-kernel", dest="svm_kernel", choices=["linear", "rbf"])
    parser.add_argument("--svm-c", dest="svm_c", type=float)
    parser.add_argument("--svm-gamma", dest="svm_gamma", type=float)
    parser.add_argument("--rf-estimators", dest="rf_estimators", type=int)
    parser.add_argument("--xgb-depth", dest="xgb_depth", type=int)
    parser.add_argument("--xgb-learning-rate", dest="xgb_learning_rate", type=float)
    parser.add_argument("--xgb-estimators", dest="xgb_estimators", type=int)


def _clf_params_from_args(args, kind: ClassifierKind) -> dict | None:
    base = dict(classify_mod.default_spec(kind).params)
    overrides = {
        ClassifierKind.KNN: {"k": args.knn_k},
        ClassifierKind.NB: {},
        ClassifierKind.SVM: {"kernel": args.svm_kernel, "c": args.svm_c, "gamma": args.svm_gamma},
        ClassifierKind.RF: {"n_estimators": args.rf_estimators},
        ClassifierKind.XGB: {
            "max_depth": args.xgb_depth,
            "learning_rate": args.xgb_learning_rate,
            "n_estimators": args.xgb_estimators,
        },
    }[kind]
    touched = False
    for key, value in overrides.items():
        if value is not None:
            base[key] = value
            touched = True
    return base if touched else None


def build_parser() -> _Parser:
    parser = _Parser(prog="specsiam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic cohort", parents=[], add_help=True)
    p.add_argument("--cases", type=int)
    p.add_argument("--controls", type=int)
    p.add_argument("--channels", type=int)
    p.add_argument("--duration-s", dest="duration_s", type=float)
    p.add_argument("--rate", dest="sample_rate_hz", type=float)
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--out")

    p = sub.add_parser("stft", help="export spectral images for a cohort")
    p.add_argument("--manifest", required=True)
    _add_stft_flags(p)
    p.add_argument("--pgm", action="store_true", help="also write PGM previews")
    p.add_argument("--config")
    p.add_argument("--out")

    p = sub.add_parser("pairs", help="pairwise dataset utilities")
    p.add_argument("action", choices=["stats"])
    p.add_argument("--manifest", required=True)
    p.add_argument("--out")

    p = sub.add_parser("tune-snn", help="Bayesian-optimize network hyperparameters")
    p.add_argument("--manifest", required=True)
    p.add_argument("--init", type=int, default=5)
    p.add_argument("--budget", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--tuning-epochs", dest="tuning_epochs", type=int)
    _add_stft_flags(p)
    _add_net_flags(p)
    p.add_argument("--config")
    p.add_argument("--out")

    p = sub.add_parser("train-snn", help="train the network on all pairs")
    p.add_argument("--manifest", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--balance", action="store_true")
    _add_stft_flags(p)
    _add_net_flags(p)
    p.add_argument("--config")
    p.add_argument("--out")

    p = sub.add_parser("extract", help="extract per-(subject, channel) features")
    p.add_argument("--manifest", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--checkpoint", help="trained network checkpoint")
    group.add_argument("--fft", action="store_true", help="baseline spectrum features")
    p.add_argument("--max-freq-hz", dest="max_freq_hz", type=float, default=30.0)
    _add_stft_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("tune-clf", help="Bayesian-optimize a classifier")
    p.add_argument("--features", required=True)
    p.add_argument("--model", required=True, choices=[k.value for k in ClassifierKind])
    p.add_argument("--init", type=int, default=5)
    p.add_argument("--budget", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out")

    p = sub.add_parser("classify", help="fit a classifier on a feature table")
    p.add_argument("--features", required=True)
    p.add_argument("--model", required=True, choices=[k.value for k in ClassifierKind])
    p.add_argument("--predict", help="feature table to label with the fitted model")
    p.add_argument("--seed", type=int, default=0)
    _add_clf_flags(p)
    p.add_argument("--out")

    p = sub.add_parser("loocv", help="leave-one-subject-out evaluation")
    p.add_argument("--manifest", required=True)
    p.add_argument("--pipeline", required=True, choices=list(evaluate.PIPELINES))
    p.add_argument("--mode", choices=["paper", "strict"], default="paper")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--max-freq-hz", dest="max_freq_hz", type=float, default=30.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clf-init", dest="clf_init", type=int)
    p.add_argument("--clf-acq", dest="clf_acq", type=int)
    p.add_argument("--tuning-k", dest="tuning_k", type=int, default=5)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--balance", action="store_true")
    _add_stft_flags(p)
    _add_net_flags(p)
    _add_clf_flags(p)
    p.add_argument("--config")
    p.add_argument("--out")

    p = sub.add_parser("run", help="tuning, training, extraction and LOOCV in one go")
    p.add_argument("--manifest", required=True)
    p.add_argument("--pipeline", required=True, choices=list(evaluate.PIPELINES))
    p.add_argument("--mode", choices=["paper", "strict"], default="paper")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--max-freq-hz", dest="max_freq_hz", type=float, default=30.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-tune", dest="no_tune", action="store_true")
    p.add_argument("--snn-init", dest="snn_init", type=int, default=5)
    p.add_argument("--snn-acq", dest="snn_acq", type=int, default=50)
    p.add_argument("--clf-init", dest="clf_init", type=int, default=5)
    p.add_argument("--clf-acq", dest="clf_acq", type=int, default=10)
    p.add_argument("--tuning-k", dest="tuning_k", type=int, default=5)
    p.add_argument("--tuning-epochs", dest="tuning_epochs", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--balance", action="store_true")
    _add_stft_flags(p)
    _add_net_flags(p)
    _add_clf_flags(p)
    p.add_argument("--config")
    p.add_argument("--out")

    p = sub.add_parser("report", help="render report JSON files as a table")
    p.add_argument("reports", nargs="+")

    return parser


# ---------------------------------------------------------------------------
# handlers

def _cmd_synth(args) -> int:
    out = _out_dir(args)
    file_cfg = _load_file_config(args)
    resolved = _resolve(
        args,
        file_cfg,
        {
            "cases": 4,
            "controls": 4,
            "channels": 2,
            "duration_s": 30.0,
            "sample_rate_hz": 64.0,
            "noise_sigma": 0.5,
            "seed": 0,
        },
    )
    dataset = generate_synthetic_cohort(
        n_case=int(resolved["cases"]),
        n_control=int(resolved["controls"]),
        m_channels=int(resolved["channels"]),
        duration_s=float(resolved["duration_s"]),
        sample_rate_hz=float(resolved["sample_rate_hz"]),
        noise_sigma=float(resolved["noise_sigma"]),
        seed=int(resolved["seed"]),
    )
    manifest = save_dataset(dataset, out)
    _write_run_manifest(out, "synth", resolved)
    _log(f"synth: wrote {dataset.n_subjects} subjects under {out}")
    print(manifest)
    return 0


def _cmd_stft(args) -> int:
    out = _out_dir(args)
    file_cfg = _load_file_config(args)
    resolved = _resolve(args, file_cfg, _stft_defaults())
    config = _stft_from(resolved)
    dataset = load_dataset(args.manifest)
    images = compute_images(dataset, config)
    img_dir = out / "images"
    img_dir.mkdir(exist_ok=True)
    for (sid, ch), image in sorted(images.items()):
        stem = img_dir / f"{sid}_ch{ch:02d}"
        export_image_csv(image, stem.with_suffix(".csv"))
        if args.pgm:
            export_image_pgm(image, stem.with_suffix(".pgm"))
    _write_run_manifest(out, "stft", resolved)
    _log(f"stft: wrote {len(images)} images under {img_dir}")
    return 0


def _cmd_pairs(args) -> int:
    entries = read_manifest(args.manifest)
    labels = {e["subject_id"]: Label(e["label"]) for e in entries}
    first_csv = Path(entries[0]["path"])
    if not first_csv.is_absolute():
        first_csv = Path(args.manifest).parent / first_csv
    if not first_csv.is_file():
        raise DataError(f"signal file missing for subject '{entries[0]['subject_id']}': {first_csv}")
    with open(first_csv, encoding="utf-8") as fh:
        header = fh.readline().strip()
    n_channels = len(header.split(",")) if header else 0
    if n_channels < 1:
        raise DataError(f"no channel header in {first_csv}")
    stats = stats_from_labels(labels, n_channels)
    n_case = sum(1 for v in labels.values() if v is Label.CASE)
    print(f"subjects: {len(labels)} (case {n_case} / control {len(labels) - n_case})")
    print(f"channels: {n_channels}")
    print(f"total_pairs: {stats['total']}")
    print(f"neighbors: {stats['neighbors']}")
    print(f"non_neighbors: {stats['non_neighbors']}")
    print(f"case_case: {stats['case_case']}")
    print(f"control_control: {stats['control_control']}")
    print(f"case_control: {stats['case_control']}")
    if args.out:
        out = _out_dir(args)
        _write_run_manifest(out, "pairs", {"manifest": str(args.manifest)})
    return 0


def _cmd_tune_snn(args) -> int:
    out = _out_dir(args)
    file_cfg = _load_file_config(args)
    resolved = _resolve(args, file_cfg, {**_stft_defaults(), **_net_defaults()})
    dataset = load_dataset(args.manifest)
    config = PipelineConfig(
        stft=_stft_from(resolved),
        net=_net_from(resolved, seed=args.seed),
        tau=args.tau,
        tuning_k=args.k,
        tuning_epochs=args.tuning_epochs,
    )
    _log(f"tune-snn: budget {args.init}+{args.budget}, k={args.k}")
    stft, net, state = evaluate.tune_snn(
        dataset, config, n_init=args.init, n_acquisitions=args.budget, seed=args.seed
    )
    write_trace_csv(state, out / "snn_bo_trace.csv")
    best = {
        "best_objective": state.best_value,
        "stft": {
            "window_s": stft.window_s,
            "hop_s": stft.hop_s,
            "window_fn": stft.window_fn.value,
            "upper_value": stft.upper_value,
        },
        "net": {
            "kernel_size": net.kernel_size,
            "conv1_filters": net.conv1_filters,
            "conv2_filters": net.conv2_filters,
            "output_dim": net.output_dim,
            "l1_lambda": net.l1_lambda,
            "margin": net.margin,
            "learning_rate": net.learning_rate,
            "dropout_p": net.dropout_p,
            "epochs": net.epochs,
            "pooling": net.pooling,
            "distance": net.distance,
        },
    }
    (out / "best_config.json").write_text(json.dumps(best, indent=2, sort_keys=True) + "\n")
    _write_run_manifest(out, "tune-snn", {**resolved, "seed": args.seed, "best": best})
    _log(f"tune-snn: best objective {state.best_value:.4f}")
    return 0


def _cmd_train_snn(args) -> int:
    out = _out_dir(args)
    file_cfg = _load_file_config(args)
    resolved = _resolve(args, file_cfg, {**_stft_defaults(), **_net_defaults()})
    dataset = load_dataset(args.manifest)
    stft = _stft_from(resolved)
    net = _net_from(resolved, seed=args.seed)
    images = compute_images(dataset, stft)
    pairs = build_pairs(dataset, images)
    if args.balance:
        pairs = balance_pairs(pairs, dataset.n_channels, seed=args.seed)
    shape = next(iter(images.values())).magnitudes.shape
    model = init_model(net, shape)
    t0 = time.time()
    model, trace = train(model, pairs, images)
    _log(f"train-snn: {len(pairs)} pairs, {net.epochs} epochs in {time.time() - t0:.1f}s")
    save_checkpoint(model, out / "checkpoint.json")
    with open(out / "loss_trace.csv", "w", newline="", encoding="utf-8") as fh:
        import csv as _csv

        writer = _csv.writer(fh)
        writer.writerow(["epoch", "mean_loss"])
        for epoch, loss in enumerate(trace):
            writer.writerow([epoch, repr(float(loss))])
    _write_run_manifest(out, "train-snn", {**resolved, "seed": args.seed, "balance": args.balance})
    _log(f"train-snn: final epoch loss {trace[-1]:.6f}")
    return 0


def _cmd_extract(args) -> int:
    out = _out_dir(args)
    dataset = load_dataset(args.manifest)
    if args.fft:
        table = evaluate.fft_feature_table(dataset, args.max_freq_hz)
        resolved: dict = {"fft": True, "max_freq_hz": args.max_freq_hz}
    else:
        model = load_checkpoint(args.checkpoint)
        stft_resolved = _resolve(args, {}, _stft_defaults())
        stft = _stft_from(stft_resolved)
        images = compute_images(dataset, stft)
        table = extract_features(model, dataset, images)
        resolved = {"checkpoint": str(args.checkpoint), **stft_resolved}
    table.to_csv(out / "features.csv")
    _write_run_manifest(out, "extract", resolved)
    _log(f"extract: wrote {table.n_rows} rows x {table.n_features} features")
    return 0


def _cmd_tune_clf(args) -> int:
    out = _out_dir(args)
    table = LabeledFeatures.from_csv(args.features)
    kind = ClassifierKind(args.model)
    spec, state = evaluate.tune_classifier(
        table, kind, n_init=args.init, n_acquisitions=args.budget, seed=args.seed, k=args.k
    )
    write_trace_csv(state, out / "clf_bo_trace.csv")
    best = {"model": kind.value, "params": spec.params, "best_objective": state.best_value}
    (out / "best_spec.json").write_text(json.dumps(best, indent=2, sort_keys=True) + "\n")
    _write_run_manifest(
        out,
        "tune-clf",
        {"features": str(args.features), "model": kind.value, "init": args.init,
         "budget": args.budget, "seed": args.seed, "k": args.k, "best": best},
    )
    _log(f"tune-clf: best objective {state.best_value:.4f} with {spec.params}")
    return 0


def _cmd_classify(args) -> int:
    out = _out_dir(args)
    table = LabeledFeatures.from_csv(args.features)
    kind = ClassifierKind(args.model)
    params = _clf_params_from_args(args, kind)
    spec = ClassifierSpec(kind, params if params is not None else classify_mod.default_spec(kind).params)
    model = classify_mod.fit(spec, table, seed=args.seed)
    payload = {"spec": {"model": kind.value, "params": spec.params}, "fitted": classify_mod.model_to_dict(model)}
    (out / "model.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    resolved = {"features": str(args.features), "model": kind.value, "params": spec.params, "seed": args.seed}
    if args.predict:
        target = LabeledFeatures.from_csv(args.predict)
        preds = classify_mod.predict(model, target.x)
        import csv as _csv

        with open(out / "predictions.csv", "w", newline="", encoding="utf-8") as fh:
            writer = _csv.writer(fh)
            writer.writerow(["subject_id", "channel", "prediction"])
            for i in range(target.n_rows):
                writer.writerow(
                    [target.subject_ids[i], target.channels[i], "case" if preds[i] == 1 else "control"]
                )
        resolved["predict"] = str(args.predict)
        accuracy = float((preds == target.y).mean())
        _log(f"classify: accuracy on --predict table {accuracy:.4f}")
    _write_run_manifest(out, "classify", resolved)
    return 0


def _pipeline_config_from_args(args) -> PipelineConfig:
    file_cfg = _load_file_config(args)
    resolved = _resolve(args, file_cfg, {**_stft_defaults(), **_net_defaults()})
    _, clf_kind = evaluate.parse_pipeline(args.pipeline)
    clf_params = _clf_params_from_args(args, clf_kind)
    clf_budget = None
    if getattr(args, "clf_init", None) is not None and getattr(args, "clf_acq", None) is not None:
        clf_budget = (args.clf_init, args.clf_acq)
    return PipelineConfig(
        stft=_stft_from(resolved),
        net=_net_from(resolved, seed=args.seed),
        max_freq_hz=args.max_freq_hz,
        mode=args.mode,
        tau=args.tau,
        clf_params=clf_params,
        clf_budget=clf_budget,
        tuning_epochs=getattr(args, "tuning_epochs", None),
        tuning_k=args.tuning_k,
        balance=args.balance,
        jobs=args.jobs,
    )


def _persist_report(out: Path, report: MetricsReport) -> None:
    (out / "report.json").write_text(evaluate.report_to_json(report), encoding="utf-8")
    (out / "report.txt").write_text(evaluate.report_table([report]) + "\n", encoding="utf-8")
    evaluate.write_fold_csv(report, out / "folds.csv")


def _cmd_loocv(args) -> int:
    out = _out_dir(args)
    dataset = load_dataset(args.manifest)
    config = _pipeline_config_from_args(args)
    _log(f"loocv: {args.pipeline} over {dataset.n_subjects} subjects")
    report = evaluate.loocv(dataset, args.pipeline, config, seed=args.seed)
    _persist_report(out, report)
    _write_run_manifest(
        out,
        "loocv",
        {"pipeline": args.pipeline, "seed": args.seed,
         "config": evaluate._config_to_dict(args.pipeline, config, args.seed)},
    )
    mean, std = report.channel["accuracy"]
    _log(f"loocv: channel accuracy {mean:.3f} +/- {std:.3f}")
    return 0


def _cmd_run(args) -> int:
    out = _out_dir(args)
    dataset = load_dataset(args.manifest)
    config = _pipeline_config_from_args(args)
    if args.no_tune:
        config = replace(config, snn_budget=None, clf_budget=None)
    else:
        config = replace(config, snn_budget=(args.snn_init, args.snn_acq))
    _log(f"run: {args.pipeline} (mode={config.mode}, tuning={'off' if args.no_tune else 'on'})")
    report, artifacts = evaluate.run_pipeline(
        args.pipeline, dataset, config, seed=args.seed, out_dir=out
    )
    pipeline_cfg = json.loads((out / "pipeline_config.json").read_text(encoding="utf-8"))
    _write_run_manifest(
        out,
        "run",
        {"pipeline": args.pipeline, "seed": args.seed, "config": pipeline_cfg,
         "artifacts": sorted(artifacts)},
    )
    mean, std = report.channel["accuracy"]
    _log(f"run: channel accuracy {mean:.3f} +/- {std:.3f}")
    return 0


def _cmd_report(args) -> int:
    reports = []
    for path in args.reports:
        p = Path(path)
        if not p.is_file():
            raise DataError(f"report not found: {p}")
        payload = json.loads(p.read_text(encoding="utf-8"))
        channel = {
            key: (block["mean"], block["std"])
            for key, block in payload["channel_level"].items()
        }
        subject = {
            key: (block["mean"], block["std"])
            for key, block in payload["subject_level"].items()
        }
        reports.append(
            MetricsReport(
                pipeline_id=payload["pipeline"],
                n_folds=payload["n_folds"],
                channel=channel,
                subject=subject,
                ties=payload.get("majority_ties", 0),
                warnings=payload.get("warnings", []),
                folds=[],
            )
        )
    print(evaluate.report_table(reports))
    return 0


_HANDLERS = {
    "synth": _cmd_synth,
    "stft": _cmd_stft,
    "pairs": _cmd_pairs,
    "tune-snn": _cmd_tune_snn,
    "train-snn": _cmd_train_snn,
    "extract": _cmd_extract,
    "tune-clf": _cmd_tune_clf,
    "classify": _cmd_classify,
    "loocv": _cmd_loocv,
    "run": _cmd_run,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        _log(f"error: {exc}")
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except DataError as exc:
        _log(f"error [{args.command}]: {exc}")
        return 2
    except NumericalError as exc:
        _log(f"numerical failure [{args.command}]: {exc}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
