"""Command-line surface: gen, fetch, train, predict, eval, cv, compare, plot.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime/numeric error.
Option precedence is CLI flag > config file > built-in default; the config
file is flat ``key = value`` text with ``#`` comments.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import data as data_mod
from .data import (
    Dataset,
    fetch_pmlb,
    gen_linear_separable,
    gen_madelon_like,
    gen_rotated_xor,
    load_table,
    stratified_kfold,
)
from .ensemble import (
    NREModel,
    TrainConfig,
    evaluate,
    load_model,
    nre_score_batch,
    nre_train,
    save_model,
)
from .errors import DataError, ModelFormatError, UsageError
from .neural import forward_batch
from .plotting import data_bounds, render_decision_regions
from .stats import (
    format_comparison_report,
    read_comparison_csv,
    sign_test,
    wilcoxon_signed_rank,
)

CACHE_DIR_ENV = "NRE_CACHE_DIR"


@dataclass
class EvalReport:
    """Cross-validation summary: per-fold test errors plus aggregates."""

    fold_errors: list[float]
    mean: float
    std: float
    wall_time_s: float
    config: dict

    def to_dict(self) -> dict:
        return asdict(self)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise DataError(f"config file not found: {path}")
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line:
                key, _, value = line.partition("=")
            else:
                key, _, value = line.partition(" ")
            key = key.strip().replace("-", "_")
            value = value.strip()
            if not key or not value:
                raise DataError(f"bad config line {lineno}: {line!r}")
            out[key] = value
    return out


def _parse_bool(s: str) -> bool:
    if s.lower() in ("1", "true", "yes", "on"):
        return True
    if s.lower() in ("0", "false", "no", "off"):
        return False
    raise DataError(f"not a boolean: {s!r}")


_CONFIG_CASTS = {
    "max_depth": int,
    "min_leaf": int,
    "deep": _parse_bool,
    "epochs": int,
    "batch_size": int,
    "learning_rate": float,
    "l2": float,
    "seed": int,
    "max_rules": int,
    "early_stop_patience": int,
}


def _train_config(args, config: dict) -> TrainConfig:
    kwargs = {}
    for key, cast in _CONFIG_CASTS.items():
        value = getattr(args, key, None)
        if value is None and key in config:
            value = cast(config[key])
        if value is not None:
            kwargs[key] = value
    try:
        return TrainConfig(**kwargs)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _add_train_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--min-leaf", dest="min_leaf", type=int)
    p.add_argument("--deep", dest="deep", action="store_const", const=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--l2", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-rules", dest="max_rules", type=int)
    p.add_argument("--early-stop-patience", dest="early_stop_patience", type=int)


def _add_data_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--label-column", default="label")
    p.add_argument("--positive-label", default=None)


def _load_dataset(args) -> Dataset:
    label = args.label_column
    if isinstance(label, str) and label.lstrip("-").isdigit():
        label = int(label)
    return load_table(args.data, label_column=label, positive_label=args.positive_label)


def _write_dataset_csv(d: Dataset, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(list(d.feature_names) + ["label"]) + "\n")
        for row, lab in zip(d.features, d.labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",{int(lab)}\n")


def _checkpoint_path(model_path: str, iteration: int) -> str:
    stem, ext = os.path.splitext(model_path)
    return f"{stem}.iter{iteration}{ext or '.json'}"


def cmd_gen(args) -> int:
    seed = args.seed if args.seed is not None else 0
    meta = {"kind": args.kind, "seed": seed}
    if args.kind == "xor":
        n = args.n or 4000
        dataset = gen_rotated_xor(n, args.angle, args.noise_std, seed)
        meta.update(n=n, angle_deg=args.angle, noise_std=args.noise_std)
    elif args.kind == "linear":
        n = args.n or 2000
        dataset = gen_linear_separable(n, args.angle, args.margin, seed)
        meta.update(n=n, angle_deg=args.angle, margin=args.margin)
    elif args.kind == "madelon":
        n = args.n or 2600
        dataset, origin_map = gen_madelon_like(
            n, args.informative, args.redundant, args.distractors, seed
        )
        meta.update(
            n=n,
            informative=args.informative,
            redundant=args.redundant,
            distractors=args.distractors,
            origin_map=[list(o) for o in origin_map],
        )
    else:  # argparse choices make this unreachable
        raise UsageError(f"unknown kind {args.kind!r}")
    _write_dataset_csv(dataset, args.out)
    meta.update(n_rows=dataset.n_samples, n_features=dataset.n_features)
    with open(args.out + ".meta.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    print(f"wrote {dataset.n_samples} rows x {dataset.n_features} features to {args.out}")
    return 0


def cmd_fetch(args) -> int:
    config_file = _read_config_file(args.config) if args.config else {}
    base_url = args.base_url or config_file.get("pmlb_base_url")
    cache_dir = (
        args.cache_dir
        or config_file.get("cache_dir")
        or os.environ.get(
            CACHE_DIR_ENV, os.path.join(os.path.expanduser("~"), ".cache", "nre-pmlb")
        )
    )
    dataset = fetch_pmlb(args.name, cache_dir, base_url=base_url)
    print(f"{args.name}: N={dataset.n_samples}, p={dataset.n_features}")
    if args.out:
        _write_dataset_csv(dataset, args.out)
        print(f"wrote {args.out}")
    return 0


def cmd_train(args) -> int:
    config_file = _read_config_file(args.config) if args.config else {}
    cfg = _train_config(args, config_file)
    dataset = _load_dataset(args)
    checkpoints = set()
    if args.checkpoint_at:
        checkpoints = {int(s) for s in args.checkpoint_at.split(",") if s.strip()}

    def trace(stage, payload):
        if stage == "train_epoch" and payload["epoch"] in checkpoints:
            save_model(payload["model"], _checkpoint_path(args.out, payload["epoch"]))

    model = nre_train(dataset, cfg, trace=trace if checkpoints else None)
    save_model(model, args.out)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write("epoch,loss,error\n")
            for epoch, loss, err in model.history:
                fh.write(f"{epoch},{repr(loss)},{repr(err)}\n")
    final_err = model.history[-1][2] if model.history else float("nan")
    print(
        f"trained {len(model.rules)} rules (deep={cfg.deep}) in {len(model.history) - 1} epochs; "
        f"training error {100 * final_err:.2f}%"
    )
    if model.degenerate:
        print("warning: tree degenerated to a single leaf; model is constant")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    dataset = _load_dataset(args)
    scores = nre_score_batch(model, dataset.features)
    preds = np.where(scores >= 0.0, 1, -1)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("score,prediction\n")
        for s, p in zip(scores, preds):
            fh.write(f"{repr(float(s))},{int(p)}\n")
    print(f"wrote {len(preds)} predictions to {args.out}")
    return 0


def cmd_eval(args) -> int:
    model = load_model(args.model)
    dataset = _load_dataset(args)
    err = evaluate(model, dataset)
    print(f"error: {100 * err:.2f}% ({dataset.n_samples} samples)")
    return 0


GRID_DEPTHS = (2, 4, 6, 8, 10)


def _run_folds(dataset, folds, cfg, verbose=True):
    errors = []
    for fold in range(folds.k):
        model = nre_train(dataset.subset(folds.train_indices(fold)), cfg)
        err = evaluate(model, dataset.subset(folds.test_indices(fold)))
        errors.append(err)
        if verbose:
            print(f"fold {fold}: error {100 * err:.2f}%")
    return errors


def cmd_cv(args) -> int:
    config_file = _read_config_file(args.config) if args.config else {}
    cfg = _train_config(args, config_file)
    dataset = _load_dataset(args)
    folds = stratified_kfold(dataset, args.k, cfg.seed)
    t0 = time.perf_counter()
    if args.grid:
        best_depth, best_mean = None, None
        for depth in GRID_DEPTHS:
            trial = TrainConfig(**{**asdict(cfg), "max_depth": depth})
            mean = float(np.mean(_run_folds(dataset, folds, trial, verbose=False)))
            print(f"depth {depth:2d}: mean error {100 * mean:.2f}%")
            if best_mean is None or mean < best_mean:
                best_depth, best_mean = depth, mean
        print(f"best depth: {best_depth}")
        cfg = TrainConfig(**{**asdict(cfg), "max_depth": best_depth})
    errors = _run_folds(dataset, folds, cfg)
    wall = time.perf_counter() - t0
    report = EvalReport(
        fold_errors=errors,
        mean=float(np.mean(errors)),
        std=float(np.std(errors)),
        wall_time_s=wall,
        config=asdict(cfg),
    )
    print(f"mean error {100 * report.mean:.2f}% +- {100 * report.std:.2f}% ({wall:.1f}s)")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n")
    return 0


def cmd_compare(args) -> int:
    table = read_comparison_csv(args.results)
    wil = wilcoxon_signed_rank(table) if args.test in ("wilcoxon", "both") else None
    sgn = sign_test(table) if args.test in ("sign", "both") else None
    print(
        format_comparison_report(
            table, label_a=args.label_a, label_b=args.label_b, wilcoxon=wil, sign=sgn
        )
    )
    return 0


def cmd_plot(args) -> int:
    model_path = args.model
    if args.at_iteration is not None:
        model_path = _checkpoint_path(args.model, args.at_iteration)
    model = load_model(model_path)
    dataset = _load_dataset(args)
    if dataset.n_features != 2:
        raise DataError(f"plotting needs exactly 2 features, dataset has {dataset.n_features}")
    if args.bounds:
        parts = [float(v) for v in args.bounds.split(",")]
        if len(parts) != 4:
            raise UsageError("--bounds needs xmin,xmax,ymin,ymax")
        bounds = tuple(parts)
    else:
        bounds = data_bounds(dataset.features)

    if args.rule_index is not None:
        if not 0 <= args.rule_index < len(model.rules):
            raise DataError(
                f"rule index {args.rule_index} out of range (model has {len(model.rules)} rules)"
            )
        rule = model.rules[args.rule_index]
        std = model.standardization

        def score_fn(pts):
            return forward_batch(rule, (pts - std.means) / std.stds).values

    else:

        def score_fn(pts):
            return nre_score_batch(model, pts)

    svg = render_decision_regions(
        score_fn,
        dataset.features,
        dataset.labels,
        bounds=bounds,
        resolution=args.grid_resolution,
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nre", description="Neural rule ensembles for tabular binary classification")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    p.add_argument("kind", choices=["xor", "linear", "madelon"])
    p.add_argument("--n", type=int)
    p.add_argument("--angle", type=float, default=45.0)
    p.add_argument("--noise-std", dest="noise_std", type=float, default=0.15)
    p.add_argument("--margin", type=float, default=0.05)
    p.add_argument("--informative", type=int, default=5)
    p.add_argument("--redundant", type=int, default=15)
    p.add_argument("--distractors", type=int, default=480)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fetch", help="fetch a PMLB benchmark dataset")
    p.add_argument("name")
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--base-url", dest="base_url")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("train", help="train a neural rule ensemble")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--log")
    p.add_argument("--checkpoint-at", dest="checkpoint_at")
    _add_data_options(p)
    _add_train_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score a dataset with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _add_data_options(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="test error of a model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    _add_data_options(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cv", help="stratified k-fold cross-validation")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--grid", action="store_true",
                   help="sweep tree depth over {2,4,6,8,10} and report the best")
    p.add_argument("--out")
    _add_data_options(p)
    _add_train_options(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("compare", help="statistical comparison of two classifiers")
    p.add_argument("--results", required=True, help="CSV of dataset,error_a,error_b")
    p.add_argument("--test", choices=["wilcoxon", "sign", "both"], default="both")
    p.add_argument("--label-a", dest="label_a", default="A")
    p.add_argument("--label-b", dest="label_b", default="B")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("plot", help="SVG decision regions for a 2-feature dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--grid-resolution", dest="grid_resolution", type=int, default=200)
    p.add_argument("--bounds")
    p.add_argument("--rule-index", dest="rule_index", type=int)
    p.add_argument("--at-iteration", dest="at_iteration", type=int)
    _add_data_options(p)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except (DataError, ModelFormatError, FileNotFoundError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # numeric/runtime failures
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


def console_entry() -> None:
    sys.exit(main())
