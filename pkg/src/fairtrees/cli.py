"""Command-line interface: reproducible experiment runs and report emission.

Subcommands
-----------
curve       build one trade-off curve for one method and write its CSV
experiment  run the repeated-holdout protocol and write a report directory
bench       runtime benchmark sweeping instances, max_depth or features
report      summarize experiment directories into a comparison table

Runs are configured by a ``key = value`` file (``#`` comments, lists
comma-separated); a commented example ships in the repository. All output
files are written atomically (temp file + rename). Exit status is 0 only
when every requested output was written; validation failures exit 2 and
runtime failures exit 1, each naming the failing stage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import harness
from .data import DataError, SchemaError, load_csv, parse_schema, synth_biased, holdout_split
from .dual import model_to_dict, partition_grid
from .harness import (
    ExperimentConfig,
    HyperGrid,
    MethodSpec,
    gamma_grid,
    make_trainer,
    run_experiment,
    runtime_benchmark,
)
from .metrics import CurveMetrics, build_curve, welch_t_test
from .tree import GrowthLimits, tree_to_dict

OUT_ROOT_ENV = "FAIRTREES_OUT_ROOT"


class ConfigError(ValueError):
    pass


class StageFailure(RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage


def parse_config(path) -> dict:
    """Read a key = value config file into a string dict."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _split_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _resolve_out(cfg, args) -> Path:
    out = args.out or cfg.get("out")
    if not out:
        raise ConfigError("no output directory: set 'out' in the config or pass --out")
    out = Path(out)
    root = os.environ.get(OUT_ROOT_ENV)
    if root and not out.is_absolute():
        out = Path(root) / out
    return out


def atomic_write(path: Path, data: str):
    """Write text so that interrupted runs never leave truncated files."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x) -> str:
    return repr(float(x))


def curve_csv(curve) -> str:
    lines = ["gamma,auroc,spd"]
    lines += [f"{_fmt(p.gamma)},{_fmt(p.auroc)},{_fmt(p.spd)}" for p in curve.points]
    return "\n".join(lines) + "\n"


def _load_dataset(cfg):
    if "data" in cfg:
        if "schema" not in cfg:
            raise ConfigError("'data' needs a companion 'schema' path")
        schema = parse_schema(cfg["schema"])
        return load_csv(cfg["data"], schema)
    if "synth_n" in cfg:
        return synth_biased(
            int(cfg["synth_n"]),
            float(cfg.get("synth_bias", 0.5)),
            int(cfg.get("synth_seed", cfg.get("seed", 0))),
        )
    raise ConfigError("config must set either 'data'+'schema' or 'synth_n'")


def _validate_dataset_refs(cfg):
    if "data" in cfg:
        for key in ("data", "schema"):
            if key in cfg and not Path(cfg[key]).exists():
                raise ConfigError(f"{key} file not found: {cfg[key]}")
        if "schema" not in cfg:
            raise ConfigError("'data' needs a companion 'schema' path")


def _seed(cfg, args) -> int:
    if args.seed is not None:
        return args.seed
    return int(cfg.get("seed", 0))


def cmd_curve(args) -> int:
    cfg = parse_config(args.config)
    _validate_dataset_refs(cfg)
    method_name = cfg.get("method")
    if method_name is None:
        raise ConfigError("curve requires 'method'")
    if method_name not in harness.METHOD_NAMES:
        raise ConfigError(
            f"unknown method {method_name!r}; expected one of {harness.METHOD_NAMES}"
        )
    seed = _seed(cfg, args)
    steps = int(cfg.get("gamma_steps", harness.DEFAULT_GAMMA_STEPS))
    max_depth = int(cfg.get("max_depth", 6))
    min_samples = float(cfg.get("min_samples", 0.1))
    train_fraction = float(cfg.get("train_fraction", 2.0 / 3.0))
    out = _resolve_out(cfg, args)

    try:
        dataset = _load_dataset(cfg)
    except (DataError, SchemaError) as exc:
        raise StageFailure("load", exc) from exc

    try:
        train, test = holdout_split(dataset, train_fraction, seed)
        spec = MethodSpec(method_name, gamma_steps=steps)
        limits = GrowthLimits(
            max_depth=max_depth, min_samples=min_samples, n_total=train.n,
            thresholds=int(cfg.get("thresholds", 10)),
        )
        budget = args.budget_seconds or _optfloat(cfg.get("budget_seconds"))
        trainer = make_trainer(method_name, limits, fit_budget=budget)
        gammas = gamma_grid(spec)
        curve = build_curve(trainer, train, test, gammas)
    except (DataError, ValueError) as exc:
        raise StageFailure("train", exc) from exc

    try:
        atomic_write(out / "curve.csv", curve_csv(curve))
        _dump_endpoint_trees(trainer, train, gammas, out)
        if "grid_features" in cfg and method_name == "two_trees":
            _dump_partition_grid(cfg, trainer, train, gammas, out)
        if curve.degenerate_events and not args.quiet:
            for event in curve.degenerate_events:
                print(f"note: {event}", file=sys.stderr)
    except OSError as exc:
        raise StageFailure("write", exc) from exc
    if not args.quiet:
        print(f"wrote {out / 'curve.csv'} ({len(curve.points)} points)")
    return 0


def _optfloat(v):
    return None if v in (None, "") else float(v)


def _dump_endpoint_trees(trainer, train, gammas, out: Path):
    if isinstance(trainer, harness.DualCurveTrainer):
        from .dual import train_dual

        model = train_dual(train, trainer.limits)
        atomic_write(out / "trees.json", json.dumps(model_to_dict(model), indent=2))
        return
    for tag, gamma in (("gamma_min", gammas[0]), ("gamma_max", gammas[-1])):
        predictor = trainer.fit_one(train, float(gamma))
        atomic_write(
            out / f"tree_{tag}.json",
            json.dumps(tree_to_dict(predictor.tree), indent=2),
        )


def _dump_partition_grid(cfg, trainer, train, gammas, out: Path):
    from .dual import train_dual

    names = _split_list(cfg["grid_features"])
    if len(names) != 2:
        raise ConfigError("grid_features must name exactly two feature columns")
    steps = int(cfg.get("grid_steps", 50))
    model = train_dual(train, trainer.limits)
    rows = partition_grid(model, train, names[0], names[1], gammas, steps=steps)
    lines = [f"gamma,{names[0]},{names[1]},predicted"]
    lines += [f"{_fmt(g)},{_fmt(x)},{_fmt(y)},{int(c)}" for g, x, y, c in rows]
    atomic_write(out / "partition_grid.csv", "\n".join(lines) + "\n")


def cmd_experiment(args) -> int:
    cfg = parse_config(args.config)
    _validate_dataset_refs(cfg)
    methods = _split_list(cfg.get("methods", cfg.get("method", "")))
    if not methods:
        raise ConfigError("experiment requires 'methods'")
    for name in methods:
        if name not in harness.METHOD_NAMES:
            raise ConfigError(f"unknown method {name!r}")
    grid = HyperGrid(
        max_depths=tuple(int(v) for v in _split_list(cfg.get("max_depths", "4,6,8,13"))),
        min_samples=tuple(
            float(v) for v in _split_list(cfg.get("min_samples_grid", "0.25,0.1,0.01"))
        ),
    )
    config = ExperimentConfig(
        holdouts=int(cfg.get("holdouts", 15)),
        inner_folds=int(cfg.get("inner_folds", 3)),
        train_fraction=float(cfg.get("train_fraction", 2.0 / 3.0)),
        seed=_seed(cfg, args),
        gamma_steps=int(cfg.get("gamma_steps", harness.DEFAULT_GAMMA_STEPS)),
        thresholds=int(cfg.get("thresholds", 10)),
        budget_seconds=args.budget_seconds or _optfloat(cfg.get("budget_seconds")),
        workers=args.workers or int(cfg.get("workers", 1)),
    )
    out = _resolve_out(cfg, args)

    try:
        dataset = _load_dataset(cfg)
    except (DataError, SchemaError) as exc:
        raise StageFailure("load", exc) from exc

    for name in methods:
        spec = MethodSpec(name, gamma_steps=config.gamma_steps)
        try:
            report = run_experiment(dataset, spec, grid, config)
        except (DataError, ValueError) as exc:
            raise StageFailure("train", exc) from exc
        try:
            write_report_dir(report, out / name)
        except OSError as exc:
            raise StageFailure("write", exc) from exc
        if not args.quiet:
            mean = report.aggregate["autoc"]["mean"]
            std = report.aggregate["autoc"]["std"]
            print(f"{name}: autoc {mean:.3f} +/- {std:.3f} -> {out / name}")
        full_cells = len(grid.cost_ordered_cells())
        trimmed = [r.index for r in report.holdouts if len(r.completed_cells) < full_cells]
        if trimmed:
            print(
                f"warning: {name}: budget trimmed the grid in holdouts {trimmed}; "
                "completed cells are recorded in aggregate.json",
                file=sys.stderr,
            )
        if report.degenerate_events and not args.quiet:
            for event in report.degenerate_events:
                print(f"note: {event}", file=sys.stderr)
    return 0


def write_report_dir(report, outdir: Path):
    """Emit the per-holdout curves, metrics CSV, aggregate JSON and averaged curve."""
    outdir = Path(outdir)
    for r in report.holdouts:
        atomic_write(outdir / "curves" / f"holdout_{r.index:02d}.csv", curve_csv(r.curve))
    lines = [
        "holdout,method,max_depth,min_samples,autoc,pareto_points,unique_points,"
        "unique_pareto_points,distance_variance,seconds"
    ]
    for r in report.holdouts:
        m = r.metrics
        lines.append(
            f"{r.index},{report.method},{r.max_depth},{_fmt(r.min_samples)},"
            f"{_fmt(m.autoc)},{m.pareto_points},{m.unique_points},"
            f"{m.unique_pareto_points},{_fmt(m.distance_variance)},{_fmt(r.seconds)}"
        )
    atomic_write(outdir / "metrics.csv", "\n".join(lines) + "\n")
    avg_lines = ["gamma,mean_auroc,mean_spd"]
    avg_lines += [
        f"{_fmt(g)},{_fmt(a)},{_fmt(s)}" for g, a, s in report.averaged_curve
    ]
    atomic_write(outdir / "avg_curve.csv", "\n".join(avg_lines) + "\n")
    summary = {
        "method": report.method,
        "dataset_rows": report.dataset_rows,
        "aggregate": report.aggregate,
        "selected_cells": [
            {"holdout": r.index, "max_depth": r.max_depth, "min_samples": r.min_samples,
             "inner_mean_autoc": r.inner_mean_autoc,
             "completed_cells": [list(c) for c in r.completed_cells]}
            for r in report.holdouts
        ],
        "total_seconds": report.total_seconds,
        "degenerate_events": list(report.degenerate_events),
        "config": report.config,
    }
    atomic_write(outdir / "aggregate.json", json.dumps(summary, indent=2, sort_keys=True))


def cmd_bench(args) -> int:
    cfg = parse_config(args.config)
    _validate_dataset_refs(cfg)
    axis = args.axis or cfg.get("axis")
    if axis not in harness.BENCH_AXES:
        raise ConfigError(f"axis must be one of {harness.BENCH_AXES}")
    steps_raw = args.steps or cfg.get("steps", "")
    steps = [int(v) for v in _split_list(steps_raw)]
    if not steps:
        raise ConfigError("bench requires nonempty 'steps'")
    methods = _split_list(cfg.get("methods", ",".join(harness.METHOD_NAMES)))
    for name in methods:
        if name not in harness.METHOD_NAMES:
            raise ConfigError(f"unknown method {name!r}")
    out = _resolve_out(cfg, args)

    try:
        dataset = _load_dataset(cfg)
        rows = runtime_benchmark(
            dataset, methods, axis, steps,
            gamma_steps=int(cfg.get("gamma_steps", harness.DEFAULT_GAMMA_STEPS)),
            seed=_seed(cfg, args),
        )
    except (DataError, SchemaError, ValueError) as exc:
        raise StageFailure("bench", exc) from exc

    lines = [f"method,{axis},seconds"] + [
        f"{name},{value},{_fmt(sec)}" for name, value, sec in rows
    ]
    try:
        atomic_write(out / f"bench_{axis}.csv", "\n".join(lines) + "\n")
    except OSError as exc:
        raise StageFailure("write", exc) from exc
    if not args.quiet:
        print(f"wrote {out / f'bench_{axis}.csv'} ({len(rows)} rows)")
    return 0


def _read_metrics_csv(path: Path):
    rows = []
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    for line in lines[1:]:
        rows.append(dict(zip(header, line.split(","))))
    return rows


def cmd_report(args) -> int:
    dirs = [Path(d) for d in args.dirs]
    for d in dirs:
        if not (d / "metrics.csv").exists():
            raise ConfigError(f"not an experiment directory (no metrics.csv): {d}")
    per_method: dict[str, dict[str, list[float]]] = {}
    for d in dirs:
        for row in _read_metrics_csv(d / "metrics.csv"):
            method = row["method"]
            bucket = per_method.setdefault(
                method, {name: [] for name in CurveMetrics.FIELDS}
            )
            for name in CurveMetrics.FIELDS:
                bucket[name].append(float(row[name]))

    methods = sorted(per_method)
    table_lines = ["method,metric,mean,std,best,significant"]
    text = []
    pval_lines = ["metric,method_a,method_b,p_value"]
    notes = []
    for metric in CurveMetrics.FIELDS:
        means = {m: float(np.mean(per_method[m][metric])) for m in methods}
        stds = {
            m: (float(np.std(per_method[m][metric], ddof=1))
                if len(per_method[m][metric]) > 1 else 0.0)
            for m in methods
        }
        best = max(means, key=lambda m: means[m])
        pvals = {}
        for i, ma in enumerate(methods):
            for mb in methods[i + 1 :]:
                if len(per_method[ma][metric]) < 2 or len(per_method[mb][metric]) < 2:
                    continue
                p = welch_t_test(per_method[ma][metric], per_method[mb][metric])
                pvals[(ma, mb)] = p
                pval_lines.append(f"{metric},{ma},{mb},{_fmt(p)}")
        starred = (
            len(methods) > 1
            and all(
                pvals.get((min(best, m), max(best, m)), 1.0) < 0.05
                for m in methods
                if m != best
            )
            and any(pvals)
        )
        if not pvals and len(methods) > 1:
            notes.append(f"{metric}: p-values suppressed (fewer than 2 holdouts)")
        for m in methods:
            star = "*" if (m == best and starred) else ""
            marker = "best" if m == best else ""
            table_lines.append(
                f"{m},{metric},{_fmt(means[m])},{_fmt(stds[m])},{marker},{star}"
            )
            text.append(
                f"{metric:>22} {m:>14}: {means[m]:.4f} +/- {stds[m]:.4f}"
                f"{' [best]' if m == best else ''}{'*' if m == best and starred else ''}"
            )

    body = "\n".join(text) + ("\n" + "\n".join(notes) if notes else "") + "\n"
    if args.out:
        out = Path(args.out)
        try:
            atomic_write(out / "report.csv", "\n".join(table_lines) + "\n")
            atomic_write(out / "pvalues.csv", "\n".join(pval_lines) + "\n")
            atomic_write(out / "report.txt", body)
        except OSError as exc:
            raise StageFailure("write", exc) from exc
    if not args.quiet:
        print(body, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairtrees",
        description="fairness-aware decision trees and trade-off benchmarking",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--budget-seconds", type=float, default=None)
        quiet = p.add_mutually_exclusive_group()
        quiet.add_argument("--quiet", action="store_true")
        quiet.add_argument("--verbose", action="store_true")

    p_curve = sub.add_parser("curve", help="build one trade-off curve")
    p_curve.add_argument("--config", required=True)
    common(p_curve)
    p_curve.set_defaults(func=cmd_curve)

    p_exp = sub.add_parser("experiment", help="run the holdout protocol")
    p_exp.add_argument("--config", required=True)
    common(p_exp)
    p_exp.set_defaults(func=cmd_experiment)

    p_bench = sub.add_parser("bench", help="runtime benchmark")
    p_bench.add_argument("--config", required=True)
    p_bench.add_argument("--axis", choices=harness.BENCH_AXES)
    p_bench.add_argument("--steps", help="comma-separated step values")
    common(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_rep = sub.add_parser("report", help="summarize experiment directories")
    p_rep.add_argument("dirs", nargs="+")
    common(p_rep)
    p_rep.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SchemaError) as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return 2
    except StageFailure as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error [data]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
