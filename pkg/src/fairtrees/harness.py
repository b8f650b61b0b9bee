"""Experiment harness: repeated hold-out with inner cross-validated selection.

The protocol per hold-out: split the data 2/3 train, 1/3 test; for every
hyperparameter cell, build the trade-off curve on each inner fold and average
its area; select the cell with the best average, retrain on the full training
part and evaluate curve plus all curve measures on the held-out third.

Methods:

* ``two_trees``    — dual-tree blend, trained once per fold, gamma range [0, 1]
* ``combined``     — weighted single-tree objective, retrained per gamma, [0, 1]
* ``constrained``  — hard-constrained single tree, retrained per gamma, [0, 0.2]
* ``backtracking`` — constrained single tree with backtracking, [0, 0.2]

All randomness derives from one master seed through numpy SeedSequence
spawning: holdout i uses the i-th spawned sequence, whose first two words
seed the outer split and the inner folds.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, DataError, holdout_split, k_folds
from .dual import DualModel, combine_predict_batch, train_dual
from .metrics import CurveMetrics, TradeoffCurve, autoc, build_curve, curve_metrics
from .policies import BacktrackResult, PolicyConfig, backtracking_train
from .tree import GrowthLimits, Tree, fit_tree, predict_proba_batch

METHOD_NAMES = ("two_trees", "combined", "constrained", "backtracking")

#: gamma interval per method; soft trade-offs sweep [0, 1], hard constraints
#: sweep [0, 0.2] to match the smaller useful range of the gain bound
GAMMA_RANGES = {
    "two_trees": (0.0, 1.0),
    "combined": (0.0, 1.0),
    "constrained": (0.0, 0.2),
    "backtracking": (0.0, 0.2),
}

DEFAULT_GAMMA_STEPS = 50
DEFAULT_MAX_DEPTHS = (4, 6, 8, 13)
DEFAULT_MIN_SAMPLES = (0.25, 0.1, 0.01)


@dataclass(frozen=True)
class MethodSpec:
    name: str
    gamma_range: tuple[float, float] | None = None
    gamma_steps: int = DEFAULT_GAMMA_STEPS

    def __post_init__(self):
        if self.name not in METHOD_NAMES:
            raise ValueError(
                f"unknown method {self.name!r}; expected one of {METHOD_NAMES}"
            )
        if self.gamma_range is None:
            object.__setattr__(self, "gamma_range", GAMMA_RANGES[self.name])


def gamma_grid(spec: MethodSpec) -> np.ndarray:
    """Inclusive linear spacing over the method's gamma range."""
    if spec.gamma_steps < 2:
        raise ValueError("gamma_steps must be >= 2")
    lo, hi = spec.gamma_range
    return np.linspace(lo, hi, spec.gamma_steps)


@dataclass(frozen=True)
class HyperGrid:
    max_depths: tuple[int, ...] = DEFAULT_MAX_DEPTHS
    min_samples: tuple[float, ...] = DEFAULT_MIN_SAMPLES

    def __post_init__(self):
        if not self.max_depths or not self.min_samples:
            raise ValueError("hyperparameter grid must be nonempty")

    def cost_ordered_cells(self) -> list[tuple[int, float]]:
        """Cells from cheapest to most expensive: shallow trees first, and for
        equal depth the larger leaf-size floor first."""
        return [
            (d, ms)
            for d in sorted(self.max_depths)
            for ms in sorted(self.min_samples, reverse=True)
        ]


class TreeCurveTrainer:
    """Single-tree methods: one tree retrained per gamma."""

    def __init__(self, name, limits, fit_budget=None):
        self.name = name
        self.limits = limits
        self.fit_budget = fit_budget

    def with_limits(self, limits):
        return TreeCurveTrainer(self.name, limits, self.fit_budget)

    def fit_one(self, train: Dataset, gamma: float):
        limits = self.limits
        if self.name == "backtracking":
            result: BacktrackResult = backtracking_train(
                train, gamma, limits, time_budget=self.fit_budget
            )
            return TreePredictor(result.tree, timed_out=result.timed_out)
        policy = PolicyConfig(self.name, gamma).selector()
        return TreePredictor(fit_tree(train, policy, limits))

    def fit_sweep(self, train: Dataset, gammas):
        for gamma in gammas:
            yield float(gamma), self.fit_one(train, float(gamma))


class DualCurveTrainer:
    """Dual-tree method: trains once, sweeps gamma at predict time."""

    name = "two_trees"

    def __init__(self, limits):
        self.limits = limits

    def with_limits(self, limits):
        return DualCurveTrainer(limits)

    def fit_sweep(self, train: Dataset, gammas):
        model = train_dual(train, self.limits)
        cache = _DualProbaCache(model)
        for gamma in gammas:
            yield float(gamma), BlendPredictor(model, float(gamma), cache)


class _DualProbaCache:
    """Per-sweep memo of the two per-tree probability vectors for one matrix.

    The pair depends only on the trees and the rows, so a gamma sweep over a
    fixed test set routes each tree once and blends vectors afterwards.
    """

    def __init__(self, model):
        self.model = model
        self._X = None
        self._pair = None

    def pair(self, X):
        if self._X is not X:
            self._X = X
            self._pair = (
                predict_proba_batch(self.model.tree_y, X),
                predict_proba_batch(self.model.tree_s, X),
            )
        return self._pair


@dataclass(frozen=True)
class TreePredictor:
    tree: Tree
    timed_out: bool = False

    def predict_proba(self, X):
        return predict_proba_batch(self.tree, X)


@dataclass(frozen=True)
class BlendPredictor:
    model: DualModel
    gamma: float
    cache: "_DualProbaCache | None" = None

    def predict_proba(self, X):
        if self.cache is None:
            return combine_predict_batch(self.model, self.gamma, X)
        p_y, p_s = self.cache.pair(X)
        if self.gamma == 0.0:
            return p_y
        if self.gamma == 1.0:
            return p_s
        return (1.0 - self.gamma) * p_y + self.gamma * p_s


def make_trainer(name: str, limits: GrowthLimits, fit_budget=None):
    if name == "two_trees":
        return DualCurveTrainer(limits)
    return TreeCurveTrainer(name, limits, fit_budget=fit_budget)


def _limits_for(cell, n_total, thresholds):
    depth, min_samples = cell
    return GrowthLimits(
        max_depth=depth, min_samples=min_samples, n_total=n_total,
        thresholds=thresholds,
    )


@dataclass(frozen=True)
class ExperimentConfig:
    holdouts: int = 15
    inner_folds: int = 3
    train_fraction: float = 2.0 / 3.0
    seed: int = 0
    gamma_steps: int = DEFAULT_GAMMA_STEPS
    thresholds: int = 10
    budget_seconds: float | None = None
    workers: int = 1


@dataclass(frozen=True)
class HoldoutResult:
    index: int
    max_depth: int
    min_samples: float
    inner_mean_autoc: float
    curve: TradeoffCurve
    metrics: CurveMetrics
    seconds: float
    completed_cells: tuple[tuple[int, float], ...]
    degenerate_events: tuple[str, ...] = ()


@dataclass(frozen=True)
class HoldoutReport:
    method: str
    dataset_rows: int
    holdouts: tuple[HoldoutResult, ...]
    aggregate: dict
    averaged_curve: tuple[tuple[float, float, float], ...]
    total_seconds: float
    degenerate_events: tuple[str, ...] = ()
    config: dict = field(default_factory=dict)


def time_budgeted_grid(method: MethodSpec, grid: HyperGrid, budget_seconds,
                       evaluate) -> list:
    """Evaluate grid cells from cheapest to most expensive until the budget
    runs out; returns (cell, result) pairs for cells that completed.

    The clock is checked before starting each cell, so a long final cell may
    overshoot. Raises if not even the cheapest cell completed.
    """
    if budget_seconds is not None and budget_seconds <= 0:
        raise ValueError("budget must be positive")
    start = time.monotonic()
    done = []
    for cell in grid.cost_ordered_cells():
        if done and budget_seconds is not None:
            if time.monotonic() - start >= budget_seconds:
                break
        done.append((cell, evaluate(cell)))
    if not done:
        raise DataError("time budget too small: no grid cell completed")
    return done


def _holdout_seeds(master_seed: int, holdouts: int):
    seqs = np.random.SeedSequence(master_seed).spawn(holdouts)
    out = []
    for seq in seqs:
        words = seq.generate_state(2)
        out.append((int(words[0]), int(words[1])))
    return out


def _run_one_holdout(dataset, method, grid, config, index, seeds) -> HoldoutResult:
    split_seed, fold_seed = seeds
    t0 = time.monotonic()
    train, test = holdout_split(dataset, config.train_fraction, split_seed)
    folds = k_folds(train, config.inner_folds, fold_seed)
    gammas = gamma_grid(method)
    base_trainer = make_trainer(method.name, _limits_for(
        grid.cost_ordered_cells()[0], train.n, config.thresholds))

    def evaluate(cell):
        trainer = base_trainer.with_limits(
            _limits_for(cell, train.n, config.thresholds)
        )
        scores = []
        for ftrain, fval in folds:
            scores.append(autoc(build_curve(trainer, ftrain, fval, gammas)))
        return float(np.mean(scores))

    budget = None
    if config.budget_seconds is not None:
        budget = config.budget_seconds / config.holdouts
    completed = time_budgeted_grid(method, grid, budget, evaluate)

    # ties keep the earliest (cheapest) cell
    best_cell, best_score = completed[0]
    for cell, score in completed[1:]:
        if score > best_score:
            best_cell, best_score = cell, score

    trainer = base_trainer.with_limits(
        _limits_for(best_cell, train.n, config.thresholds)
    )
    curve = build_curve(trainer, train, test, gammas)
    events = list(curve.degenerate_events)
    if train.constant_target:
        events.append("constant target in training part")
    if train.constant_sensitive:
        events.append("constant sensitive column in training part")
    return HoldoutResult(
        index=index,
        max_depth=best_cell[0],
        min_samples=best_cell[1],
        inner_mean_autoc=best_score,
        curve=curve,
        metrics=curve_metrics(curve),
        seconds=time.monotonic() - t0,
        completed_cells=tuple(cell for cell, _ in completed),
        degenerate_events=tuple(events),
    )


def averaged_curve(curves) -> list[tuple[float, float, float]]:
    """Pointwise (per gamma index) mean AUROC and SPD across curves sharing
    one gamma grid."""
    first = curves[0]
    for c in curves[1:]:
        if len(c.points) != len(first.points):
            raise ValueError("curves must share the gamma grid")
    out = []
    for i, p in enumerate(first.points):
        aurocs = [c.points[i].auroc for c in curves]
        spds = [c.points[i].spd for c in curves]
        out.append((p.gamma, float(np.mean(aurocs)), float(np.mean(spds))))
    return out


def run_experiment(dataset: Dataset, method: MethodSpec, grid: HyperGrid,
                   config: ExperimentConfig) -> HoldoutReport:
    """Full repeated-holdout protocol for one method on one dataset."""
    if dataset.n < 3:
        raise DataError("dataset too small for a holdout experiment")
    t0 = time.monotonic()
    seeds = _holdout_seeds(config.seed, config.holdouts)
    args = [
        (dataset, method, grid, config, i, seeds[i]) for i in range(config.holdouts)
    ]
    if config.workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_holdout_star, args))
    else:
        results = [_holdout_star(a) for a in args]
    results.sort(key=lambda r: r.index)

    aggregate = {}
    for name in CurveMetrics.FIELDS:
        values = np.array([getattr(r.metrics, name) for r in results], dtype=np.float64)
        aggregate[name] = {
            "mean": float(values.mean()),
            "std": float(values.std(ddof=1)) if len(values) > 1 else 0.0,
            "values": [float(v) for v in values],
        }
    events = []
    for r in results:
        events.extend(f"holdout {r.index}: {e}" for e in r.degenerate_events)
    if dataset.constant_target:
        events.insert(0, "dataset has a constant target column")
    if dataset.constant_sensitive:
        events.insert(0, "dataset has a constant sensitive column")
    return HoldoutReport(
        method=method.name,
        dataset_rows=dataset.n,
        holdouts=tuple(results),
        aggregate=aggregate,
        averaged_curve=tuple(averaged_curve([r.curve for r in results])),
        total_seconds=time.monotonic() - t0,
        degenerate_events=tuple(events),
        config={
            "holdouts": config.holdouts,
            "inner_folds": config.inner_folds,
            "train_fraction": config.train_fraction,
            "seed": config.seed,
            "gamma_steps": method.gamma_steps,
            "gamma_range": list(method.gamma_range),
            "max_depths": list(grid.max_depths),
            "min_samples": list(grid.min_samples),
            "thresholds": config.thresholds,
            "budget_seconds": config.budget_seconds,
        },
    )


def _holdout_star(args):
    return _run_one_holdout(*args)


BENCH_AXES = ("instances", "max_depth", "features")


def runtime_benchmark(
    dataset: Dataset,
    methods,
    axis: str,
    steps,
    *,
    base_instances: int = 100,
    base_depth: int = 3,
    base_features: int = 3,
    min_samples: float = 0.1,
    gamma_steps: int = DEFAULT_GAMMA_STEPS,
    seed: int = 0,
):
    """Wall time to produce one full trade-off curve while sweeping one axis.

    The other two axes stay at the base values. Returns (method, value,
    seconds) rows; the curve is built on a 2/3-1/3 split of the subsample.
    """
    if axis not in BENCH_AXES:
        raise ValueError(f"axis must be one of {BENCH_AXES}")
    steps = list(steps)
    if not steps:
        raise ValueError("steps must be nonempty")
    rows = []
    for value in steps:
        value = int(value)
        n = value if axis == "instances" else base_instances
        depth = value if axis == "max_depth" else base_depth
        m = value if axis == "features" else base_features
        if n < 3 or n > dataset.n:
            raise DataError(f"instances step {n} outside dataset size {dataset.n}")
        if m < 1 or m > dataset.m:
            raise DataError(f"features step {m} outside dataset width {dataset.m}")
        if depth < 1:
            raise DataError("max_depth step must be >= 1")
        sub = dataset.take(np.arange(n))
        sub = Dataset(
            feature_names=sub.feature_names[:m],
            feature_kinds=sub.feature_kinds[:m].copy(),
            X=np.ascontiguousarray(sub.X[:, :m]),
            y=sub.y.copy(),
            s=sub.s.copy(),
            constant_target=sub.constant_target,
            constant_sensitive=sub.constant_sensitive,
        )
        train, test = holdout_split(sub, 2.0 / 3.0, seed)
        for name in methods:
            spec = MethodSpec(name, gamma_steps=gamma_steps)
            limits = GrowthLimits(
                max_depth=depth, min_samples=min_samples, n_total=train.n
            )
            trainer = make_trainer(name, limits)
            t0 = time.perf_counter()
            build_curve(trainer, train, test, gamma_grid(spec))
            rows.append((name, value, time.perf_counter() - t0))
    return rows
