"""Performance/fairness measures and trade-off curve evaluation.

A trade-off curve is a list of (gamma, AUROC, SPD) points for one method.
Curves live in (AUROC, 1 - SPD) space: higher is better on both axes. The
curve summary measures are the area under the trade-off curve, the number
of locally Pareto-optimal points, the number of unique points, the number
of unique Pareto points, and the variance of pairwise distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

#: duplicate detection rounds both curve coordinates to this many decimals
UNIQUE_DECIMALS = 6


def auroc(scores, labels) -> float:
    """Rank-based AUROC with mid-rank tie handling.

    Equals P(score+ > score-) + 0.5 * P(score+ = score-) over all
    positive/negative pairs. Single-class label vectors score 0.5.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must have the same length")
    if scores.size == 0:
        raise ValueError("need at least one observation")
    n_pos = int(np.count_nonzero(labels))
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return 0.5
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.size, dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # average of ranks i+1..j+1
        i = j + 1
    pos_rank_sum = float(ranks[np.asarray(labels) != 0].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def spd(predictions, sensitive) -> float:
    """Statistical parity difference: |P(pred=1 | s=0) - P(pred=1 | s=1)|.

    Returns 0 when one sensitive group is empty.
    """
    predictions = np.asarray(predictions)
    sensitive = np.asarray(sensitive)
    if predictions.shape != sensitive.shape:
        raise ValueError("predictions and sensitive must have the same length")
    if predictions.size == 0:
        raise ValueError("need at least one observation")
    mask = sensitive != 0
    n1 = int(np.count_nonzero(mask))
    n0 = predictions.size - n1
    if n0 == 0 or n1 == 0:
        return 0.0
    rate0 = float(np.count_nonzero(predictions[~mask])) / n0
    rate1 = float(np.count_nonzero(predictions[mask])) / n1
    return abs(rate0 - rate1)


@dataclass(frozen=True)
class TradeoffPoint:
    gamma: float
    auroc: float
    spd: float


@dataclass(frozen=True)
class TradeoffCurve:
    method: str
    points: tuple[TradeoffPoint, ...]
    degenerate_events: tuple[str, ...] = ()

    def __post_init__(self):
        gammas = [p.gamma for p in self.points]
        if any(b <= a for a, b in zip(gammas, gammas[1:])):
            raise ValueError("curve gammas must be strictly increasing")

    def aurocs(self) -> np.ndarray:
        return np.array([p.auroc for p in self.points])

    def spds(self) -> np.ndarray:
        return np.array([p.spd for p in self.points])


@dataclass(frozen=True)
class CurveMetrics:
    autoc: float
    pareto_points: int
    unique_points: int
    unique_pareto_points: int
    distance_variance: float

    FIELDS = ("autoc", "pareto_points", "unique_points", "unique_pareto_points",
              "distance_variance")


def build_curve(trainer, train, test, gammas) -> TradeoffCurve:
    """Evaluate a trainer at each gamma: AUROC on probabilities, SPD on labels.

    ``trainer.fit_sweep(train, gammas)`` yields (gamma, predictor) pairs;
    methods that share one model across the sweep train once inside it.
    """
    gammas = list(gammas)
    if not gammas:
        raise ValueError("need at least one gamma")
    if any(b <= a for a, b in zip(gammas, gammas[1:])):
        raise ValueError("gammas must be sorted strictly increasing")
    events = []
    if test.y.min() == test.y.max():
        events.append("single-class test target; auroc pinned to 0.5")
    if test.s.min() == test.s.max():
        events.append("single-group test sensitive column; spd pinned to 0")
    points = []
    for gamma, predictor in trainer.fit_sweep(train, gammas):
        proba = predictor.predict_proba(test.X)
        labels = (proba >= 0.5).astype(np.uint8)
        points.append(
            TradeoffPoint(
                gamma=float(gamma),
                auroc=auroc(proba, test.y),
                spd=spd(labels, test.s),
            )
        )
    return TradeoffCurve(
        method=trainer.name, points=tuple(points), degenerate_events=tuple(events)
    )


def autoc(curve: TradeoffCurve) -> float:
    """Area under the trade-off curve by the trapezoidal rule.

    Points are sorted by AUROC ascending, then extended with
    (0.5, max(1 - SPD)) on the left and (1.0, min(1 - SPD)) on the right,
    so a single strong point is not penalized for its short AUROC range.
    The extension points exist only here, never in the counting measures.
    """
    a = curve.aurocs()
    h = 1.0 - curve.spds()
    order = np.argsort(a, kind="mergesort")
    xs = np.concatenate(([0.5], a[order], [1.0]))
    ys = np.concatenate(([h.max()], h[order], [h.min()]))
    return float(0.5 * np.sum((xs[1:] - xs[:-1]) * (ys[1:] + ys[:-1])))


def pareto_mask(curve: TradeoffCurve) -> np.ndarray:
    """Boolean mask of locally Pareto-optimal points.

    A point is dominated when another point is at least as good on both
    axes and strictly better on one; exact duplicates never dominate each
    other, so duplicated optima all count.
    """
    a = curve.aurocs()
    h = 1.0 - curve.spds()
    ge_a = a[None, :] >= a[:, None]
    ge_h = h[None, :] >= h[:, None]
    strict = (a[None, :] > a[:, None]) | (h[None, :] > h[:, None])
    dominated = (ge_a & ge_h & strict).any(axis=1)
    return ~dominated


def pareto_count(curve: TradeoffCurve) -> int:
    return int(pareto_mask(curve).sum())


def _rounded_pairs(points) -> list[tuple[float, float]]:
    return [
        (round(p.auroc, UNIQUE_DECIMALS), round(p.spd, UNIQUE_DECIMALS))
        for p in points
    ]


def unique_count(curve: TradeoffCurve) -> int:
    """Distinct (AUROC, SPD) pairs after rounding both coordinates."""
    return len(set(_rounded_pairs(curve.points)))


def unique_pareto_count(curve: TradeoffCurve) -> int:
    """Distinct rounded pairs among the locally Pareto-optimal points."""
    mask = pareto_mask(curve)
    pairs = _rounded_pairs(curve.points)
    return len({pair for pair, keep in zip(pairs, mask) if keep})


def variance_pairwise(curve: TradeoffCurve) -> float:
    """Population variance of pairwise distances in (AUROC, 1 - SPD) space.

    All unordered pairs count, duplicates included; curves with fewer than
    two points have variance 0.
    """
    a = curve.aurocs()
    h = 1.0 - curve.spds()
    n = len(a)
    if n < 2:
        return 0.0
    d2 = (a[:, None] - a[None, :]) ** 2 + (h[:, None] - h[None, :]) ** 2
    iu = np.triu_indices(n, k=1)
    dists = np.sqrt(d2[iu])
    return float(np.var(dists))


def curve_metrics(curve: TradeoffCurve) -> CurveMetrics:
    return CurveMetrics(
        autoc=autoc(curve),
        pareto_points=pareto_count(curve),
        unique_points=unique_count(curve),
        unique_pareto_points=unique_pareto_count(curve),
        distance_variance=variance_pairwise(curve),
    )


def welch_t_test(a, b) -> float:
    """Two-sided two-sample t-test p-value with Welch degrees of freedom.

    Both samples need at least two values. When both variances are zero the
    p-value is 1 for equal means and 0 otherwise.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    m1, m2 = float(a.mean()), float(b.mean())
    v1 = float(a.var(ddof=1))
    v2 = float(b.var(ddof=1))
    if v1 == 0.0 and v2 == 0.0:
        return 1.0 if m1 == m2 else 0.0
    se2 = v1 / a.size + v2 / b.size
    t = (m1 - m2) / math.sqrt(se2)
    df = se2 * se2 / (
        (v1 / a.size) ** 2 / (a.size - 1) + (v2 / b.size) ** 2 / (b.size - 1)
    )
    return float(2.0 * stats.t.sf(abs(t), df))
