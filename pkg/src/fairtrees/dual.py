"""Dual-tree model: a performance tree and a fairness tree blended at predict time.

Both trees are grown on the same training data under the same limits. The
performance tree maximizes the target gain; the fairness tree minimizes the
sensitive gain but its leaves still estimate probabilities for y. Prediction
blends the two probability estimates::

    p(x) = (1 - gamma) * p_performance(x) + gamma * p_fairness(x)

so one trained pair serves every gamma on a trade-off curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .policies import select_fairness_min, select_performance
from .tree import GrowthLimits, Tree, fit_tree, predict_proba, predict_proba_batch, tree_to_dict


@dataclass(frozen=True)
class DualModel:
    tree_y: Tree
    tree_s: Tree
    limits: GrowthLimits


def train_dual(dataset, limits: GrowthLimits) -> DualModel:
    """Train the performance/fairness tree pair once; gamma-free."""
    return DualModel(
        tree_y=fit_tree(dataset, select_performance, limits),
        tree_s=fit_tree(dataset, select_fairness_min, limits),
        limits=limits,
    )


def combine_predict(model: DualModel, gamma: float, row) -> float:
    """Blend the two probability estimates for one row."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must be in [0, 1]")
    if gamma == 0.0:
        return predict_proba(model.tree_y, row)
    if gamma == 1.0:
        return predict_proba(model.tree_s, row)
    return (1.0 - gamma) * predict_proba(model.tree_y, row) + gamma * predict_proba(
        model.tree_s, row
    )


def combine_predict_batch(model: DualModel, gamma: float, X) -> np.ndarray:
    """Vectorized blend over a feature matrix."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must be in [0, 1]")
    p_y = predict_proba_batch(model.tree_y, X)
    if gamma == 0.0:
        return p_y
    p_s = predict_proba_batch(model.tree_s, X)
    if gamma == 1.0:
        return p_s
    return (1.0 - gamma) * p_y + gamma * p_s


def model_to_dict(model: DualModel) -> dict:
    """Serializable document: the two tree documents plus the limits."""
    return {
        "tree_y": tree_to_dict(model.tree_y),
        "tree_s": tree_to_dict(model.tree_s),
        "limits": {
            "max_depth": model.limits.max_depth,
            "min_samples": model.limits.min_samples,
            "n_total": model.limits.n_total,
            "thresholds": model.limits.thresholds,
        },
    }


def partition_grid(
    model: DualModel,
    dataset,
    feature_x: str,
    feature_y: str,
    gammas,
    steps: int = 50,
    threshold: float = 0.5,
):
    """Predicted class over a 2-D feature grid, one row per (x, y, gamma).

    The two grid features sweep their observed [min, max] range; all other
    features are pinned at their training median. Supports rendering the
    blended decision partitions with external plotting tools.
    """
    jx = dataset.feature_index(feature_x)
    jy = dataset.feature_index(feature_y)
    base = np.median(dataset.X, axis=0)
    xs = np.linspace(dataset.X[:, jx].min(), dataset.X[:, jx].max(), steps)
    ys = np.linspace(dataset.X[:, jy].min(), dataset.X[:, jy].max(), steps)
    grid = np.tile(base, (steps * steps, 1))
    xx, yy = np.meshgrid(xs, ys)
    grid[:, jx] = xx.ravel()
    grid[:, jy] = yy.ravel()
    rows = []
    for gamma in gammas:
        proba = combine_predict_batch(model, float(gamma), grid)
        labels = (proba >= threshold).astype(int)
        for (gx, gy, lab) in zip(grid[:, jx], grid[:, jy], labels):
            rows.append((float(gamma), float(gx), float(gy), int(lab)))
    return rows
