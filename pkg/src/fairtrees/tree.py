"""Greedy binary decision trees with pluggable split selection.

Entropy is measured in bits, so for binary labels every information gain
lies in [0, 1]. Growth is parameterized by a selection policy: the grower
enumerates all admissible split candidates at a node (both children at
least ``max(1, round(n_total * min_samples))`` rows; numeric columns get
equally spaced cut points inside the node's observed range) and asks the
policy to pick one. A node becomes a leaf when the depth budget is used up,
no candidate is admissible, or the policy declines.

``max_depth`` counts node levels: 1 is a single leaf, 2 allows one split.
Ties between equal-scoring candidates resolve to the lowest column index,
then the lowest threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .data import Subset


@dataclass(frozen=True)
class Split:
    """A test routing rows left when value <= threshold (numeric) or value == 0
    (binary, threshold None)."""

    column: str
    threshold: float | None = None


@dataclass(frozen=True)
class SplitCandidate:
    split: Split
    column_index: int
    gain_y: float
    gain_s: float
    left_count: int
    right_count: int


@dataclass(frozen=True)
class Leaf:
    p1: float  # fraction of training rows with y = 1
    count: int


@dataclass(frozen=True)
class Internal:
    split: Split
    column_index: int
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Leaf | Internal


@dataclass(frozen=True)
class Tree:
    """A grown tree, or the empty tree (root None) predicting the prior."""

    root: TreeNode | None
    default_p1: float
    feature_names: tuple[str, ...]

    @property
    def is_empty(self) -> bool:
        return self.root is None


@dataclass(frozen=True)
class GrowthLimits:
    """Size limits shared by all tree builders.

    min_samples is the fraction of the total training size each leaf must
    retain; thresholds is the number of cut points tested per numeric column.
    """

    max_depth: int
    min_samples: float
    n_total: int
    thresholds: int = 10

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 0.0 < self.min_samples <= 1.0:
            raise ValueError("min_samples must be in (0, 1]")
        if self.n_total < 1:
            raise ValueError("n_total must be >= 1")
        if self.thresholds < 1:
            raise ValueError("thresholds must be >= 1")

    @property
    def min_child(self) -> int:
        return max(1, int(round(self.n_total * float(self.min_samples))))


def entropy(labels) -> float:
    """Entropy in bits of a binary label vector."""
    v = np.asarray(labels)
    if v.size == 0:
        raise ValueError("entropy of an empty vector is undefined")
    p = float(np.count_nonzero(v)) / v.size
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


def info_gain(subset: Subset, target: str, split: Split) -> float:
    """Information gain of a split for target 'y' or 's' on a subset."""
    if target not in ("y", "s"):
        raise ValueError("target must be 'y' or 's'")
    labels = subset.y if target == "y" else subset.s
    j = subset.names.index(split.column)
    v = subset.X[:, j]
    mask = v == 0.0 if split.threshold is None else v <= split.threshold
    n_left = int(mask.sum())
    if n_left == 0 or n_left == subset.n:
        raise ValueError("split produces an empty group on this subset")
    h = entropy(labels)
    left = labels[mask]
    right = labels[~mask]
    return (
        h
        - (len(left) / subset.n) * entropy(left)
        - (len(right) / subset.n) * entropy(right)
    )


def split_candidates(subset: Subset, limits: GrowthLimits) -> list[SplitCandidate]:
    """All admissible candidates at a node, in global tie-break order."""
    cols, thrs, gy, gs, ln, rn = subset.scan(limits.thresholds, limits.min_child)
    out = []
    for i in range(len(cols)):
        j = int(cols[i])
        thr = None if math.isnan(thrs[i]) else float(thrs[i])
        out.append(
            SplitCandidate(
                split=Split(subset.names[j], thr),
                column_index=j,
                gain_y=float(gy[i]),
                gain_s=float(gs[i]),
                left_count=int(ln[i]),
                right_count=int(rn[i]),
            )
        )
    return out


def _leaf(subset: Subset) -> Leaf:
    return Leaf(p1=subset.prior(), count=subset.n)


def grow(subset: Subset, policy, limits: GrowthLimits, depth: int = 0) -> TreeNode:
    """Grow a node greedily; ``policy(candidates)`` returns a candidate or None."""
    if subset.n == 0:
        raise ValueError("cannot grow a node on an empty subset")
    if depth + 1 >= limits.max_depth:
        return _leaf(subset)
    cands = split_candidates(subset, limits)
    if not cands:
        return _leaf(subset)
    chosen = policy(cands)
    if chosen is None:
        return _leaf(subset)
    left_sub, right_sub = subset.partition(
        chosen.column_index, chosen.split.threshold
    )
    return Internal(
        split=chosen.split,
        column_index=chosen.column_index,
        left=grow(left_sub, policy, limits, depth + 1),
        right=grow(right_sub, policy, limits, depth + 1),
    )


def fit_tree(dataset, policy, limits: GrowthLimits) -> Tree:
    """Grow a full tree on a dataset with the given selection policy."""
    subset = dataset.root_subset()
    return Tree(
        root=grow(subset, policy, limits),
        default_p1=subset.prior(),
        feature_names=dataset.feature_names,
    )


def _route(node: TreeNode, row) -> Leaf:
    while isinstance(node, Internal):
        if node.column_index >= len(row):
            raise KeyError(f"row lacks column {node.split.column!r}")
        v = row[node.column_index]
        if node.split.threshold is None:
            node = node.left if v == 0.0 else node.right
        else:
            node = node.left if v <= node.split.threshold else node.right
    return node


def predict_proba(tree: Tree, row) -> float:
    """Probability that y = 1 for one row (positional feature values)."""
    if tree.root is None:
        return tree.default_p1
    return _route(tree.root, row).p1


def predict(tree: Tree, row, threshold: float = 0.5) -> int:
    """Hard label; probability ties at the threshold resolve to 1."""
    return 1 if predict_proba(tree, row) >= threshold else 0


def predict_proba_batch(tree: Tree, X) -> np.ndarray:
    """Vectorized predict_proba over a feature matrix."""
    X = np.asarray(X, dtype=np.float64)
    out = np.empty(X.shape[0], dtype=np.float64)
    if tree.root is None:
        out.fill(tree.default_p1)
        return out
    _fill_proba(tree.root, X, np.arange(X.shape[0]), out)
    return out


def _fill_proba(node: TreeNode, X, idx, out):
    if isinstance(node, Leaf):
        out[idx] = node.p1
        return
    if node.column_index >= X.shape[1]:
        raise KeyError(f"rows lack column {node.split.column!r}")
    v = X[idx, node.column_index]
    mask = v == 0.0 if node.split.threshold is None else v <= node.split.threshold
    _fill_proba(node.left, X, idx[mask], out)
    _fill_proba(node.right, X, idx[~mask], out)


def predict_batch(tree: Tree, X, threshold: float = 0.5) -> np.ndarray:
    return (predict_proba_batch(tree, X) >= threshold).astype(np.uint8)


def tree_depth(tree: Tree) -> int:
    """Number of node levels; 0 for the empty tree, 1 for a lone leaf."""
    def levels(node):
        if node is None:
            return 0
        if isinstance(node, Leaf):
            return 1
        return 1 + max(levels(node.left), levels(node.right))

    return levels(tree.root)


def node_to_dict(node: TreeNode | None):
    if node is None:
        return None
    if isinstance(node, Leaf):
        return {"leaf": {"p1": node.p1, "count": node.count}}
    return {
        "split": {"column": node.split.column, "threshold": node.split.threshold},
        "left": node_to_dict(node.left),
        "right": node_to_dict(node.right),
    }


def tree_to_dict(tree: Tree) -> dict:
    """Structured document form of a tree, suitable for JSON round-trips."""
    return {
        "features": list(tree.feature_names),
        "default_p1": tree.default_p1,
        "root": node_to_dict(tree.root),
    }


def tree_from_dict(doc: dict) -> Tree:
    features = tuple(doc["features"])
    index = {name: i for i, name in enumerate(features)}

    def build(node):
        if node is None:
            return None
        if "leaf" in node:
            return Leaf(p1=float(node["leaf"]["p1"]), count=int(node["leaf"]["count"]))
        sp = node["split"]
        thr = sp["threshold"]
        return Internal(
            split=Split(sp["column"], None if thr is None else float(thr)),
            column_index=index[sp["column"]],
            left=build(node["left"]),
            right=build(node["right"]),
        )

    return Tree(root=build(doc["root"]), default_p1=float(doc["default_p1"]),
                feature_names=features)


def tree_to_json(tree: Tree) -> str:
    return json.dumps(tree_to_dict(tree), indent=2, sort_keys=True)


def tree_to_text(tree: Tree) -> str:
    """Human-readable nested rendering of a tree."""
    if tree.root is None:
        return f"(empty tree, predicts {tree.default_p1:.6g})"
    lines: list[str] = []

    def render(node, indent):
        pad = "  " * indent
        if isinstance(node, Leaf):
            lines.append(f"{pad}leaf p1={node.p1:.6g} n={node.count}")
            return
        if node.split.threshold is None:
            lines.append(f"{pad}[{node.split.column} == 0?]")
        else:
            lines.append(f"{pad}[{node.split.column} <= {node.split.threshold:.6g}?]")
        render(node.left, indent + 1)
        render(node.right, indent + 1)

    render(tree.root, 0)
    return "\n".join(lines)
