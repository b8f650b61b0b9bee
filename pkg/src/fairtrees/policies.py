"""Split-selection policies and the backtracking constrained tree builder.

Four policies span the design space of fair tree learning:

* ``performance`` — maximize the target gain G_Y (a standard tree).
* ``fairness_min`` — minimize the sensitive gain G_S; the tree still
  estimates probabilities for y at its leaves.
* ``combined`` — maximize the weighted objective (1 - gamma) * G_Y -
  gamma * G_S; declines when the best score is not positive.
* ``constrained`` — maximize G_Y among candidates with G_S <= gamma;
  declines when none qualifies or the best target gain is zero.

The backtracking builder extends the constrained policy: instead of leafing
when a subtree cannot be completed fairly, it abandons the candidate split
and tries the next-best one; if no candidate works it signals failure (None)
to its caller, and a failure at the root yields the empty tree. Every
selection is deterministic under the global tie rule (lowest column index,
then lowest threshold).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .data import Subset
from .tree import (
    GrowthLimits,
    Internal,
    Leaf,
    SplitCandidate,
    Tree,
    TreeNode,
    fit_tree,
    info_gain,
    split_candidates,
)

POLICY_KINDS = ("performance", "fairness_min", "combined", "constrained")


@dataclass(frozen=True)
class PolicyConfig:
    """A selection policy plus its trade-off parameter."""

    kind: str
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "combined" and not 0.0 <= self.gamma <= 1.0:
            raise ValueError("combined policy needs gamma in [0, 1]")
        if self.kind == "constrained" and self.gamma < 0.0:
            raise ValueError("constrained policy needs gamma >= 0")

    def selector(self):
        if self.kind == "performance":
            return select_performance
        if self.kind == "fairness_min":
            return select_fairness_min
        if self.kind == "combined":
            g = self.gamma
            return lambda cands: select_combined(cands, g)
        g = self.gamma
        return lambda cands: select_constrained(cands, g)


def select_performance(cands: list[SplitCandidate]) -> SplitCandidate | None:
    """Candidate with maximal target gain; None when all gains are zero."""
    best = None
    for c in cands:
        if best is None or c.gain_y > best.gain_y:
            best = c
    if best is None or best.gain_y <= 0.0:
        return None
    return best


def select_fairness_min(cands: list[SplitCandidate]) -> SplitCandidate | None:
    """Candidate with minimal sensitive gain; None only for an empty list."""
    best = None
    for c in cands:
        if best is None or c.gain_s < best.gain_s:
            best = c
    return best


def select_combined(cands: list[SplitCandidate], gamma: float) -> SplitCandidate | None:
    """Candidate maximizing (1 - gamma) * G_Y - gamma * G_S, if positive."""
    best = None
    best_score = 0.0
    for c in cands:
        score = (1.0 - gamma) * c.gain_y - gamma * c.gain_s
        if score > best_score:
            best = c
            best_score = score
    return best


def select_constrained(cands: list[SplitCandidate], gamma: float) -> SplitCandidate | None:
    """Best target gain among candidates with G_S <= gamma, if positive."""
    best = None
    for c in cands:
        if c.gain_s <= gamma and (best is None or c.gain_y > best.gain_y):
            best = c
    if best is None or best.gain_y <= 0.0:
        return None
    return best


class SearchTimeout(Exception):
    """Raised internally when a backtracking search exceeds its deadline."""


@dataclass(frozen=True)
class BacktrackResult:
    tree: Tree
    timed_out: bool = False


def backtracking_build(
    subset: Subset,
    gamma: float,
    limits: GrowthLimits,
    depth: int = 0,
    *,
    leaf_at_depth_limit: bool = True,
    deadline: float | None = None,
) -> TreeNode | None:
    """Build a fairness-constrained node, backtracking on infeasible subtrees.

    Returns None when the node has admissible candidates but none with
    G_S <= gamma can head a completable subtree; the caller then abandons
    the split that produced this node. A node with no admissible candidates
    is a leaf. ``leaf_at_depth_limit=False`` treats the depth limit as a
    candidate failure instead of a leaf (a stricter search than the default).
    """
    if deadline is not None and time.monotonic() > deadline:
        raise SearchTimeout
    cands = split_candidates(subset, limits)
    if not cands:
        return Leaf(p1=subset.prior(), count=subset.n)
    valid = [c for c in cands if c.gain_s <= gamma]
    if not valid:
        return None
    if depth + 1 >= limits.max_depth:
        if leaf_at_depth_limit:
            return Leaf(p1=subset.prior(), count=subset.n)
        return None
    ranked = sorted((c for c in valid if c.gain_y > 0.0), key=lambda c: -c.gain_y)
    if not ranked:
        # fair splits exist but none informs y: stop, as the constrained policy does
        return Leaf(p1=subset.prior(), count=subset.n)
    for cand in ranked:
        left_sub, right_sub = subset.partition(cand.column_index, cand.split.threshold)
        left = backtracking_build(
            left_sub, gamma, limits, depth + 1,
            leaf_at_depth_limit=leaf_at_depth_limit, deadline=deadline,
        )
        if left is None:
            continue
        right = backtracking_build(
            right_sub, gamma, limits, depth + 1,
            leaf_at_depth_limit=leaf_at_depth_limit, deadline=deadline,
        )
        if right is None:
            continue
        return Internal(split=cand.split, column_index=cand.column_index,
                        left=left, right=right)
    return None


def backtracking_train(
    dataset,
    gamma: float,
    limits: GrowthLimits,
    time_budget: float | None = None,
    *,
    leaf_at_depth_limit: bool = True,
) -> BacktrackResult:
    """Run the backtracking builder from the root.

    A root failure yields the empty tree (predicting the training prior),
    as does exceeding ``time_budget`` seconds; the latter sets ``timed_out``.
    """
    subset = dataset.root_subset()
    prior = subset.prior()
    deadline = None if time_budget is None else time.monotonic() + float(time_budget)
    try:
        root = backtracking_build(
            subset, gamma, limits,
            leaf_at_depth_limit=leaf_at_depth_limit, deadline=deadline,
        )
    except SearchTimeout:
        return BacktrackResult(
            Tree(root=None, default_p1=prior, feature_names=dataset.feature_names),
            timed_out=True,
        )
    return BacktrackResult(
        Tree(root=root, default_p1=prior, feature_names=dataset.feature_names)
    )


def constrained_grow_tree(dataset, gamma: float, limits: GrowthLimits) -> Tree:
    """Greedy constrained tree without backtracking (for comparison runs)."""
    return fit_tree(dataset, PolicyConfig("constrained", gamma).selector(), limits)


def audit_sensitive_gains(tree: Tree, dataset):
    """Recompute G_S at every internal node on its training subset.

    Returns a list of (split, gain_s) walked depth-first; used to verify
    that constrained builders never exceed their gamma.
    """
    out = []

    def walk(node, subset):
        if not isinstance(node, Internal):
            return
        out.append((node.split, info_gain(subset, "s", node.split)))
        left_sub, right_sub = subset.partition(node.column_index, node.split.threshold)
        walk(node.left, left_sub)
        walk(node.right, right_sub)

    if tree.root is not None:
        walk(tree.root, dataset.root_subset())
    return out
