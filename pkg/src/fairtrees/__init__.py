"""Fairness-aware decision trees and trade-off curve benchmarking.

The library spans the design space of fair tree learning: a single tree
with a combined performance/fairness objective, a single tree with a hard
fairness constraint (optionally with backtracking search), and a dual-tree
model that blends a performance tree with a fairness tree at predict time.
It also carries the evaluation protocol: trade-off curves over a gamma
sweep, curve summary measures, and a repeated-holdout harness with inner
cross-validated hyperparameter selection.
"""

from ._kernel import BACKEND
from .data import (
    ColumnSpec,
    DataError,
    Dataset,
    SchemaError,
    ThresholdSet,
    enumerate_thresholds,
    holdout_split,
    k_folds,
    load_csv,
    parse_schema,
    synth_biased,
)
from .dual import DualModel, combine_predict, combine_predict_batch, train_dual
from .harness import (
    ExperimentConfig,
    HyperGrid,
    MethodSpec,
    gamma_grid,
    run_experiment,
    runtime_benchmark,
)
from .metrics import (
    CurveMetrics,
    TradeoffCurve,
    TradeoffPoint,
    auroc,
    autoc,
    build_curve,
    curve_metrics,
    pareto_count,
    spd,
    unique_count,
    unique_pareto_count,
    variance_pairwise,
    welch_t_test,
)
from .policies import (
    BacktrackResult,
    PolicyConfig,
    backtracking_build,
    backtracking_train,
    select_combined,
    select_constrained,
    select_fairness_min,
    select_performance,
)
from .tree import (
    GrowthLimits,
    Split,
    SplitCandidate,
    Tree,
    entropy,
    fit_tree,
    grow,
    info_gain,
    predict,
    predict_proba,
    predict_proba_batch,
    tree_from_dict,
    tree_to_dict,
    tree_to_text,
)

__version__ = "0.1.0"
