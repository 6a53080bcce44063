"""Linear and branching distances between states of weighted transition systems."""

from .fixpoint import (
    Interval,
    Policy,
    Status,
    branching_distance,
    discrete_simulation_check,
    greatest_simulation,
    iterator_for,
    kleene_lfp,
    solve_branching,
)
from .game import bounded_blind_value, bounded_value
from .generators import IneqSpec, build_inequivalence, random_wts
from .linear import linear_bound, linear_discrete, linear_lasso_estimate
from .metrics import LabelPreorder, TraceMetric, eval_exact, eval_truncated, parse_metric
from .values import INF
from .wts import (
    LassoPath,
    LassoTrace,
    WeightedTransitionSystem,
    Weight,
    align,
    enumerate_lassos,
    load_wts,
    parse_wts,
    serialize_wts,
)

__version__ = "0.1.0"

__all__ = [
    "INF", "IneqSpec", "Interval", "LabelPreorder", "LassoPath", "LassoTrace", "Policy", "Status",
    "TraceMetric", "Weight", "WeightedTransitionSystem", "align", "bounded_blind_value", "bounded_value",
    "branching_distance", "build_inequivalence", "discrete_simulation_check", "enumerate_lassos",
    "eval_exact", "eval_truncated", "greatest_simulation", "iterator_for", "kleene_lfp",
    "linear_bound", "linear_discrete", "linear_lasso_estimate", "load_wts", "parse_metric",
    "parse_wts", "random_wts", "serialize_wts", "solve_branching",
]
