"""Linear distances: exact for the discrete metrics, bracketed otherwise.

Trace inclusion is decided by a subset construction: pair each state
reachable from ``s`` with the set of ``t``-states that can have produced
the same trace so far.  Traces of a finite non-blocking system form a
safety language, so infinite-trace inclusion fails exactly when some
reachable pair has an empty right-hand set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

from .game import bounded_blind_value
from .metrics import Accumulator, EQUALITY, LabelPreorder, TraceMetric, eval_exact, preorder_ground
from .values import INF, is_inf
from .wts import WeightedTransitionSystem, enumerate_lassos, trace_of_lasso_path


class Method(enum.Enum):
    EXACT = "EXACT"
    BRACKET = "BRACKET"
    LOWER_ONLY = "LOWER_ONLY"
    ESTIMATE = "ESTIMATE"


class SubsetState(NamedTuple):
    left: str
    right: frozenset


@dataclass(frozen=True)
class LinearBound:
    lower: object
    upper: object
    depth: int
    method: Method

    def __post_init__(self):
        assert self.lower <= self.upper


def linear_discrete(sys: WeightedTransitionSystem, s: str, t: str,
                    preorder: Optional[LabelPreorder] = None, antichain: bool = False):
    """0 if every trace from ``s`` is matched index-wise by one from ``t``, else inf.

    With ``preorder`` a match needs ``x ⊑ y`` rather than ``x = y``.
    ``antichain`` skips pairs subsumed by an already-seen pair with the
    same left state and a smaller right set.
    """
    sys.check_state(s)
    sys.check_state(t)
    ground = EQUALITY if preorder is None else preorder_ground(preorder)
    start = SubsetState(s, frozenset([t]))
    seen = {start}
    todo = [start]
    while todo:
        cur = todo.pop()
        for tr1 in sys.out(cur.left):
            right = frozenset(
                tr2.target
                for v in cur.right
                for tr2 in sys.out(v)
                if ground(tr1.weight, tr2.weight) == 0
            )
            if not right:
                return INF
            nxt = SubsetState(tr1.target, right)
            if nxt in seen:
                continue
            if antichain and any(o.left == nxt.left and o.right <= nxt.right for o in seen):
                continue
            seen.add(nxt)
            todo.append(nxt)
    return Fraction(0)


def _max_ground(sys: WeightedTransitionSystem, m: TraceMetric):
    ws = sys.weights()
    return max(m.ground(x, y) for x in ws for y in ws)


def linear_bound(sys: WeightedTransitionSystem, s: str, t: str, m: TraceMetric, k: int,
                 max_nodes: Optional[int] = None) -> LinearBound:
    """Certified bracket on the linear distance from depth-k blind play.

    The lower end is the depth-k blind value.  The upper end is the
    truncation tail for discounted metrics, the exact inclusion answer for
    discrete ones, and otherwise unknown (reported as LOWER_ONLY).
    """
    if k < 1:
        raise ValueError("depth must be at least 1")
    lower = bounded_blind_value(sys, s, t, m, k, max_nodes)
    acc = m.accumulator
    if acc is Accumulator.DISCOUNTED_SUM:
        if is_inf(lower):
            return LinearBound(lower, lower, k, Method.EXACT)
        w = _max_ground(sys, m)
        upper = INF if is_inf(w) else lower + m.lam**k * w / (1 - m.lam)
        return LinearBound(lower, upper, k, Method.EXACT if upper == lower else Method.BRACKET)
    if acc is Accumulator.DISCRETE:
        exact = linear_discrete(sys, s, t, m.preorder)
        return LinearBound(lower, exact, k, Method.EXACT if exact == lower else Method.BRACKET)
    if is_inf(lower):
        return LinearBound(lower, lower, k, Method.EXACT)
    return LinearBound(lower, lower, k, Method.LOWER_ONLY)


def linear_lasso_estimate(sys: WeightedTransitionSystem, s: str, t: str, m: TraceMetric,
                          max_prefix: int, max_cycle: int):
    """sup over s-lassos of inf over t-lassos, both within the given bounds.

    Restricting the sup lowers the result and restricting the inf raises
    it, so this is an estimate with no one-sided guarantee.
    """
    left = [trace_of_lasso_path(p) for p in enumerate_lassos(sys, s, max_prefix, max_cycle)]
    right = [trace_of_lasso_path(p) for p in enumerate_lassos(sys, t, max_prefix, max_cycle)]
    best = Fraction(0)
    for a in left:
        worst = min((eval_exact(m, a, b) for b in right), default=INF)
        best = max(best, worst)
    return best
