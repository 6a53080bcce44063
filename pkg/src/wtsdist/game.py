"""The simulation game: configurations, strategies, rounds and bounded oracles.

Player 1 extends a path from ``s``, then Player 2, having seen that move,
extends a path from ``t``.  Player 1 is paid the trace distance between
the two traces built.  The oracles here solve the game truncated at depth
``k`` by exhaustive search and exist to cross-check the fixed-point engine.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Optional

from .metrics import Accumulator, TraceMetric, eval_truncated
from .values import INF, is_inf, scale
from .wts import FinitePath, LassoPath, Transition, WeightedTransitionSystem

DEFAULT_MAX_NODES = 5_000_000


class StrategyViolation(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


def max_nodes_from_env() -> int:
    raw = os.environ.get("WTSDIST_MAX_NODES")
    return int(raw) if raw else DEFAULT_MAX_NODES


@dataclass(frozen=True)
class Configuration:
    p1: FinitePath
    p2: FinitePath

    @classmethod
    def initial(cls, s: str, t: str) -> "Configuration":
        return cls(FinitePath(s), FinitePath(t))


Strategy = Callable[[Configuration], Transition]


@dataclass(frozen=True)
class Playout:
    p1: FinitePath
    p2: FinitePath

    @property
    def traces(self) -> tuple:
        return self.p1.trace(), self.p2.trace()

    def __len__(self):
        return len(self.p1)


def _checked(tr: Transition, at: str, who: str, sys: Optional[WeightedTransitionSystem]) -> Transition:
    if tr.source != at:
        raise StrategyViolation(f"{who} moved from {tr.source}, but its path ends in {at}")
    if sys is not None and tr not in sys.out(at):
        raise StrategyViolation(f"{who} chose {tr}, which is not a transition of the system")
    return tr


def play_round(theta1: Strategy, theta2: Strategy, c: Configuration,
               sys: Optional[WeightedTransitionSystem] = None) -> Configuration:
    """One round: Player 1 moves, then Player 2 answers seeing that move."""
    tr1 = _checked(theta1(c), c.p1.last, "player 1", sys)
    mid = Configuration(c.p1.extend(tr1), c.p2)
    tr2 = _checked(theta2(mid), c.p2.last, "player 2", sys)
    return Configuration(mid.p1, c.p2.extend(tr2))


def playout(theta1: Strategy, theta2: Strategy, s: str, t: str, k: int,
            sys: Optional[WeightedTransitionSystem] = None) -> Playout:
    if k < 0:
        raise ValueError("k must be nonnegative")
    c = Configuration.initial(s, t)
    for _ in range(k):
        c = play_round(theta1, theta2, c, sys)
    return Playout(c.p1, c.p2)


class BlindStrategy1:
    """A Player-1 strategy that ignores Player 2: it just walks a lasso path."""

    def __init__(self, path: LassoPath, sys: Optional[WeightedTransitionSystem] = None):
        if sys is not None and not path.valid_in(sys):
            raise StrategyViolation("blind strategy path is not a path of the system")
        self.path = path

    def __call__(self, c: Configuration) -> Transition:
        return self.path.transition(len(c.p1))


class MemoryStrategy2:
    """Player-2 strategy carrying extra memory between rounds.

    ``choose(config, memory) -> (transition, memory)``.  Memory is a pure
    function of the history, so :meth:`__call__` replays it from the
    initial value; no state is kept on the object.
    """

    def __init__(self, initial: Any, choose: Callable[[Configuration, Any], tuple]):
        self.initial = initial
        self.choose = choose

    def __call__(self, c: Configuration) -> Transition:
        mem = self.initial
        for i in range(len(c.p2)):
            seen = Configuration(FinitePath(c.p1.start, c.p1.steps[: i + 1]),
                                 FinitePath(c.p2.start, c.p2.steps[:i]))
            _, mem = self.choose(seen, mem)
        tr, _ = self.choose(c, mem)
        return tr


def first_choice(sys: WeightedTransitionSystem, player: int) -> Strategy:
    """Always take the first outgoing transition (a deterministic default)."""

    def choose(c: Configuration) -> Transition:
        end = c.p1.last if player == 1 else c.p2.last
        return sys.out(end)[0]

    return choose


def weight_copier(sys: WeightedTransitionSystem) -> Strategy:
    """Player 2 repeats Player 1's last weight when it can."""

    def choose(c: Configuration) -> Transition:
        want = c.p1.steps[-1].weight
        options = sys.out(c.p2.last)
        for tr in options:
            if tr.weight == want:
                return tr
        return options[0]

    return choose


def mimic_strategy(sys: WeightedTransitionSystem) -> Strategy:
    """Player 2 copies Player 1 transition for transition (needs s = t)."""

    def choose(c: Configuration) -> Transition:
        if c.p1.steps[:-1] == c.p2.steps and c.p1.start == c.p2.start:
            return c.p1.steps[-1]
        return sys.out(c.p2.last)[0]

    return choose


# -- bounded oracles -------------------------------------------------------------


class _Budget:
    def __init__(self, limit: Optional[int]):
        self.limit = max_nodes_from_env() if limit is None else limit
        self.used = 0

    def tick(self):
        self.used += 1
        if self.used > self.limit:
            raise BudgetExceeded(f"oracle exceeded node cap {self.limit} (set WTSDIST_MAX_NODES)")


def bounded_value_tree(sys: WeightedTransitionSystem, s: str, t: str, m: TraceMetric, k: int,
                       max_nodes: Optional[int] = None):
    """Depth-k game value by plain search over the full game tree.

    Each leaf is a complete history, paid with ``eval_truncated``.  No
    memoisation; only usable for small ``k``.
    """
    sys.check_state(s)
    sys.check_state(t)
    budget = _Budget(max_nodes)

    def node(u, v, xs, ys):
        budget.tick()
        if len(xs) == k:
            return eval_truncated(m, xs, ys, k)
        best = Fraction(0)
        for tr1 in sys.out(u):
            worst = INF
            for tr2 in sys.out(v):
                worst = min(worst, node(tr1.target, tr2.target, xs + (tr1.weight,), ys + (tr2.weight,)))
                if worst == 0:
                    break
            best = max(best, worst)
            if is_inf(best):
                break
        return best

    return node(s, t, (), ())


def bounded_value(sys: WeightedTransitionSystem, s: str, t: str, m: TraceMetric, k: int,
                  max_nodes: Optional[int] = None):
    """Depth-k sup-inf value of the simulation game.

    Subgames are memoised on the state pair, the remaining depth and the
    part of the history the payoff still depends on: nothing for
    discrete/sup/discounted/limit-average (the past enters monotonically
    or additively) and the current lead for maximum lead.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    sys.check_state(s)
    sys.check_state(t)
    budget = _Budget(max_nodes)
    acc = m.accumulator
    g = m.ground
    memo: dict = {}

    def combine(x, y, j, lead, rest):
        d = g(x, y)
        if acc is Accumulator.DISCRETE:
            return INF if d != 0 else rest(lead)
        if is_inf(d):
            return INF
        if acc is Accumulator.SUP:
            return max(d, rest(lead))
        if acc is Accumulator.DISCOUNTED_SUM:
            return d + scale(m.lam, rest(lead))
        if acc is Accumulator.LIMAVG:
            return d + rest(lead)
        new_lead = lead + x.weight - y.weight
        return max(abs(new_lead), rest(new_lead))

    def W(u, v, r, lead):
        if r == 0:
            return Fraction(0)
        key = (u, v, r, lead)
        hit = memo.get(key)
        if hit is not None:
            return hit
        budget.tick()
        best = Fraction(0)
        for tr1 in sys.out(u):
            worst = INF
            for tr2 in sys.out(v):
                val = combine(tr1.weight, tr2.weight, k - r, lead,
                              lambda l2: W(tr1.target, tr2.target, r - 1, l2))
                worst = min(worst, val)
                if worst == 0:
                    break
            best = max(best, worst)
            if is_inf(best):
                break
        memo[key] = best
        return best

    lead0 = Fraction(0) if acc is Accumulator.MAXLEAD else None
    val = W(s, t, k, lead0)
    if acc is Accumulator.LIMAVG and k > 0 and not is_inf(val):
        return val / k
    return val


def bounded_blind_values(sys: WeightedTransitionSystem, s: str, t: str, m: TraceMetric, kmax: int,
                         max_nodes: Optional[int] = None) -> list:
    """Blind depth-j values for every ``j <= kmax`` in one pass.

    Player 1 commits to a path; Player 2's best reply to a known path is
    computed forward as a frontier of cheapest partial payoffs per
    reachable state (and lead, for maximum lead).
    """
    if kmax < 0:
        raise ValueError("k must be nonnegative")
    sys.check_state(s)
    sys.check_state(t)
    budget = _Budget(max_nodes)
    acc = m.accumulator
    g = m.ground
    lead_keyed = acc is Accumulator.MAXLEAD
    values = [Fraction(0)] * (kmax + 1)
    start = {(t, Fraction(0)) if lead_keyed else t: Fraction(0)}

    def advance(frontier: dict, x, j: int) -> dict:
        new: dict = {}
        for key, val in frontier.items():
            v = key[0] if lead_keyed else key
            for tr2 in sys.out(v):
                y = tr2.weight
                d = g(x, y)
                if acc is Accumulator.DISCRETE:
                    if d != 0:
                        continue
                    nk, nv = tr2.target, Fraction(0)
                elif is_inf(d):
                    continue
                elif acc is Accumulator.SUP:
                    nk, nv = tr2.target, max(val, d)
                elif acc is Accumulator.DISCOUNTED_SUM:
                    nk, nv = tr2.target, val + m.lam**j * d
                elif acc is Accumulator.LIMAVG:
                    nk, nv = tr2.target, val + d
                else:
                    lead = key[1] + x.weight - y.weight
                    nk, nv = (tr2.target, lead), max(val, abs(lead))
                old = new.get(nk)
                if old is None or nv < old:
                    new[nk] = nv
        return new

    limit = kmax

    def dfs(u: str, j: int, frontier: dict):
        nonlocal limit
        if j >= limit:
            return
        for tr1 in sys.out(u):
            budget.tick()
            new = advance(frontier, tr1.weight, j)
            if not new:
                # every reply is already infinite; so is every deeper depth,
                # and only shallower depths still need exploring
                for i in range(j + 1, kmax + 1):
                    values[i] = INF
                limit = j
                return
            best = min(new.values())
            if acc is Accumulator.LIMAVG:
                best = best / (j + 1)
            if best > values[j + 1]:
                values[j + 1] = best
            dfs(tr1.target, j + 1, new)
            if j >= limit:
                return

    dfs(s, 0, start)
    return values


def bounded_blind_value(sys: WeightedTransitionSystem, s: str, t: str, m: TraceMetric, k: int,
                        max_nodes: Optional[int] = None):
    """max over length-k paths from s of min over length-k paths from t."""
    return bounded_blind_values(sys, s, t, m, k, max_nodes)[k]


def paths_of_length(sys: WeightedTransitionSystem, s: str, k: int) -> list:
    out = [FinitePath(s)]
    for _ in range(k):
        out = [p.extend(tr) for p in out for tr in sys.out(p.last)]
    return out


def bounded_blind_value_bruteforce(sys: WeightedTransitionSystem, s: str, t: str, m: TraceMetric, k: int):
    """Reference blind value by enumerating both path sets outright."""
    lefts = paths_of_length(sys, s, k)
    rights = [p.trace() for p in paths_of_length(sys, t, k)]
    return max(min(eval_truncated(m, p.trace(), r, k) for r in rights) for p in lefts)
