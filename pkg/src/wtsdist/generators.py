"""Instance construction: the linear/branching separation witness and random systems."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .metrics import TraceMetric, eval_exact
from .values import to_rational
from .wts import LassoTrace, Transition, Weight, WeightedTransitionSystem


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class IneqSpec:
    sigma: LassoTrace
    tau: LassoTrace
    metric: TraceMetric

    def violations(self) -> list:
        out = []
        if self.sigma[0] != self.tau[0]:
            out.append(f"heads differ: {self.sigma[0]} vs {self.tau[0]}")
        if eval_exact(self.metric, self.sigma, self.tau) <= 0:
            out.append("d(sigma, tau) = 0")
        if eval_exact(self.metric, self.tau, self.sigma) <= 0:
            out.append("d(tau, sigma) = 0")
        return out


class _Builder:
    def __init__(self):
        self.states = []
        self.transitions = []

    def fresh(self) -> str:
        name = f"q{len(self.states)}"
        self.states.append(name)
        return name

    def realize(self, trace: LassoTrace, start: str, min_prefix: int) -> None:
        """Hang a fresh deterministic lasso spelling ``trace`` off ``start``."""
        pre, cyc = list(trace.prefix), list(trace.cycle)
        while len(pre) < min_prefix:
            pre.append(cyc[0])
            cyc = cyc[1:] + cyc[:1]
        cur = start
        for w in pre:
            nxt = self.fresh()
            self.transitions.append(Transition(cur, w, nxt))
            cur = nxt
        loop = cur
        for i, w in enumerate(cyc):
            nxt = loop if i == len(cyc) - 1 else self.fresh()
            self.transitions.append(Transition(cur, w, nxt))
            cur = nxt


def build_inequivalence(spec: IneqSpec) -> tuple:
    """States ``s`` and ``t`` with equal trace sets but positive branching distance.

    ``s`` takes the shared head and only then branches into the two
    tails; ``t`` branches immediately into the two whole traces.
    Returns ``(system, "s", "t")``.
    """
    bad = spec.violations()
    if bad:
        raise PreconditionError("not a discriminating pair: " + "; ".join(bad))
    b = _Builder()
    b.states += ["s", "t"]
    mid = b.fresh()
    b.transitions.append(Transition("s", spec.sigma[0], mid))
    b.realize(spec.sigma.tail(1), mid, 1)
    b.realize(spec.tau.tail(1), mid, 1)
    b.realize(spec.sigma, "t", 1)
    b.realize(spec.tau, "t", 1)
    labels = spec.sigma.labels() | spec.tau.labels()
    alphabet = None if labels == {None} else tuple(sorted(labels))
    return WeightedTransitionSystem(tuple(b.states), tuple(b.transitions), alphabet), "s", "t"


def weight_grid(lo, hi, denominator: int = 1) -> list:
    lo, hi = to_rational(lo), to_rational(hi)
    if hi < lo:
        raise ValueError("empty weight range")
    steps = int((hi - lo) * denominator)
    return [lo + Fraction(i, denominator) for i in range(steps + 1)]


def random_wts(n: int, max_out: int, alphabet_size: int, weight_range=(0, 1), seed: int = 0,
               denominator: int = 1) -> WeightedTransitionSystem:
    """Seeded random non-blocking system with weights on a ``1/denominator`` grid."""
    if n < 1 or max_out < 1:
        raise ValueError("need n >= 1 and max_out >= 1")
    rng = random.Random(seed)
    states = tuple(f"q{i}" for i in range(n))
    alphabet = tuple(chr(ord("a") + i) for i in range(alphabet_size)) if alphabet_size > 0 else None
    grid = weight_grid(weight_range[0], weight_range[1], denominator)
    trs = []
    for s in states:
        for _ in range(rng.randint(1, max_out)):
            label = rng.choice(alphabet) if alphabet else None
            trs.append(Transition(s, Weight(label, rng.choice(grid)), rng.choice(states)))
    return WeightedTransitionSystem(states, tuple(trs), alphabet)


def random_lasso(rng: random.Random, labels: Sequence[Optional[str]], grid: Sequence[Fraction],
                 max_prefix: int = 3, max_cycle: int = 3) -> LassoTrace:
    def item():
        return Weight(rng.choice(list(labels)), rng.choice(list(grid)))

    pre = tuple(item() for _ in range(rng.randint(0, max_prefix)))
    cyc = tuple(item() for _ in range(rng.randint(1, max_cycle)))
    return LassoTrace(pre, cyc)
