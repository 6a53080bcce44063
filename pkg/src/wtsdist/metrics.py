"""Trace distances on lasso traces.

Every distance here is a ground distance on single weights lifted to
traces by an accumulator.  ``eval_exact`` uses the closed forms that hold
once both lassos share prefix and cycle length; ``eval_truncated`` looks
only at the first ``k`` indices and is what the bounded game oracles pay
out.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .values import INF, is_inf, to_rational
from .wts import LassoTrace, Weight, align


class MetricError(ValueError):
    pass


class Accumulator(enum.Enum):
    DISCRETE = "discrete"
    SUP = "sup"
    DISCOUNTED_SUM = "discounted"
    LIMAVG = "limavg"
    MAXLEAD = "maxlead"


@dataclass(frozen=True)
class LabelPreorder:
    """A reflexive, transitive relation on label symbols.

    ``pairs`` holds the non-reflexive part; :meth:`closure` builds one from
    arbitrary generating pairs.
    """

    pairs: frozenset = frozenset()

    def __post_init__(self):
        pairs = frozenset((a, b) for a, b in self.pairs if a != b)
        for a, b in pairs:
            for c, d in pairs:
                if b == c and a != d and (a, d) not in pairs:
                    raise MetricError(f"preorder not transitive: {a}<={b}<={d}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def closure(cls, pairs) -> "LabelPreorder":
        rel = {(a, b) for a, b in pairs if a != b}
        changed = True
        while changed:
            changed = False
            for a, b in list(rel):
                for c, d in list(rel):
                    if b == c and a != d and (a, d) not in rel:
                        rel.add((a, d))
                        changed = True
        return cls(frozenset(rel))

    @classmethod
    def parse(cls, text: str) -> "LabelPreorder":
        """``"a<=b, b<=c"`` -> reflexive-transitive closure."""
        pairs = []
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            if "<=" not in part:
                raise MetricError(f"preorder items look like 'a<=b', got {part!r}")
            lo, hi = part.split("<=", 1)
            pairs.append((lo.strip(), hi.strip()))
        return cls.closure(pairs)

    def leq(self, a, b) -> bool:
        return a == b or (a, b) in self.pairs


IDENTITY_PREORDER = LabelPreorder()


@dataclass(frozen=True)
class GroundMetric:
    name: str
    eval: Callable[[Weight, Weight], object]

    def __call__(self, x: Weight, y: Weight):
        return self.eval(x, y)


def _eq(x, y):
    return Fraction(0) if x == y else INF


def _hamming(x, y):
    return Fraction(0) if x == y else Fraction(1)


def _guarded_abs(x, y):
    if x.label != y.label:
        return INF
    return abs(x.weight - y.weight)


EQUALITY = GroundMetric("eq", _eq)
HAMMING = GroundMetric("hamming", _hamming)
GUARDED_ABS = GroundMetric("guarded-abs", _guarded_abs)


def preorder_ground(pre: LabelPreorder) -> GroundMetric:
    """0 where the left weight may be replaced by the right one, inf elsewhere.

    Replacement needs the label pair in the preorder and equal numeric weights.
    """

    def ev(x, y):
        if x.weight == y.weight and pre.leq(x.label, y.label):
            return Fraction(0)
        return INF

    return GroundMetric("preorder", ev)


@dataclass(frozen=True)
class TraceMetric:
    name: str
    accumulator: Accumulator
    ground: GroundMetric
    lam: Optional[Fraction] = None
    preorder: Optional[LabelPreorder] = None

    def __post_init__(self):
        if (self.lam is not None) != (self.accumulator is Accumulator.DISCOUNTED_SUM):
            raise MetricError("a discount factor is given exactly for discounted metrics")
        if self.lam is not None and not (0 <= self.lam < 1):
            raise MetricError(f"discount factor must lie in [0, 1), got {self.lam}")

    @property
    def descriptor(self) -> str:
        if self.lam is not None:
            return f"{self.name}:{self.lam}"
        return self.name

    @property
    def needs_labels_equal(self) -> bool:
        return self.ground is GUARDED_ABS

    def __str__(self):
        return self.descriptor


def discrete() -> TraceMetric:
    return TraceMetric("discrete", Accumulator.DISCRETE, EQUALITY)


def discrete_pre(pre: LabelPreorder = IDENTITY_PREORDER) -> TraceMetric:
    return TraceMetric("discrete-pre", Accumulator.DISCRETE, preorder_ground(pre), preorder=pre)


def hamming_limavg() -> TraceMetric:
    return TraceMetric("hamming-davg", Accumulator.LIMAVG, HAMMING)


def hamming_discounted(lam) -> TraceMetric:
    return TraceMetric("hamming-disc", Accumulator.DISCOUNTED_SUM, HAMMING, to_rational(lam))


def hamming_sup() -> TraceMetric:
    return TraceMetric("hamming-sup", Accumulator.SUP, HAMMING)


def pointwise() -> TraceMetric:
    return TraceMetric("pointwise", Accumulator.SUP, GUARDED_ABS)


def acc_discounted(lam) -> TraceMetric:
    return TraceMetric("acc-disc", Accumulator.DISCOUNTED_SUM, GUARDED_ABS, to_rational(lam))


def acc_limavg() -> TraceMetric:
    return TraceMetric("acc-lavg", Accumulator.LIMAVG, GUARDED_ABS)


def maxlead() -> TraceMetric:
    return TraceMetric("maxlead", Accumulator.MAXLEAD, GUARDED_ABS)


_PLAIN = {
    "discrete": discrete,
    "hamming-davg": hamming_limavg,
    "hamming-sup": hamming_sup,
    "pointwise": pointwise,
    "acc-lavg": acc_limavg,
    "maxlead": maxlead,
}
_DISCOUNTED = {"hamming-disc": hamming_discounted, "acc-disc": acc_discounted}

METRIC_NAMES = ("discrete", "discrete-pre", "hamming-davg", "hamming-disc:λ", "hamming-sup",
                "pointwise", "acc-disc:λ", "acc-lavg", "maxlead")


def parse_metric(desc: str, preorder: Optional[LabelPreorder] = None) -> TraceMetric:
    """Build a metric from a CLI descriptor such as ``"acc-disc:1/2"``."""
    desc = desc.strip()
    name, _, arg = desc.partition(":")
    if name == "discrete-pre":
        return discrete_pre(preorder or IDENTITY_PREORDER)
    if name in _PLAIN:
        if arg:
            raise MetricError(f"metric {name} takes no parameter")
        return _PLAIN[name]()
    if name in _DISCOUNTED:
        if not arg:
            raise MetricError(f"metric {name} needs a discount factor, e.g. {name}:1/2")
        try:
            lam = to_rational(arg)
        except ValueError as exc:
            raise MetricError(str(exc)) from None
        return _DISCOUNTED[name](lam)
    raise MetricError(f"unknown metric {desc!r}; known: {', '.join(METRIC_NAMES)}")


# -- evaluation ----------------------------------------------------------------


def _check_labels(m: TraceMetric, *traces: LassoTrace) -> None:
    if not m.needs_labels_equal:
        return
    kinds = {lab is None for t in traces for lab in t.labels()}
    if len(kinds) > 1:
        raise MetricError(f"{m.name} needs both traces labeled alike (all labeled or all unlabeled)")


def _partial_leads(a: Sequence[Weight], b: Sequence[Weight]) -> list:
    leads, acc = [], Fraction(0)
    for x, y in zip(a, b):
        acc += x.weight - y.weight
        leads.append(acc)
    return leads


def eval_exact(m: TraceMetric, a: LassoTrace, b: LassoTrace):
    """Exact value of the trace distance between two infinite lasso traces."""
    _check_labels(m, a, b)
    a, b = align(a, b)
    P, C = len(a.prefix), len(a.cycle)
    xs = a.prefix + a.cycle
    ys = b.prefix + b.cycle
    ds = [m.ground(x, y) for x, y in zip(xs, ys)]
    acc = m.accumulator
    if acc is Accumulator.DISCRETE:
        return Fraction(0) if all(d == 0 for d in ds) else INF
    if any(is_inf(d) for d in ds):
        return INF
    if acc is Accumulator.SUP:
        return max(ds)
    if acc is Accumulator.DISCOUNTED_SUM:
        lam = m.lam
        head = sum((lam**j * ds[j] for j in range(P)), Fraction(0))
        period = sum((lam**i * ds[P + i] for i in range(C)), Fraction(0))
        return head + lam**P * period / (1 - lam**C)
    if acc is Accumulator.LIMAVG:
        return Fraction(sum(ds[P:], Fraction(0)), C)
    if acc is Accumulator.MAXLEAD:
        drift = sum((x.weight - y.weight for x, y in zip(a.cycle, b.cycle)), Fraction(0))
        if drift != 0:
            return INF
        return max(abs(d) for d in _partial_leads(xs, ys))
    raise MetricError(f"unsupported accumulator {acc}")


def eval_truncated(m: TraceMetric, a: Sequence[Weight], b: Sequence[Weight], k: int):
    """The metric's formula restricted to indices ``< k``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if len(a) < k or len(b) < k:
        raise MetricError(f"sequences shorter than k={k}")
    a, b = list(a[:k]), list(b[:k])
    ds = [m.ground(x, y) for x, y in zip(a, b)]
    acc = m.accumulator
    if acc is Accumulator.DISCRETE:
        return Fraction(0) if all(d == 0 for d in ds) else INF
    if any(is_inf(d) for d in ds):
        return INF
    if k == 0:
        return Fraction(0)
    if acc is Accumulator.SUP:
        return max(ds)
    if acc is Accumulator.DISCOUNTED_SUM:
        return sum((m.lam**j * d for j, d in enumerate(ds)), Fraction(0))
    if acc is Accumulator.LIMAVG:
        return Fraction(sum(ds, Fraction(0)), k)
    if acc is Accumulator.MAXLEAD:
        return max(abs(d) for d in _partial_leads(a, b))
    raise MetricError(f"unsupported accumulator {acc}")


def is_one_step_discriminating_witness(m: TraceMetric, a: LassoTrace, b: LassoTrace) -> bool:
    """True iff the pair shows ``m`` is not one-step indiscriminate."""
    return a[0] == b[0] and eval_exact(m, a, b) > 0 and eval_exact(m, b, a) > 0
