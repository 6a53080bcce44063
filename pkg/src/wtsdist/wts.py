"""Weighted transition systems, paths and lasso-shaped traces.

Infinite paths and traces are only ever represented as lassos: a finite
prefix followed by a nonempty cycle repeated forever.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, NamedTuple, Optional, Sequence

from .values import to_rational


class WTSError(ValueError):
    """Base class for malformed systems, documents and paths."""


class ParseError(WTSError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ValidationError(WTSError):
    pass


class Weight(NamedTuple):
    """One element of K: an optional discrete label and an exact weight."""

    label: Optional[str]
    weight: Fraction

    def __str__(self):
        if self.label is None:
            return str(self.weight)
        return f"{self.label}:{self.weight}"


def W(weight, label: Optional[str] = None) -> Weight:
    """Shorthand constructor accepting anything :func:`to_rational` does."""
    return Weight(label, to_rational(weight))


class Transition(NamedTuple):
    source: str
    weight: Weight
    target: str

    def __str__(self):
        return f"{self.source} -{self.weight}-> {self.target}"


def _sort_key(tr: Transition):
    return (tr.source, tr.weight.label or "", tr.weight.weight, tr.target)


@dataclass(frozen=True)
class WeightedTransitionSystem:
    states: tuple
    transitions: tuple
    alphabet: Optional[tuple] = None
    _out: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        states = tuple(self.states)
        if len(set(states)) != len(states):
            seen = set()
            for st in states:
                if st in seen:
                    raise ValidationError(f"duplicate state {st}")
                seen.add(st)
        alphabet = None if self.alphabet is None else tuple(self.alphabet)
        if alphabet is not None and len(set(alphabet)) != len(alphabet):
            raise ValidationError("duplicate symbol in alphabet")
        known = set(states)
        trs = []
        for tr in self.transitions:
            tr = Transition(tr[0], Weight(tr[1][0], to_rational(tr[1][1])), tr[2])
            for end in (tr.source, tr.target):
                if end not in known:
                    raise ValidationError(f"unknown state {end}")
            label = tr.weight.label
            if alphabet is None and label is not None:
                raise ValidationError(
                    f"mixed labeled/unlabeled weights: label {label} used but no alphabet declared"
                )
            if alphabet is not None:
                if label is None:
                    raise ValidationError(
                        f"mixed labeled/unlabeled weights: unlabeled transition from {tr.source}"
                    )
                if label not in alphabet:
                    raise ValidationError(f"label {label} outside alphabet")
            trs.append(tr)
        trs = tuple(sorted(set(trs), key=_sort_key))
        out = {st: [] for st in states}
        for tr in trs:
            out[tr.source].append(tr)
        for st in states:
            if not out[st]:
                raise ValidationError(f"blocking state {st}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "transitions", trs)
        object.__setattr__(self, "_out", {st: tuple(v) for st, v in out.items()})

    @property
    def labeled(self) -> bool:
        return self.alphabet is not None

    def out(self, state: str) -> tuple:
        try:
            return self._out[state]
        except KeyError:
            raise WTSError(f"unknown state {state}") from None

    def check_state(self, state: str) -> None:
        if state not in self._out:
            raise WTSError(f"unknown state {state}")

    def weights(self) -> set:
        return {tr.weight for tr in self.transitions}

    def to_document(self) -> dict:
        doc = {}
        if self.alphabet is not None:
            doc["alphabet"] = list(self.alphabet)
        doc["states"] = list(self.states)
        items = []
        for tr in self.transitions:
            item = {"from": tr.source}
            if tr.weight.label is not None:
                item["label"] = tr.weight.label
            item["weight"] = str(tr.weight.weight)
            item["to"] = tr.target
            items.append(item)
        doc["transitions"] = items
        return doc


def parse_wts(text: str) -> WeightedTransitionSystem:
    """Parse and validate a JSON system document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"syntax error: {exc.msg}", exc.lineno, exc.colno) from None
    return wts_from_document(doc)


def wts_from_document(doc) -> WeightedTransitionSystem:
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    unknown = set(doc) - {"alphabet", "states", "transitions"}
    if unknown:
        raise ParseError(f"unknown key(s): {', '.join(sorted(unknown))}")
    states = doc.get("states")
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise ParseError('"states" must be an array of strings')
    alphabet = doc.get("alphabet")
    if alphabet is not None and (
        not isinstance(alphabet, list) or not all(isinstance(a, str) for a in alphabet)
    ):
        raise ParseError('"alphabet" must be an array of strings')
    raw = doc.get("transitions", [])
    if not isinstance(raw, list):
        raise ParseError('"transitions" must be an array')
    transitions = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ParseError(f"transition #{i} must be an object")
        missing = {"from", "weight", "to"} - set(item)
        if missing:
            raise ParseError(f"transition #{i} lacks {', '.join(sorted(missing))}")
        extra = set(item) - {"from", "label", "weight", "to"}
        if extra:
            raise ParseError(f"transition #{i} has unknown key(s) {', '.join(sorted(extra))}")
        if isinstance(item["weight"], float):
            raise ParseError(f"transition #{i}: weight must be a string or integer, not a float")
        try:
            w = to_rational(item["weight"])
        except ValueError as exc:
            raise ParseError(f"transition #{i}: {exc}") from None
        label = item.get("label")
        if label is not None and not isinstance(label, str):
            raise ParseError(f"transition #{i}: label must be a string")
        transitions.append(Transition(item["from"], Weight(label, w), item["to"]))
    return WeightedTransitionSystem(tuple(states), tuple(transitions), alphabet)


def serialize_wts(sys: WeightedTransitionSystem, indent: int | None = 2) -> str:
    return json.dumps(sys.to_document(), indent=indent)


def load_wts(path) -> WeightedTransitionSystem:
    with open(path, encoding="utf-8") as fh:
        return parse_wts(fh.read())


# -- paths -------------------------------------------------------------------


@dataclass(frozen=True)
class FinitePath:
    start: str
    steps: tuple = ()

    def __post_init__(self):
        steps = tuple(self.steps)
        cur = self.start
        for i, tr in enumerate(steps):
            if tr.source != cur:
                raise WTSError(f"path step {i} leaves {tr.source}, expected {cur}")
            cur = tr.target
        object.__setattr__(self, "steps", steps)

    def __len__(self):
        return len(self.steps)

    @property
    def last(self) -> str:
        return self.steps[-1].target if self.steps else self.start

    def extend(self, tr: Transition) -> "FinitePath":
        return FinitePath(self.start, self.steps + (tr,))

    def trace(self) -> tuple:
        return tuple(tr.weight for tr in self.steps)

    def valid_in(self, sys: WeightedTransitionSystem) -> bool:
        return all(tr in sys.out(tr.source) for tr in self.steps)


def _primitive_root(seq: tuple) -> tuple:
    n = len(seq)
    for p in range(1, n + 1):
        if n % p == 0 and seq[:p] * (n // p) == seq:
            return seq[:p]
    return seq


def _canonical(prefix: tuple, cycle: tuple) -> tuple:
    cycle = _primitive_root(tuple(cycle))
    prefix = list(prefix)
    while prefix and prefix[-1] == cycle[-1]:
        prefix.pop()
        cycle = cycle[-1:] + cycle[:-1]
    return tuple(prefix), cycle


@dataclass(frozen=True, eq=False)
class LassoPath:
    """Ultimately periodic path ``prefix . cycle^omega``."""

    prefix: FinitePath
    cycle: FinitePath

    def __post_init__(self):
        if len(self.cycle) == 0:
            raise WTSError("lasso cycle must be nonempty")
        if self.cycle.start != self.prefix.last:
            raise WTSError("lasso cycle must start where the prefix ends")
        if self.cycle.last != self.cycle.start:
            raise WTSError("lasso cycle must return to its start")

    @property
    def start(self) -> str:
        return self.prefix.start

    def key(self) -> tuple:
        return (self.start,) + _canonical(self.prefix.steps, self.cycle.steps)

    def canonical(self) -> "LassoPath":
        start, pre, cyc = self.key()
        p = FinitePath(start, pre)
        return LassoPath(p, FinitePath(p.last, cyc))

    def __eq__(self, other):
        return isinstance(other, LassoPath) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def valid_in(self, sys: WeightedTransitionSystem) -> bool:
        return self.prefix.valid_in(sys) and self.cycle.valid_in(sys)

    def transition(self, j: int) -> Transition:
        p = len(self.prefix)
        if j < p:
            return self.prefix.steps[j]
        return self.cycle.steps[(j - p) % len(self.cycle)]

    def __repr__(self):
        pre = ", ".join(map(str, self.prefix.steps))
        cyc = ", ".join(map(str, self.cycle.steps))
        return f"LassoPath(<{self.start}> [{pre}] ; [{cyc}])"


@dataclass(frozen=True, eq=False)
class LassoTrace:
    """Ultimately periodic trace ``prefix . cycle^omega``.

    The stored shape is kept as given (``align`` relies on that); equality
    and hashing go through the canonical form, so two lassos compare equal
    exactly when their unrollings agree everywhere.
    """

    prefix: tuple
    cycle: tuple

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if not self.cycle:
            raise WTSError("lasso cycle must be nonempty")

    def key(self) -> tuple:
        return _canonical(self.prefix, self.cycle)

    def normalized(self) -> "LassoTrace":
        return LassoTrace(*self.key())

    def __eq__(self, other):
        return isinstance(other, LassoTrace) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __getitem__(self, j: int) -> Weight:
        if j < 0:
            raise IndexError(j)
        p = len(self.prefix)
        if j < p:
            return self.prefix[j]
        return self.cycle[(j - p) % len(self.cycle)]

    def unroll(self, n: int) -> list:
        return [self[j] for j in range(n)]

    def tail(self, j: int = 1) -> "LassoTrace":
        """The suffix obtained by deleting the first ``j`` elements."""
        p = len(self.prefix)
        if j <= p:
            return LassoTrace(self.prefix[j:], self.cycle)
        r = (j - p) % len(self.cycle)
        return LassoTrace((), self.cycle[r:] + self.cycle[:r])

    def labels(self) -> set:
        return {w.label for w in self.prefix + self.cycle}

    def __repr__(self):
        return f"LassoTrace({format_lasso(self)!r})"


def trace_of_lasso_path(p: LassoPath) -> LassoTrace:
    return LassoTrace(p.prefix.trace(), p.cycle.trace())


def align(a: LassoTrace, b: LassoTrace) -> tuple:
    """Rewrite both lassos to a common prefix length and cycle length."""
    P = max(len(a.prefix), len(b.prefix))
    C = lcm(len(a.cycle), len(b.cycle))

    def reshape(x: LassoTrace) -> LassoTrace:
        return LassoTrace(tuple(x.unroll(P)), tuple(x[P + i] for i in range(C)))

    return reshape(a), reshape(b)


def enumerate_lassos(sys: WeightedTransitionSystem, s: str, max_prefix: int, max_cycle: int) -> frozenset:
    """All distinct lasso paths from ``s`` expressible with the given bounds.

    Lassos denoting the same infinite path are reported once, in canonical
    form (shortest prefix, primitive cycle).
    """
    sys.check_state(s)
    if max_prefix < 0 or max_cycle < 1:
        raise ValueError("need max_prefix >= 0 and max_cycle >= 1")
    found = set()

    def cycles(u: str):
        stack = [(u, ())]
        while stack:
            cur, steps = stack.pop()
            for tr in sys.out(cur):
                nxt = steps + (tr,)
                if tr.target == u:
                    yield nxt
                if len(nxt) < max_cycle:
                    stack.append((tr.target, nxt))

    stack = [FinitePath(s)]
    while stack:
        pre = stack.pop()
        for cyc in cycles(pre.last):
            found.add(LassoPath(pre, FinitePath(pre.last, cyc)).canonical())
        if len(pre) < max_prefix:
            for tr in sys.out(pre.last):
                stack.append(pre.extend(tr))
    return frozenset(found)


# -- lasso literals ------------------------------------------------------------


def _parse_item(item: str) -> Weight:
    item = item.strip()
    if ":" in item:
        label, w = item.split(":", 1)
        return Weight(label.strip(), to_rational(w))
    return Weight(None, to_rational(item))


def parse_lasso_literal(text: str) -> LassoTrace:
    """Parse ``"prefix | cycle"`` with comma-separated ``label:weight`` items."""
    if text.count("|") != 1:
        raise WTSError(f"lasso literal needs exactly one '|': {text!r}")
    pre, cyc = text.split("|")
    try:
        prefix = tuple(_parse_item(x) for x in pre.split(",") if x.strip())
        cycle = tuple(_parse_item(x) for x in cyc.split(",") if x.strip())
    except ValueError as exc:
        raise WTSError(f"bad lasso literal {text!r}: {exc}") from None
    return LassoTrace(prefix, cycle)


def format_lasso(t: LassoTrace) -> str:
    pre = ", ".join(map(str, t.prefix))
    cyc = ", ".join(map(str, t.cycle))
    return f"{pre} | {cyc}".strip()


def lasso(prefix: Sequence = (), cycle: Sequence = ()) -> LassoTrace:
    """Build a trace from ``(label, weight)`` pairs or bare weights."""

    def conv(x):
        if isinstance(x, Weight):
            return x
        if isinstance(x, tuple):
            return Weight(x[0], to_rational(x[1]))
        return Weight(None, to_rational(x))

    return LassoTrace(tuple(map(conv, prefix)), tuple(map(conv, cycle)))


def system(states: Iterable[str], transitions: Iterable, alphabet=None) -> WeightedTransitionSystem:
    """Convenience constructor: transitions as ``(src, label, weight, dst)``
    or ``(src, weight, dst)`` tuples."""
    trs = []
    for t in transitions:
        if len(t) == 4:
            trs.append(Transition(t[0], Weight(t[1], to_rational(t[2])), t[3]))
        else:
            trs.append(Transition(t[0], Weight(None, to_rational(t[1])), t[2]))
    return WeightedTransitionSystem(tuple(states), tuple(trs), None if alphabet is None else tuple(alphabet))
