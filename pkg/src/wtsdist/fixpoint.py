"""Branching distances as least fixed points.

A distance iterator ``F(x, y, z)`` on a lattice ``L`` lifts to the
operator ``I(h)(s, t) = sup_{s -x-> s'} inf_{t -y-> t'} F(x, y, h(s', t'))``
on tables of lattice elements.  Iterating ``I`` from bottom converges to
its least fixed point; projecting that with ``g`` gives the branching
distance.

Two evaluation routes exist.  Max-type iterators (discrete, point-wise,
maximum lead) only ever produce values from a finite set, so they are
compiled to integer ranks and swept by :mod:`wtsdist.kernels` until the
table stops changing.  The discounted iterator works on exact rationals
and stops once the contraction bound certifies the requested accuracy.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Mapping, Optional

import numpy as np

from . import kernels
from .metrics import Accumulator, LabelPreorder, TraceMetric, preorder_ground, EQUALITY
from .values import INF, ext_sub, is_inf, scale
from .wts import LassoTrace, WeightedTransitionSystem, Weight, align


class UnsupportedMetric(ValueError):
    pass


class NonConvergence(RuntimeError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class Status(enum.Enum):
    EXACT = "EXACT"
    CONVERGED = "CONVERGED"
    MAXITER = "MAXITER"


class Policy(enum.Enum):
    """How the lead table values leads beyond the cap."""

    OVERAPPROX = "over"  # inf: an upper bound
    UNDERAPPROX = "under"  # |lead|: a lower bound


DEFAULT_EPS = Fraction(1, 10**9)
DEFAULT_MAX_ITER = 100_000


# -- lattices --------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeSpec:
    name: str
    bottom: Any
    join: Callable[[Any, Any], Any]
    meet: Callable[[Any, Any], Any]
    leq: Callable[[Any, Any], bool]
    eq: Callable[[Any, Any], bool]


def _ext_leq(a, b):
    return a <= b


def _ext_eq(a, b):
    return a == b


EXT_LATTICE = LatticeSpec("[0,inf]", Fraction(0), max, min, _ext_leq, _ext_eq)


class LeadTable:
    """A function from leads to distances, tracked on a finite lead set.

    Leads with ``|lead| > cap`` are never stored; they read as ``inf``
    (over-approximation) or ``|lead|`` (under-approximation).  Reading an
    untracked lead inside the cap is an error: the tracked set must be
    closed under the lead updates in play.
    """

    __slots__ = ("cap", "policy", "entries")

    def __init__(self, cap: Fraction, policy: Policy, entries: Mapping):
        self.cap = cap
        self.policy = policy
        self.entries = dict(entries)

    def __call__(self, lead):
        if abs(lead) > self.cap:
            return INF if self.policy is Policy.OVERAPPROX else abs(lead)
        try:
            return self.entries[lead]
        except KeyError:
            raise ValueError(f"lead {lead} is inside the cap but not tracked") from None

    def _zip(self, other, op):
        if self.entries.keys() != other.entries.keys():
            raise ValueError("lead tables over different lead sets")
        return LeadTable(self.cap, self.policy, {d: op(v, other.entries[d]) for d, v in self.entries.items()})

    def join(self, other):
        return self._zip(other, max)

    def meet(self, other):
        return self._zip(other, min)

    def __le__(self, other):
        return all(v <= other.entries[d] for d, v in self.entries.items())

    def __eq__(self, other):
        return isinstance(other, LeadTable) and self.entries == other.entries

    __hash__ = None

    def __repr__(self):
        items = ", ".join(f"{d}: {v}" for d, v in sorted(self.entries.items()))
        return f"LeadTable(cap={self.cap}, {self.policy.value}, {{{items}}})"


def lead_closure(diffs, cap: Fraction) -> tuple:
    """Leads reachable from 0 by adding ``diffs`` without leaving ``[-cap, cap]``."""
    diffs = set(diffs)
    seen = {Fraction(0)}
    todo = [Fraction(0)]
    while todo:
        d = todo.pop()
        for step in diffs:
            e = d + step
            if abs(e) <= cap and e not in seen:
                seen.add(e)
                todo.append(e)
    return tuple(sorted(seen))


def lead_lattice(leads: tuple, cap: Fraction, policy: Policy) -> LatticeSpec:
    bottom = LeadTable(cap, policy, {d: Fraction(0) for d in leads})
    return LatticeSpec("[0,inf]^leads", bottom, LeadTable.join, LeadTable.meet,
                       lambda a, b: a <= b, lambda a, b: a == b)


def system_leads(sys: WeightedTransitionSystem, cap: Fraction) -> tuple:
    ws = sys.weights()
    diffs = {x.weight - y.weight for x in ws for y in ws if x.label == y.label}
    return lead_closure(diffs, cap)


def default_cap(sys: WeightedTransitionSystem) -> Fraction:
    ws = [w.weight for w in sys.weights()]
    spread = max(ws) - min(ws)
    return max(Fraction(1), spread) * len(sys.states)


# -- iterators -------------------------------------------------------------------


@dataclass(frozen=True)
class IteratorSpec:
    """``F``, ``g`` and ``L`` for one trace distance.

    ``kind`` picks the evaluation route: ``"max"`` (idempotent, finitely
    many values), ``"affine"`` (``F = local + lam * z``) or ``"lead"``.
    ``local(x, y)`` is the per-step ground value the route needs.
    """

    metric: TraceMetric
    lattice: LatticeSpec
    step: Callable[[Weight, Weight, Any], Any]
    project: Callable[[Any], Any]
    kind: str
    local: Callable[[Weight, Weight], Any]
    cap: Optional[Fraction] = None
    policy: Optional[Policy] = None


def iterator_for(m: TraceMetric, cap=None, policy: Policy = Policy.OVERAPPROX,
                 leads: Optional[tuple] = None) -> IteratorSpec:
    """The distance iterator for ``m``.

    For maximum lead, ``cap`` and the tracked ``leads`` fix the finite
    lattice; ``leads`` defaults to the closure of all weight differences
    of the system being solved (see :func:`solve_branching`).
    """
    g = m.ground
    acc = m.accumulator
    ident = lambda z: z  # noqa: E731

    if acc is Accumulator.DISCRETE:
        def step(x, y, z):
            return z if g(x, y) == 0 else INF

        return IteratorSpec(m, EXT_LATTICE, step, ident, "max", g)

    if acc is Accumulator.SUP:
        def step(x, y, z):
            return max(g(x, y), z)

        return IteratorSpec(m, EXT_LATTICE, step, ident, "max", g)

    if acc is Accumulator.DISCOUNTED_SUM:
        lam = m.lam

        def step(x, y, z):
            d = g(x, y)
            if is_inf(d):
                return INF
            return d + scale(lam, z)

        return IteratorSpec(m, EXT_LATTICE, step, ident, "affine", g)

    if acc is Accumulator.MAXLEAD:
        cap = Fraction(cap) if cap is not None else None
        lattice = None
        if cap is not None and leads is not None:
            lattice = lead_lattice(tuple(leads), cap, policy)

        def step(x, y, h):
            diff = x.weight - y.weight
            if x.label != y.label:
                return LeadTable(h.cap, h.policy, {d: INF for d in h.entries})
            return LeadTable(h.cap, h.policy,
                             {d: max(abs(d + diff), h(d + diff)) for d in h.entries})

        def project(h):
            return h(Fraction(0))

        return IteratorSpec(m, lattice, step, project, "lead", g, cap, policy)

    raise UnsupportedMetric(f"no recursive iterator for {_acc_name(acc)}; use oracle")


def _acc_name(acc):
    return "limit-average" if acc is Accumulator.LIMAVG else acc.value


# -- the operator I ---------------------------------------------------------------


class PairFunction:
    """A total table from state pairs to lattice elements."""

    __slots__ = ("table",)

    def __init__(self, table: Mapping):
        self.table = dict(table)

    @classmethod
    def constant(cls, sys: WeightedTransitionSystem, value) -> "PairFunction":
        return cls({(s, t): value for s in sys.states for t in sys.states})

    def __getitem__(self, key):
        return self.table[key]

    def items(self):
        return self.table.items()

    def __eq__(self, other):
        return isinstance(other, PairFunction) and self.table == other.table

    __hash__ = None

    def leq(self, other, lattice: LatticeSpec) -> bool:
        return all(lattice.leq(v, other.table[k]) for k, v in self.table.items())

    def __repr__(self):
        return f"PairFunction({self.table!r})"


def apply_I(spec: IteratorSpec, sys: WeightedTransitionSystem, h: PairFunction) -> PairFunction:
    """One application of the lifted operator, straight from its definition."""
    lat = spec.lattice
    out = {}
    for s in sys.states:
        for t in sys.states:
            sup = None
            for tr1 in sys.out(s):
                inf = None
                for tr2 in sys.out(t):
                    v = spec.step(tr1.weight, tr2.weight, h[(tr1.target, tr2.target)])
                    inf = v if inf is None else lat.meet(inf, v)
                sup = inf if sup is None else lat.join(sup, inf)
            out[(s, t)] = sup
    return PairFunction(out)


@dataclass
class FixpointResult:
    h: PairFunction
    iterations: int
    status: Status
    error_bound: Any = Fraction(0)


def _bottom(spec: IteratorSpec, sys: WeightedTransitionSystem) -> PairFunction:
    return PairFunction.constant(sys, spec.lattice.bottom)


def _kleene_generic(spec, sys, eps, max_iter) -> FixpointResult:
    h = _bottom(spec, sys)
    lam = spec.metric.lam
    n = 0
    while n < max_iter:
        h2 = apply_I(spec, sys, h)
        n += 1
        if h2 == h:
            return FixpointResult(h2, n, Status.EXACT)
        if spec.kind == "affine" and lam > 0:
            delta = max(ext_sub(h2[k], v) for k, v in h.items())
            if not is_inf(delta) and delta * lam <= eps * (1 - lam):
                return FixpointResult(h2, n, Status.CONVERGED, delta * lam / (1 - lam))
        h = h2
    return FixpointResult(h, n, Status.MAXITER, INF)


@dataclass
class CompiledGame:
    cells: list
    p1_ptr: np.ndarray
    p2_ptr: np.ndarray
    loc: np.ndarray
    nxt: np.ndarray
    values: list


def compile_game(spec: IteratorSpec, sys: WeightedTransitionSystem, leads: Optional[tuple] = None) -> CompiledGame:
    """Lay out the game for the rank kernel (max-type and lead iterators)."""
    g = spec.local
    lead_mode = spec.kind == "lead"
    discrete = spec.metric.accumulator is Accumulator.DISCRETE
    states = sys.states
    if lead_mode:
        cells = [(s, t, d) for s in states for t in states for d in leads]
    else:
        cells = [(s, t) for s in states for t in states]
    index = {c: i for i, c in enumerate(cells)}
    p1_ptr, p2_ptr, loc, nxt = [0], [0], [], []
    for cell in cells:
        s, t = cell[0], cell[1]
        for tr1 in sys.out(s):
            x = tr1.weight
            for tr2 in sys.out(t):
                y = tr2.weight
                if lead_mode:
                    if x.label != y.label:
                        a, nb = INF, -1
                    else:
                        d2 = cell[2] + x.weight - y.weight
                        if abs(d2) > spec.cap:
                            a = INF if spec.policy is Policy.OVERAPPROX else abs(d2)
                            nb = -1
                        else:
                            a, nb = abs(d2), index[(tr1.target, tr2.target, d2)]
                else:
                    d = g(x, y)
                    if is_inf(d):
                        a, nb = INF, -1
                    elif discrete:
                        a, nb = (Fraction(0), index[(tr1.target, tr2.target)]) if d == 0 else (INF, -1)
                    else:
                        a, nb = d, index[(tr1.target, tr2.target)]
                loc.append(a)
                nxt.append(nb)
            p2_ptr.append(len(loc))
        p1_ptr.append(len(p2_ptr) - 1)
    values = sorted(set(loc) | {Fraction(0)})
    rank = {v: i for i, v in enumerate(values)}
    return CompiledGame(
        cells,
        np.asarray(p1_ptr, dtype=np.int64),
        np.asarray(p2_ptr, dtype=np.int64),
        np.asarray([rank[a] for a in loc], dtype=np.int64),
        np.asarray(nxt, dtype=np.int64),
        values,
    )


def _kleene_ranked(spec, sys, max_iter, jobs, sweep, leads) -> FixpointResult:
    game = compile_game(spec, sys, leads)
    n_cells = len(game.cells)
    # a monotone chain of rank vectors stabilises within this many sweeps
    bound = n_cells * len(game.values) + 1
    budget = min(max_iter, bound)
    h0 = np.zeros(n_cells, dtype=np.int64)
    ranks, iters, stable = sweep(game.p1_ptr, game.p2_ptr, game.loc, game.nxt, h0, budget, jobs)
    if not stable:
        assert budget < bound, "max-type Kleene iteration failed to stabilise within its bound"
        status = Status.MAXITER
    else:
        status = Status.EXACT
    vals = [game.values[r] for r in ranks.tolist()]
    if spec.kind == "lead":
        tables: dict = {}
        for (s, t, d), v in zip(game.cells, vals):
            tables.setdefault((s, t), {})[d] = v
        h = PairFunction({k: LeadTable(spec.cap, spec.policy, e) for k, e in tables.items()})
    else:
        h = PairFunction(dict(zip(game.cells, vals)))
    return FixpointResult(h, iters, status, Fraction(0) if stable else INF)


def _kleene_affine(spec, sys, eps, max_iter) -> FixpointResult:
    """Exact-rational Jacobi sweeps for ``F = local + lam * z``."""
    lam = spec.metric.lam
    g = spec.local
    states = sys.states
    cells = [(s, t) for s in states for t in states]
    index = {c: i for i, c in enumerate(cells)}
    plan = []
    for s, t in cells:
        opts = []
        for tr1 in sys.out(s):
            opts.append([(g(tr1.weight, tr2.weight), index[(tr1.target, tr2.target)])
                         for tr2 in sys.out(t)])
        plan.append(opts)
    cur = [Fraction(0)] * len(cells)
    n = 0
    while n < max_iter:
        new = []
        for opts in plan:
            best = Fraction(0)
            for replies in opts:
                worst = INF
                for d, nb in replies:
                    z = cur[nb]
                    if is_inf(d) or is_inf(z):
                        v = INF
                    else:
                        v = d + lam * z
                    if v < worst:
                        worst = v
                if worst > best:
                    best = worst
            new.append(best)
        n += 1
        if new == cur:
            return FixpointResult(PairFunction(zip(cells, new)), n, Status.EXACT)
        delta = max(ext_sub(a, b) for a, b in zip(new, cur))
        cur = new
        if not is_inf(delta) and delta * lam <= eps * (1 - lam):
            bound = delta * lam / (1 - lam)
            status = Status.EXACT if bound == 0 else Status.CONVERGED
            return FixpointResult(PairFunction(zip(cells, cur)), n, status, bound)
    return FixpointResult(PairFunction(zip(cells, cur)), n, Status.MAXITER, INF)


def kleene_lfp(spec: IteratorSpec, sys: WeightedTransitionSystem, eps=DEFAULT_EPS,
               max_iter: int = DEFAULT_MAX_ITER, jobs: int = 1, engine: str = "auto",
               leads: Optional[tuple] = None) -> FixpointResult:
    """Iterate ``h_{n+1} = I(h_n)`` from bottom.

    ``engine`` is ``"auto"`` (rank kernel or exact affine sweep),
    ``"generic"`` (plain :func:`apply_I` loop), ``"python"`` or
    ``"compiled"`` (force a rank-kernel backend).
    Status is EXACT when a sweep changes nothing, CONVERGED when the
    contraction bound certifies error ``<= eps`` (discounted only) and
    MAXITER when the budget ran out first.
    """
    eps = Fraction(eps)
    if spec.kind == "lead":
        if spec.cap is None:
            raise ValueError("maximum lead needs a lead cap")
        if leads is None:
            leads = system_leads(sys, spec.cap)
        if spec.lattice is None or set(spec.lattice.bottom.entries) != set(leads):
            spec = iterator_for(spec.metric, spec.cap, spec.policy, leads)
    if engine == "generic":
        return _kleene_generic(spec, sys, eps, max_iter)
    if spec.kind == "affine":
        return _kleene_affine(spec, sys, eps, max_iter)
    if engine == "python":
        sweep = kernels.python_sweep_max
    elif engine == "compiled":
        if kernels.compiled_sweep_max is None:
            raise RuntimeError("compiled kernel not built")
        sweep = kernels.compiled_sweep_max
    else:
        sweep = kernels.sweep_max
    return _kleene_ranked(spec, sys, max_iter, jobs, sweep, leads)


# -- branching distance -------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    lower: Any
    upper: Any

    def __post_init__(self):
        assert self.lower <= self.upper


@dataclass
class BranchingSolution:
    metric: TraceMetric
    table: dict
    iterations: int
    status: Status
    error_bound: Any
    cap: Optional[Fraction] = None

    def __getitem__(self, pair):
        return self.table[pair]


def solve_branching(sys: WeightedTransitionSystem, m: TraceMetric, cap=None, eps=DEFAULT_EPS,
                    max_iter: int = DEFAULT_MAX_ITER, jobs: int = 1, engine: str = "auto") -> BranchingSolution:
    """Branching distances for all state pairs.

    For maximum lead both cap policies are solved; pairs where they
    disagree get an :class:`Interval`.
    """
    if m.accumulator is Accumulator.MAXLEAD:
        cap = default_cap(sys) if cap is None else Fraction(cap)
        leads = system_leads(sys, cap)
        results = []
        for policy in (Policy.UNDERAPPROX, Policy.OVERAPPROX):
            spec = iterator_for(m, cap, policy, leads)
            results.append(kleene_lfp(spec, sys, eps, max_iter, jobs, engine, leads))
        under, over = results
        status = Status.EXACT if all(r.status is Status.EXACT for r in results) else Status.MAXITER
        table = {}
        for key in under.h.table:
            lo, hi = under.h[key](Fraction(0)), over.h[key](Fraction(0))
            table[key] = lo if lo == hi else Interval(lo, hi)
        return BranchingSolution(m, table, max(r.iterations for r in results), status,
                                 max(r.error_bound for r in results), cap)
    spec = iterator_for(m)
    res = kleene_lfp(spec, sys, eps, max_iter, jobs, engine)
    table = {k: spec.project(v) for k, v in res.h.items()}
    return BranchingSolution(m, table, res.iterations, res.status, res.error_bound)


def branching_distance(sys: WeightedTransitionSystem, m: TraceMetric, s: str, t: str, cap=None,
                       eps=DEFAULT_EPS, max_iter: int = DEFAULT_MAX_ITER, jobs: int = 1):
    """``g(h*(s, t))``: a value, or an Interval for capped maximum lead."""
    sys.check_state(s)
    sys.check_state(t)
    sol = solve_branching(sys, m, cap, eps, max_iter, jobs)
    if sol.status is Status.MAXITER:
        raise NonConvergence(f"no convergence within {max_iter} sweeps", sol)
    return sol[(s, t)]


# -- simulation, independently -------------------------------------------------------


def greatest_simulation(sys: WeightedTransitionSystem, preorder: Optional[LabelPreorder] = None) -> frozenset:
    """Largest R with: (s,t) in R and s -x-> s' imply t -y-> t', x matches y, (s',t') in R.

    Plain refinement: start from all pairs and delete violators until none remain.
    """
    ground = EQUALITY if preorder is None else preorder_ground(preorder)
    rel = {(s, t) for s in sys.states for t in sys.states}
    changed = True
    while changed:
        changed = False
        for s, t in sorted(rel):
            ok = all(
                any(ground(tr1.weight, tr2.weight) == 0 and (tr1.target, tr2.target) in rel
                    for tr2 in sys.out(t))
                for tr1 in sys.out(s)
            )
            if not ok:
                rel.discard((s, t))
                changed = True
    return frozenset(rel)


def discrete_simulation_check(sys: WeightedTransitionSystem, s: str, t: str,
                              preorder: Optional[LabelPreorder] = None) -> bool:
    sys.check_state(s)
    sys.check_state(t)
    return (s, t) in greatest_simulation(sys, preorder)


# -- recursion check on single trace pairs ----------------------------------------------


def _fold(spec: IteratorSpec, xs, ys, seed):
    z = seed
    for x, y in zip(reversed(xs), reversed(ys)):
        z = spec.step(x, y, z)
    return z


def trace_value_by_iterator(spec: IteratorSpec, a: LassoTrace, b: LassoTrace):
    """``g(f(a, b))`` computed only through ``F``.

    The cycle's own least fixed point seeds a fold of ``F`` back through
    the aligned prefix.  For the discounted iterator the cycle fixed point
    is solved in closed form; otherwise by Kleene iteration, which
    terminates because the reachable values form a finite set.
    """
    a, b = align(a, b)
    if spec.kind == "affine":
        lam = spec.metric.lam
        const, coef = Fraction(0), Fraction(1)
        for x, y in zip(a.cycle, b.cycle):
            d = spec.local(x, y)
            if is_inf(d):
                const = INF
                break
            const, coef = const + coef * d, coef * lam
        z = INF if is_inf(const) else const / (1 - coef)
    else:
        if spec.kind == "lead":
            spec = _lead_spec_for_pair(spec, a, b)
        z = spec.lattice.bottom
        while True:
            z2 = _fold(spec, a.cycle, b.cycle, z)
            if spec.lattice.eq(z2, z):
                break
            z = z2
    return spec.project(_fold(spec, a.prefix, b.prefix, z))


def _lead_spec_for_pair(spec, a, b):
    diffs = {x.weight - y.weight for x, y in zip(a.prefix + a.cycle, b.prefix + b.cycle)}
    cap = spec.cap
    if cap is None:
        lead, top = Fraction(0), Fraction(0)
        for x, y in zip(a.prefix + a.cycle, b.prefix + b.cycle):
            lead += x.weight - y.weight
            top = max(top, abs(lead))
        cap = top
    return iterator_for(spec.metric, cap, spec.policy or Policy.OVERAPPROX, lead_closure(diffs, cap))
