"""Command-line front end.

Every command prints one JSON record per line (or a table with
``--format table``).  Exit codes: 0 success, 1 bad input, 2 iteration or
search budget exhausted, 3 property violation found by ``compare``.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys as _sys
import time

from .fixpoint import (
    DEFAULT_EPS,
    DEFAULT_MAX_ITER,
    Interval,
    NonConvergence,
    Status,
    UnsupportedMetric,
    solve_branching,
)
from .game import BudgetExceeded, bounded_blind_value, bounded_value
from .generators import IneqSpec, PreconditionError, build_inequivalence, random_wts
from .linear import Method, linear_bound, linear_discrete, linear_lasso_estimate
from .metrics import Accumulator, LabelPreorder, MetricError, parse_metric
from .values import INF, format_value, is_inf, to_rational
from .wts import WTSError, load_wts, parse_lasso_literal

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_VIOLATION = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _value(v):
    if isinstance(v, Interval):
        return {"lower": format_value(v.lower), "upper": format_value(v.upper)}
    if v is None:
        return None
    return format_value(v)


def record(command, status, value=None, metric=None, message=None, **extra):
    rec = {"command": command}
    if metric is not None:
        rec["metric"] = metric
    rec.update({k: v for k, v in extra.items() if k != "diagnostics"})
    rec["value"] = _value(value)
    rec["status"] = status
    if message is not None:
        rec["message"] = message
    rec["diagnostics"] = extra.get("diagnostics", {})
    return rec


def _emit(rec, fmt, out):
    if fmt == "table":
        val = rec.get("value")
        if isinstance(val, dict):
            val = f"[{val['lower']}, {val['upper']}]"
        cols = [rec["command"], rec.get("metric", "-")]
        if "from" in rec:
            cols.append(f"{rec['from']}->{rec['to']}")
        cols += [str(val if val is not None else "-"), rec["status"]]
        if rec.get("message"):
            cols.append(rec["message"])
        diag = " ".join(f"{k}={v}" for k, v in rec["diagnostics"].items())
        if diag:
            cols.append(diag)
        print("\t".join(cols), file=out)
    else:
        print(json.dumps(rec), file=out)


def _oracle_depth(text):
    if text is None:
        return None
    key, _, val = text.partition("=")
    if key.strip() != "depth" or not val.strip().isdigit():
        raise CliError(f"--oracle expects depth=k, got {text!r}")
    return int(val)


def _metric(args):
    pre = LabelPreorder.parse(args.preorder) if getattr(args, "preorder", None) else None
    return parse_metric(args.metric, pre)


def _pair(args):
    return {"from": getattr(args, "from_"), "to": args.to}


def _discount_tail(sys, m, k):
    ws = sys.weights()
    w = max(m.ground(x, y) for x in ws for y in ws)
    return INF if is_inf(w) else m.lam**k * w / (1 - m.lam)


def _oracle_record(sys, m, s, t, k, blind, command):
    v = (bounded_blind_value if blind else bounded_value)(sys, s, t, m, k)
    diag = {"depth": k, "blind": blind}
    if m.accumulator is Accumulator.DISCOUNTED_SUM and not is_inf(v):
        tail = _discount_tail(sys, m, k)
        value = Interval(v, v + tail) if tail != 0 else v
        status = "BRACKET" if tail != 0 else "EXACT"
    elif m.accumulator is Accumulator.LIMAVG:
        value, status = v, "ESTIMATE"
    else:
        value, status = v, ("EXACT" if is_inf(v) else "LOWER_ONLY")
    return record(command, status, value, m.descriptor, **{"from": s, "to": t}, diagnostics=diag)


def cmd_validate(args):
    sys = load_wts(args.file)
    yield record("validate", "EXACT", diagnostics={
        "states": len(sys.states), "transitions": len(sys.transitions), "labeled": sys.labeled})


def cmd_branch(args):
    sys = load_wts(args.file)
    m = _metric(args)
    s, t = args.from_, args.to
    sys.check_state(s)
    sys.check_state(t)
    if m.accumulator is Accumulator.LIMAVG:
        raise CliError("no recursive iterator for limit-average; use oracle")
    sol = solve_branching(sys, m, cap=args.cap, eps=args.eps, max_iter=args.max_iter, jobs=args.jobs)
    diag = {"iterations": sol.iterations}
    if sol.cap is not None:
        diag["cap"] = str(sol.cap)
    if sol.status is Status.CONVERGED:
        diag["error_bound"] = format_value(sol.error_bound)
    if sol.status is Status.MAXITER:
        raise CliError(f"no convergence within {args.max_iter} sweeps", EXIT_BUDGET)
    v = sol[(s, t)]
    status = "BRACKET" if isinstance(v, Interval) else sol.status.value
    yield record("branch", status, v, m.descriptor, **_pair(args), diagnostics=diag)
    k = _oracle_depth(args.oracle)
    if k is not None:
        yield _oracle_record(sys, m, s, t, k, False, "oracle")


def cmd_linear(args):
    sys = load_wts(args.file)
    m = _metric(args)
    s, t = args.from_, args.to
    sys.check_state(s)
    sys.check_state(t)
    if args.lasso:
        try:
            p, c = (int(x) for x in args.lasso.split(","))
        except ValueError:
            raise CliError("--lasso expects 'prefix,cycle' bounds") from None
        v = linear_lasso_estimate(sys, s, t, m, p, c)
        yield record("linear", Method.ESTIMATE.value, v, m.descriptor, **_pair(args),
                     diagnostics={"max_prefix": p, "max_cycle": c})
        return
    if args.depth is None and m.accumulator is Accumulator.DISCRETE:
        v = linear_discrete(sys, s, t, m.preorder)
        yield record("linear", Method.EXACT.value, v, m.descriptor, **_pair(args), diagnostics={})
        return
    k = args.depth if args.depth is not None else 6
    b = linear_bound(sys, s, t, m, k)
    value = b.lower if b.lower == b.upper else Interval(b.lower, b.upper)
    yield record("linear", b.method.value, value, m.descriptor, **_pair(args), diagnostics={"depth": k})


def cmd_oracle(args):
    sys = load_wts(args.file)
    m = _metric(args)
    k = _oracle_depth(args.oracle)
    if k is None:
        raise CliError("oracle needs --oracle depth=k")
    sys.check_state(args.from_)
    sys.check_state(args.to)
    yield _oracle_record(sys, m, args.from_, args.to, k, args.blind, "oracle")


def _write_system(sys, path):
    doc = sys.to_document()
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return doc


def cmd_gen(args):
    if args.kind == "ineq":
        m = _metric(args)
        spec = IneqSpec(parse_lasso_literal(args.sigma), parse_lasso_literal(args.tau), m)
        sys, s, t = build_inequivalence(spec)
        doc = _write_system(sys, args.out)
        yield record("gen ineq", "EXACT", None, m.descriptor, **{"from": s, "to": t}, system=doc, diagnostics={})
    else:
        lo, _, hi = args.weights.partition(":")
        sys = random_wts(args.states, args.max_out, args.alphabet, (to_rational(lo), to_rational(hi or lo)),
                         args.seed, args.denom)
        doc = _write_system(sys, args.out)
        yield record("gen random", "EXACT", None, system=doc, diagnostics={"seed": args.seed})


def _triangle_violations(table, states):
    out = []
    for a, b, c in itertools.product(states, repeat=3):
        lhs = table[(a, c)]
        rhs = table[(a, b)] + table[(b, c)]
        if lhs > rhs:
            out.append((a, b, c, lhs, rhs))
    return out


def cmd_compare(args):
    metrics = [parse_metric(d) for d in args.metrics.split(",")]
    violations = 0
    checked = 0
    for i in range(args.suite):
        seed = args.seed + i
        sys = random_wts(args.states, args.max_out, args.alphabet, (0, 2), seed)
        for m in metrics:
            if m.accumulator in (Accumulator.LIMAVG, Accumulator.MAXLEAD):
                raise CliError(f"compare supports scalar iterators only, not {m.descriptor}")
            sol = solve_branching(sys, m, eps=args.eps)
            if sol.status is Status.MAXITER:
                raise CliError(f"no convergence on seed {seed}", EXIT_BUDGET)
            for s, t in itertools.product(sys.states, repeat=2):
                checked += 1
                lower = linear_bound(sys, s, t, m, args.depth).lower
                if lower > sol[(s, t)]:
                    violations += 1
                    yield record("compare", "ERROR", None, m.descriptor, **{"from": s, "to": t},
                                 message="linear lower bound exceeds branching distance",
                                 diagnostics={"seed": seed, "linear_lower": format_value(lower),
                                              "branching": format_value(sol[(s, t)])})
            for a, b, c, lhs, rhs in _triangle_violations(sol.table, sys.states):
                violations += 1
                yield record("compare", "ERROR", None, m.descriptor,
                             message=f"triangle violated on ({a},{b},{c}); reported against the "
                                     "determinacy assumption of the branching triangle law",
                             diagnostics={"seed": seed, "lhs": format_value(lhs), "rhs": format_value(rhs)})
    yield record("compare", "EXACT" if violations == 0 else "ERROR", None,
                 message=None if violations == 0 else f"{violations} violation(s)",
                 diagnostics={"systems": args.suite, "pairs_checked": checked, "violations": violations})
    if violations:
        raise _Violations()


class _Violations(Exception):
    pass


def _add_pair_args(p, metric=True):
    if metric:
        p.add_argument("--metric", required=True, help="metric descriptor, e.g. pointwise or acc-disc:1/2")
        p.add_argument("--preorder", help="label preorder for discrete-pre, e.g. 'a<=b,b<=c'")
    p.add_argument("--from", dest="from_", required=True, metavar="STATE")
    p.add_argument("--to", required=True, metavar="STATE")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--timing", action="store_true", help="add wall time to diagnostics")

    parser = argparse.ArgumentParser(prog="wtsdist", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="parse and validate a system file")
    p.add_argument("file")
    p.set_defaults(run=cmd_validate)

    p = sub.add_parser("branch", parents=[common], help="branching distance by fixed-point iteration")
    _add_pair_args(p)
    p.add_argument("--cap", type=to_rational, help="lead cap for maxlead")
    p.add_argument("--eps", type=to_rational, default=DEFAULT_EPS)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--oracle", metavar="depth=K", help="also report the depth-K game value")
    p.add_argument("file")
    p.set_defaults(run=cmd_branch)

    p = sub.add_parser("linear", parents=[common], help="linear distance: exact, bracket or estimate")
    _add_pair_args(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--depth", type=int)
    g.add_argument("--lasso", metavar="P,C")
    p.add_argument("file")
    p.set_defaults(run=cmd_linear)

    p = sub.add_parser("oracle", parents=[common], help="bounded-depth game value")
    _add_pair_args(p)
    p.add_argument("--oracle", metavar="depth=K", required=True)
    p.add_argument("--blind", action="store_true", help="blind Player 1 (linear semantics)")
    p.add_argument("file")
    p.set_defaults(run=cmd_oracle)

    p = sub.add_parser("gen", parents=[common], help="generate systems")
    gsub = p.add_subparsers(dest="kind", required=True)
    q = gsub.add_parser("ineq", parents=[common], help="equal traces, positive branching distance")
    q.add_argument("--metric", required=True)
    q.add_argument("--preorder")
    q.add_argument("--sigma", required=True, help='lasso literal, e.g. "a:0 | a:1"')
    q.add_argument("--tau", required=True)
    q.add_argument("--out")
    q.set_defaults(run=cmd_gen)
    q = gsub.add_parser("random", parents=[common], help="seeded random system")
    q.add_argument("--states", type=int, required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--max-out", type=int, default=2)
    q.add_argument("--alphabet", type=int, default=0)
    q.add_argument("--weights", default="0:2", metavar="LO:HI")
    q.add_argument("--denom", type=int, default=1)
    q.add_argument("--out")
    q.set_defaults(run=cmd_gen)

    p = sub.add_parser("compare", parents=[common], help="check d_L bound <= d_B and triangle laws")
    p.add_argument("--suite", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--states", type=int, default=4)
    p.add_argument("--max-out", type=int, default=2)
    p.add_argument("--alphabet", type=int, default=1)
    p.add_argument("--metrics", default="discrete,pointwise,acc-disc:1/2")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--eps", type=to_rational, default=DEFAULT_EPS)
    p.set_defaults(run=cmd_compare)
    return parser


def run(argv=None, out=None) -> int:
    out = out or _sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command if args.command != "gen" else f"gen {args.kind}"
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        for rec in args.run(args):
            if args.timing:
                rec["diagnostics"]["wall_time"] = f"{time.perf_counter() - t0:.6f}"
            _emit(rec, args.format, out)
    except _Violations:
        code = EXIT_VIOLATION
    except CliError as exc:
        code = exc.code
        _emit(record(command, "ERROR", message=str(exc)), args.format, out)
    except (NonConvergence, BudgetExceeded) as exc:
        code = EXIT_BUDGET
        _emit(record(command, "ERROR", message=str(exc)), args.format, out)
    except (WTSError, MetricError, UnsupportedMetric, PreconditionError, ValueError, OSError) as exc:
        code = EXIT_INPUT
        _emit(record(command, "ERROR", message=str(exc)), args.format, out)
    return code


def main(argv=None):
    _sys.exit(run(argv))


if __name__ == "__main__":
    main()
