"""Shared fixtures-as-functions and hypothesis strategies for the test suite."""

from fractions import Fraction

from hypothesis import strategies as st

from wtsdist.wts import LassoTrace, Weight, system

GRID = [Fraction(n, 2) for n in range(-4, 5)]


def weights(labels=("a",), grid=GRID):
    return st.builds(Weight, st.sampled_from(labels), st.sampled_from(grid))


def lassos(labels=("a",), grid=GRID, max_prefix=3, max_cycle=3):
    w = weights(labels, grid)
    return st.builds(
        LassoTrace,
        st.lists(w, max_size=max_prefix).map(tuple),
        st.lists(w, min_size=1, max_size=max_cycle).map(tuple),
    )


def loops(ws, wt, label="a"):
    """Two disjoint self-loop states ``s`` and ``t``."""
    return system(["s", "t"], [("s", label, ws, "s"), ("t", label, wt, "t")], [label])


def loops_unlabeled(ws, wt):
    return system(["s", "t"], [("s", ws, "s"), ("t", wt, "t")])


def prefix_inclusion_layers(sys, s, t, depth, ground=None):
    """Depth of the first trace prefix of ``s`` that ``t`` cannot follow, or None.

    Walks every prefix length up to ``depth`` layer by layer.  A layer is
    the set of (end state of the s-path, t-states reachable on the same
    trace); no visited set carries over between layers.
    """
    match = ground or (lambda x, y: x == y)
    layer = {(s, frozenset([t]))}
    for j in range(1, depth + 1):
        nxt = set()
        for u, right in layer:
            for tr1 in sys.out(u):
                r2 = frozenset(tr2.target for v in right for tr2 in sys.out(v) if match(tr1.weight, tr2.weight))
                if not r2:
                    return j
                nxt.add((tr1.target, r2))
        layer = nxt
    return None
