import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wtsdist import kernels
from wtsdist.kernels import python_sweep_max

needs_compiled = pytest.mark.skipif(kernels.compiled_sweep_max is None, reason="extension not built")


def random_game(rng, n_cells, n_values):
    p1, p2, loc, nxt = [0], [0], [], []
    for _ in range(n_cells):
        for _ in range(rng.integers(1, 4)):
            for _ in range(rng.integers(1, 4)):
                loc.append(rng.integers(0, n_values))
                nxt.append(rng.integers(-1, n_cells))
            p2.append(len(loc))
        p1.append(len(p2) - 1)
    arr = lambda xs: np.asarray(xs, dtype=np.int64)  # noqa: E731
    return arr(p1), arr(p2), arr(loc), arr(nxt)


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


def test_single_cell_self_loop():
    p1, p2 = np.array([0, 1], np.int64), np.array([0, 1], np.int64)
    loc, nxt = np.array([2], np.int64), np.array([0], np.int64)
    ranks, iters, stable = python_sweep_max(p1, p2, loc, nxt, np.zeros(1, np.int64), 10)
    assert ranks.tolist() == [2] and iters == 2 and stable


def test_budget_exhausted():
    # a chain of cells each copying its successor needs one sweep per link
    n = 6
    p1 = np.arange(n + 1, dtype=np.int64)
    p2 = np.arange(n + 1, dtype=np.int64)
    loc = np.array([0] * (n - 1) + [3], np.int64)
    nxt = np.array(list(range(1, n)) + [-1], np.int64)
    _, iters, stable = python_sweep_max(p1, p2, loc, nxt, np.zeros(n, np.int64), 2)
    assert iters == 2 and not stable


@needs_compiled
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), n_cells=st.integers(1, 30), n_values=st.integers(1, 6),
       jobs=st.sampled_from([1, 2, 4]))
def test_compiled_matches_python(seed, n_cells, n_values, jobs):
    rng = np.random.default_rng(seed)
    game = random_game(rng, n_cells, n_values)
    h0 = np.zeros(n_cells, np.int64)
    a = python_sweep_max(*game, h0, 1000)
    b = kernels.compiled_sweep_max(*game, h0, 1000, jobs)
    assert a[0].tolist() == b[0].tolist()
    assert a[1:] == b[1:]


def test_pure_env_selects_python():
    import os
    import subprocess
    import sys

    env = dict(os.environ, WTSDIST_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from wtsdist import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
