"""Pure-Python twin of ``_kernels.sweep_max``; same arguments, same results."""

import numpy as np


def sweep_max(p1_ptr, p2_ptr, loc, nxt, h0, max_iter, n_threads=1):
    p1_ptr = [int(x) for x in p1_ptr]
    p2_ptr = [int(x) for x in p2_ptr]
    loc = [int(x) for x in loc]
    nxt = [int(x) for x in nxt]
    cur = [int(x) for x in h0]
    n = len(cur)
    # per option: list of (local rank, next cell)
    replies = [list(zip(loc[p2_ptr[a]:p2_ptr[a + 1]], nxt[p2_ptr[a]:p2_ptr[a + 1]]))
               for a in range(len(p2_ptr) - 1)]
    it = 0
    while it < max_iter:
        it += 1
        new = [0] * n
        for i in range(n):
            best = 0
            for a in range(p1_ptr[i], p1_ptr[i + 1]):
                worst = min(v if nb < 0 or cur[nb] <= v else cur[nb] for v, nb in replies[a])
                if worst > best:
                    best = worst
            new[i] = best
        if new == cur:
            return np.asarray(cur, dtype=np.int64), it, True
        cur = new
    return np.asarray(cur, dtype=np.int64), it, False
