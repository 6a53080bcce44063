# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled Jacobi sweep for max/min games over rank-encoded values.

Cells are laid out CSR-style: cell ``i`` owns Player-1 options
``p1_ptr[i]:p1_ptr[i+1]``; option ``a`` owns Player-2 replies
``p2_ptr[a]:p2_ptr[a+1]``.  A reply ``b`` is worth
``max(loc[b], h[nxt[b]])``, or just ``loc[b]`` when ``nxt[b] < 0``.
"""

import numpy as np
from cython.parallel cimport prange
from libc.stdint cimport int64_t

cdef int64_t TOP = 0x7FFFFFFFFFFFFFFF


def sweep_max(const int64_t[::1] p1_ptr, const int64_t[::1] p2_ptr,
              const int64_t[::1] loc, const int64_t[::1] nxt,
              const int64_t[::1] h0, int64_t max_iter, int n_threads=1):
    cdef Py_ssize_t n = h0.shape[0]
    cur_arr = np.array(h0, dtype=np.int64, copy=True)
    new_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] cur = cur_arr
    cdef int64_t[::1] new = new_arr
    cdef int64_t[::1] tmp
    cdef Py_ssize_t i, a, b
    cdef int64_t best, worst, v, nb
    cdef int64_t it = 0
    cdef bint changed
    if n_threads < 1:
        n_threads = 1
    while it < max_iter:
        it += 1
        for i in prange(n, nogil=True, num_threads=n_threads, schedule="static"):
            best = 0
            for a in range(p1_ptr[i], p1_ptr[i + 1]):
                worst = TOP
                for b in range(p2_ptr[a], p2_ptr[a + 1]):
                    v = loc[b]
                    nb = nxt[b]
                    if nb >= 0 and cur[nb] > v:
                        v = cur[nb]
                    if v < worst:
                        worst = v
                if worst > best:
                    best = worst
            new[i] = best
        changed = False
        for i in range(n):
            if new[i] != cur[i]:
                changed = True
                break
        tmp = cur
        cur = new
        new = tmp
        if not changed:
            return np.asarray(cur).copy(), it, True
    return np.asarray(cur).copy(), it, False
