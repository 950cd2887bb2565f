"""Numba-jitted simplex pivot loop: the hot kernel of the solver.

Mirrors ``_kernels_numpy.simplex_loop`` exactly; the explicit loops here
compile to the same elementwise arithmetic the numpy twin performs.
"""

import numpy as np
from numba import njit

PIVOT_TOL = 1e-9
RATIO_TIE_TOL = 1e-12

STATUS_OPTIMAL = 0
STATUS_UNBOUNDED = 2
STATUS_ITER_LIMIT = 3


@njit(cache=True)
def _simplex_loop_jit(T, basis, n_enter, max_iter):
    m = T.shape[0] - 1
    w = T.shape[1]
    rhs = w - 1
    iters = 0
    while True:
        col = -1
        for j in range(n_enter):
            if T[m, j] < -PIVOT_TOL:
                col = j
                break
        if col == -1:
            return STATUS_OPTIMAL, iters

        # pass 1: minimum ratio among eligible rows
        best = np.inf
        any_eligible = False
        for i in range(m):
            a = T[i, col]
            if a > PIVOT_TOL:
                any_eligible = True
                ratio = T[i, rhs] / a
                if ratio < best:
                    best = ratio
        if not any_eligible:
            return STATUS_UNBOUNDED, iters
        if iters >= max_iter:
            return STATUS_ITER_LIMIT, iters

        # pass 2: among ties, lowest basis index (Bland)
        row = -1
        row_basis = 0
        for i in range(m):
            a = T[i, col]
            if a > PIVOT_TOL:
                ratio = T[i, rhs] / a
                if ratio <= best + RATIO_TIE_TOL:
                    if row == -1 or basis[i] < row_basis:
                        row = i
                        row_basis = basis[i]

        inv = 1.0 / T[row, col]
        for j in range(w):
            T[row, j] *= inv
        for i in range(m + 1):
            if i != row:
                f = T[i, col]
                if f != 0.0:
                    for j in range(w):
                        T[i, j] -= f * T[row, j]
        basis[row] = col
        iters += 1


def simplex_loop(T, basis, n_enter, max_iter):
    status, iters = _simplex_loop_jit(T, basis, np.int64(n_enter), np.int64(max_iter))
    return int(status), int(iters)
