"""Pure-numpy simplex pivot loop: fallback twin of the numba kernel.

Both kernel modules expose ``simplex_loop`` with identical semantics and
elementwise-identical arithmetic (reciprocal-multiply normalization, rank-1
row updates), so either backend yields the same pivot sequence.
"""

import numpy as np

PIVOT_TOL = 1e-9
RATIO_TIE_TOL = 1e-12

STATUS_OPTIMAL = 0
STATUS_UNBOUNDED = 2
STATUS_ITER_LIMIT = 3


def simplex_loop(T, basis, n_enter, max_iter):
    """Run Bland-rule pivots on tableau ``T`` in place.

    T: (m+1, w) tableau, last row = reduced objective, last column = rhs.
    basis: int64 array of m basic-column indices, updated in place.
    n_enter: entering candidates are columns [0, n_enter).
    Returns (status, iterations).
    """
    m = T.shape[0] - 1
    rhs = T.shape[1] - 1
    iters = 0
    while True:
        red = T[m, :n_enter]
        negative = np.nonzero(red < -PIVOT_TOL)[0]
        if negative.size == 0:
            return STATUS_OPTIMAL, iters
        col = int(negative[0])  # Bland: lowest index

        colvals = T[:m, col]
        eligible = colvals > PIVOT_TOL
        if not eligible.any():
            return STATUS_UNBOUNDED, iters
        if iters >= max_iter:
            return STATUS_ITER_LIMIT, iters

        ratios = np.where(eligible, T[:m, rhs] / np.where(eligible, colvals, 1.0), np.inf)
        best = ratios.min()
        ties = np.nonzero(ratios <= best + RATIO_TIE_TOL)[0]
        row = int(ties[np.argmin(basis[ties])])  # Bland: lowest basis index

        inv = 1.0 / T[row, col]
        T[row, :] *= inv
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row, :])
        basis[row] = col
        iters += 1
