"""Two-phase primal simplex with Bland's anti-cycling rule.

Dense tableau, deterministic pivoting: identical problems produce identical
solutions bit for bit. The pivot loop runs on a numba-compiled kernel when
available; set ``PANTRY_NO_NUMBA=1`` to force the pure-numpy twin.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import SolverStalledError
from .problem import LpProblem, LpSolution

FEAS_TOL = 1e-6  # feasibility/optimality tolerance on scaled residuals
PIVOT_TOL = 1e-9

_backend_name: str | None = None
_kernels = None


def _env_wants_numpy() -> bool:
    return os.environ.get("PANTRY_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")


def set_backend(name: str | None) -> None:
    """Force 'numba' or 'numpy'; None re-derives from the environment."""
    global _backend_name, _kernels
    if name is None:
        _backend_name = None
        _kernels = None
        return
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown LP backend {name!r}")
    if name == "numba":
        from . import _kernels_numba as mod
    else:
        from . import _kernels_numpy as mod
    _backend_name, _kernels = name, mod


def active_backend() -> str:
    _ensure_backend()
    return _backend_name


def _ensure_backend():
    global _backend_name, _kernels
    if _kernels is not None:
        return
    if _env_wants_numpy():
        set_backend("numpy")
        return
    try:
        set_backend("numba")
    except ImportError:
        set_backend("numpy")


def solve(problem: LpProblem) -> LpSolution:
    """Minimize the problem; see LpSolution for the feasibility contract."""
    problem.validate()
    _ensure_backend()

    n = problem.var_count
    rows = []
    bounds = []
    senses = []  # +1 for <=, -1 for >=
    for row, b in problem.ge_constraints:
        rows.append(row)
        bounds.append(b)
        senses.append(-1.0)
    for row, b in problem.le_constraints:
        rows.append(row)
        bounds.append(b)
        senses.append(1.0)
    if problem.var_upper_bounds is not None:
        for j, u in enumerate(problem.var_upper_bounds):
            if np.isfinite(u):
                r = np.zeros(n)
                r[j] = 1.0
                rows.append(r)
                bounds.append(float(u))
                senses.append(1.0)

    m = len(rows)
    max_iter = 50 * (n + m)
    if m == 0:
        # only x >= 0: optimum at origin unless some cost is negative
        if np.any(problem.objective < 0):
            return LpSolution("unbounded", None, None, 0)
        x = np.zeros(n)
        return LpSolution("optimal", x, 0.0, 0)

    A = np.array(rows, dtype=np.float64)
    b = np.array(bounds, dtype=np.float64)
    s = np.array(senses, dtype=np.float64)

    # Equality form: A x + diag(s) slack = b, then flip rows to make b >= 0.
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0
    s[flip] *= -1.0

    basic_slack = s > 0  # +1 slack can seed the basis; -1 needs an artificial
    art_rows = np.nonzero(~basic_slack)[0]
    n_art = len(art_rows)
    n_slack = m
    width = n + n_slack + n_art + 1

    T = np.zeros((m + 1, width), dtype=np.float64)
    T[:m, :n] = A
    T[np.arange(m), n + np.arange(m)] = s
    T[art_rows, n + n_slack + np.arange(n_art)] = 1.0
    T[:m, -1] = b

    basis = np.empty(m, dtype=np.int64)
    basis[basic_slack] = n + np.nonzero(basic_slack)[0]
    basis[art_rows] = n + n_slack + np.arange(n_art)

    scale = max(1.0, float(np.max(np.abs(b))))
    total_iters = 0

    if n_art > 0:
        # Phase 1: minimize the artificial sum; reduce the objective row by
        # subtracting each artificial row (their cost coefficient is 1).
        T[m, :] = 0.0
        T[m, n + n_slack : n + n_slack + n_art] = 1.0
        for i in art_rows:
            T[m, :] -= T[i, :]
        code, iters = _kernels.simplex_loop(T, basis, n + n_slack, max_iter)
        total_iters += iters
        if code == 3:
            raise SolverStalledError(total_iters)
        if code == 2:
            # phase-1 objective is bounded below; no pivot row means numerics
            raise SolverStalledError(total_iters)
        infeas = -T[m, -1]
        if infeas > FEAS_TOL * scale:
            return LpSolution("infeasible", None, None, total_iters)
        _drive_out_artificials(T, basis, n + n_slack)

    # Phase 2: original objective reduced by the current basis.
    obj = np.zeros(width)
    obj[:n] = problem.objective
    for i in range(m):
        coef = obj[basis[i]]
        if coef != 0.0:
            obj -= coef * T[i, :]
    T[m, :] = obj
    code, iters = _kernels.simplex_loop(T, basis, n + n_slack, max_iter - total_iters)
    total_iters += iters
    if code == 3:
        raise SolverStalledError(total_iters)
    if code == 2:
        return LpSolution("unbounded", None, None, total_iters)

    x = np.zeros(n)
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i, -1]
    x[(x < 0) & (x > -FEAS_TOL)] = 0.0  # clamp simplex noise
    objective_value = float(problem.objective @ x)
    return LpSolution("optimal", x, objective_value, total_iters)


def _drive_out_artificials(T, basis, n_real):
    """Pivot basic artificials onto real columns; redundant rows stay put."""
    m = T.shape[0] - 1
    for i in range(m):
        if basis[i] >= n_real:
            for j in range(n_real):
                if abs(T[i, j]) > PIVOT_TOL:
                    inv = 1.0 / T[i, j]
                    T[i, :] *= inv
                    factors = T[:, j].copy()
                    factors[i] = 0.0
                    T -= np.outer(factors, T[i, :])
                    basis[i] = j
                    break


def feasibility_residuals(problem: LpProblem, x: np.ndarray) -> dict[str, float]:
    """Worst scaled violations of the solved point, for checks and reports."""
    res = {"nonneg": float(max(0.0, -x.min(initial=0.0)))}
    worst_ge = 0.0
    for row, bound in problem.ge_constraints:
        denom = max(1.0, abs(bound), float(np.abs(row).max(initial=0.0)))
        worst_ge = max(worst_ge, (bound - float(row @ x)) / denom)
    worst_le = 0.0
    for row, bound in problem.le_constraints:
        denom = max(1.0, abs(bound), float(np.abs(row).max(initial=0.0)))
        worst_le = max(worst_le, (float(row @ x) - bound) / denom)
    if problem.var_upper_bounds is not None:
        u = problem.var_upper_bounds
        mask = np.isfinite(u)
        if mask.any():
            denom = np.maximum(1.0, np.abs(u[mask]))
            worst_le = max(worst_le, float(((x[mask] - u[mask]) / denom).max(initial=0.0)))
    res["ge"] = max(0.0, worst_ge)
    res["le"] = max(0.0, worst_le)
    return res
