"""Brute-force LP oracle: exhaustive grid search with window refinement.

Deliberately independent of the simplex implementation: it only evaluates
candidate points against the constraint definitions. Coarse pass over
[lo, hi]^n, then repeatedly zoom a window around the best feasible point,
dividing the step by 5 until it reaches ``final_step``. The global best is
never discarded between stages.
"""

from __future__ import annotations

import numpy as np

GRID_FEAS_TOL = 1e-9


def _constraint_arrays(problem):
    n = problem.var_count
    ge = problem.ge_constraints
    le = problem.le_constraints
    A_ge = np.array([r for r, _ in ge]).reshape(len(ge), n) if ge else np.zeros((0, n))
    b_ge = np.array([b for _, b in ge])
    A_le = np.array([r for r, _ in le]).reshape(len(le), n) if le else np.zeros((0, n))
    b_le = np.array([b for _, b in le])
    upper = problem.var_upper_bounds
    return A_ge, b_ge, A_le, b_le, upper


def _scan_axes(problem, axes, arrays, keep: int = 1):
    """Best feasible grid points over the cartesian product of ``axes``.

    Scans one slice of the leading axis at a time; the products over the
    remaining axes are computed once and shifted per slice. Returns up to
    ``keep`` slice-minima, best first: distinct leading coordinates give
    refinement several basins to start from.
    """
    A_ge, b_ge, A_le, b_le, upper = arrays
    c = problem.objective
    n = len(axes)
    found: list[tuple[float, np.ndarray]] = []

    if n == 1:
        rest = np.zeros((1, 0))
    else:
        rest = np.stack(
            [m.ravel() for m in np.meshgrid(*axes[1:], indexing="ij")], axis=1
        )
    k = rest.shape[0]
    ge_rest = rest @ A_ge[:, 1:].T if A_ge.shape[0] else np.zeros((k, 0))
    le_rest = rest @ A_le[:, 1:].T if A_le.shape[0] else np.zeros((k, 0))
    obj_rest = rest @ c[1:]
    if upper is not None and n > 1:
        upper_rest_ok = np.all(rest <= upper[1:] + GRID_FEAS_TOL, axis=1)
    else:
        upper_rest_ok = np.ones(k, dtype=bool)

    for v0 in axes[0]:
        if upper is not None and v0 > upper[0] + GRID_FEAS_TOL:
            continue
        mask = upper_rest_ok.copy()
        if A_ge.shape[0]:
            mask &= np.all(ge_rest + v0 * A_ge[:, 0] >= b_ge - GRID_FEAS_TOL, axis=1)
        if A_le.shape[0]:
            mask &= np.all(le_rest + v0 * A_le[:, 0] <= b_le + GRID_FEAS_TOL, axis=1)
        if not mask.any():
            continue
        objs = obj_rest[mask] + v0 * c[0]
        i = int(np.argmin(objs))
        x = np.empty(n)
        x[0] = v0
        if n > 1:
            x[1:] = rest[mask][i]
        found.append((float(objs[i]), x))
    found.sort(key=lambda t: t[0])
    return found[:keep]


COARSE_STEP_BY_DIM = {1: 0.01, 2: 0.05, 3: 0.10, 4: 0.25}


def grid_solve(
    problem,
    lo: float = 0.0,
    hi: float = 20.0,
    coarse_step: float | None = None,
    final_step: float = 2e-5,
    shrink: float = 7.0,
    starts: int = 2,
):
    """Return (objective, x) of the best grid point, or (None, None).

    Exhaustive coarse pass, then a cascade of lattice scans around the
    incumbent at geometrically finer steps. Coarse steps scale with
    dimension to keep the exhaustive pass tractable.
    """
    arrays = _constraint_arrays(problem)
    n = problem.var_count
    if coarse_step is None:
        coarse_step = COARSE_STEP_BY_DIM.get(n, 0.25)
    axes = [np.arange(lo, hi + coarse_step / 2, coarse_step) for _ in range(n)]
    seeds = _scan_axes(problem, axes, arrays, keep=starts)
    if not seeds:
        return None, None

    best_obj, best_x = None, None
    for cur_obj, cur_x in seeds:
        if best_obj is not None:
            # a later seed only matters if its coarse value is close enough
            # to the polished best that refinement could still overtake it
            margin = coarse_step * float(np.abs(problem.objective).sum()) * 8
            if cur_obj > best_obj + margin:
                continue
        step = coarse_step
        while True:
            cur_obj, cur_x = _level_polish(
                problem, arrays, cur_obj, cur_x, step, lo, hi
            )
            if step <= final_step:
                break
            step = max(step / shrink, final_step)
        if best_obj is None or cur_obj < best_obj:
            best_obj, best_x = cur_obj, cur_x
    return best_obj, best_x


def _subset_scan(problem, arrays, cur_obj, cur_x, vary, step, reach, lo, hi):
    """Scan the lattice patch around the incumbent varying only ``vary`` axes."""
    A_ge, b_ge, A_le, b_le, upper = arrays
    c = problem.objective
    offs = np.arange(-reach, reach + 1) * step
    axes_vals = []
    for j in vary:
        v = np.unique(np.clip(cur_x[j] + offs, lo, hi))
        axes_vals.append(v)
    mesh = np.meshgrid(*axes_vals, indexing="ij")
    k = mesh[0].size
    X = np.tile(cur_x, (k, 1))
    for idx, j in enumerate(vary):
        X[:, j] = mesh[idx].ravel()
    mask = np.ones(k, dtype=bool)
    if A_ge.shape[0]:
        mask &= np.all(X @ A_ge.T >= b_ge - GRID_FEAS_TOL, axis=1)
    if A_le.shape[0]:
        mask &= np.all(X @ A_le.T <= b_le + GRID_FEAS_TOL, axis=1)
    if upper is not None:
        mask &= np.all(X <= upper + GRID_FEAS_TOL, axis=1)
    if not mask.any():
        return cur_obj, cur_x, False
    objs = X[mask] @ c
    i = int(np.argmin(objs))
    if objs[i] < cur_obj - 1e-15:
        return float(objs[i]), X[mask][i].copy(), True
    return cur_obj, cur_x, False


def _level_polish(problem, arrays, cur_obj, cur_x, step, lo, hi, max_hops=60):
    """Hop between subset scans at one step size until nothing improves.

    Pair scans reach far along faces (improving directions are often skew
    integer combinations such as 13 steps on one axis against 7 on another);
    the full box and triples cover locally-coupled moves.
    """
    from itertools import combinations

    n = cur_x.shape[0]
    axes = list(range(n))
    triple_reach = 36 if n == 3 else 24
    for _ in range(max_hops):
        improved = False
        cur_obj, cur_x, hit = _subset_scan(
            problem, arrays, cur_obj, cur_x, axes, step, 8, lo, hi
        )
        improved |= hit
        for pair in combinations(axes, 2):
            cur_obj, cur_x, hit = _subset_scan(
                problem, arrays, cur_obj, cur_x, pair, step, 120, lo, hi
            )
            improved |= hit
        if n >= 3:
            for triple in combinations(axes, 3):
                cur_obj, cur_x, hit = _subset_scan(
                    problem, arrays, cur_obj, cur_x, triple, step, triple_reach, lo, hi
                )
                improved |= hit
        if not improved:
            break
    return cur_obj, cur_x


def _sample_row(rng, n_vars, existing, max_cos=0.9, max_axis_cos=0.92, tries=200):
    """A random nonneg row whose normal is well-angled against previous rows
    and the axis bounds; thin corners would defeat grid refinement."""
    for _ in range(tries):
        row = rng.uniform(0.2, 2.0, size=n_vars)
        unit = row / np.linalg.norm(row)
        if np.max(unit) > max_axis_cos:
            continue
        if any(abs(float(unit @ u)) > max_cos for u in existing):
            continue
        existing.append(unit)
        return row
    existing.append(unit)
    return row


def make_random_diet_instance(rng: np.random.Generator, n_vars: int, max_rows: int = 6):
    """Small random LP with a strictly interior feasible point baked in and
    well-conditioned vertex geometry (see _sample_row)."""
    from pantryplan.lp import LpProblem

    x0 = rng.uniform(2.0, 8.0, size=n_vars)
    n_ge = int(rng.integers(1, min(4, max_rows) + 1))
    n_le = int(rng.integers(0, max_rows - n_ge + 1))
    normals: list[np.ndarray] = []
    ge = []
    for _ in range(n_ge):
        row = _sample_row(rng, n_vars, normals)
        ge.append((row, float(row @ x0) * float(rng.uniform(0.5, 0.85))))
    le = []
    for _ in range(n_le):
        row = _sample_row(rng, n_vars, normals)
        le.append((row, float(row @ x0) * float(rng.uniform(1.3, 2.0))))
    return LpProblem(
        objective=rng.uniform(0.2, 3.0, size=n_vars),
        ge_constraints=ge,
        le_constraints=le,
        var_upper_bounds=np.full(n_vars, 20.0),
    )


def make_random_feasible_instance(rng: np.random.Generator, n_vars: int, n_rows: int):
    """Larger random LP (for residual suites), feasible by construction."""
    from pantryplan.lp import LpProblem

    x0 = rng.uniform(0.5, 5.0, size=n_vars)
    ge = []
    le = []
    for _ in range(n_rows):
        row = rng.uniform(0.0, 3.0, size=n_vars) * (rng.random(size=n_vars) < 0.6)
        if not np.any(row > 0):
            row[int(rng.integers(0, n_vars))] = 1.0
        if rng.random() < 0.6:
            ge.append((row, float(row @ x0) * float(rng.uniform(0.4, 0.9))))
        else:
            le.append((row, float(row @ x0) * float(rng.uniform(1.2, 2.5))))
    return LpProblem(
        objective=rng.uniform(0.05, 4.0, size=n_vars),
        ge_constraints=ge,
        le_constraints=le,
        var_upper_bounds=np.full(n_vars, 50.0),
    )
