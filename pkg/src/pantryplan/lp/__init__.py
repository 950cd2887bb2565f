from .problem import LpProblem, LpSolution
from .solver import FEAS_TOL, active_backend, feasibility_residuals, set_backend, solve

__all__ = [
    "LpProblem",
    "LpSolution",
    "solve",
    "set_backend",
    "active_backend",
    "feasibility_residuals",
    "FEAS_TOL",
]
