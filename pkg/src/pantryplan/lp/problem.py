"""Linear-program container types.

Conventions: minimize ``objective . x`` subject to ``row . x >= bound`` for
ge rows, ``row . x <= bound`` for le rows, optional per-variable caps, and
x >= 0 throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError


@dataclass
class LpProblem:
    objective: np.ndarray
    ge_constraints: list[tuple[np.ndarray, float]] = field(default_factory=list)
    le_constraints: list[tuple[np.ndarray, float]] = field(default_factory=list)
    var_upper_bounds: np.ndarray | None = None
    var_count: int = 0

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=np.float64)
        if self.var_count == 0:
            self.var_count = self.objective.shape[0]
        self.ge_constraints = [
            (np.asarray(r, dtype=np.float64), float(b)) for r, b in self.ge_constraints
        ]
        self.le_constraints = [
            (np.asarray(r, dtype=np.float64), float(b)) for r, b in self.le_constraints
        ]
        if self.var_upper_bounds is not None:
            self.var_upper_bounds = np.asarray(self.var_upper_bounds, dtype=np.float64)

    def validate(self) -> None:
        n = self.var_count
        if self.objective.shape != (n,):
            raise DimensionError(
                f"objective has length {self.objective.shape[0]}, expected {n}"
            )
        for kind, rows in (("ge", self.ge_constraints), ("le", self.le_constraints)):
            for i, (row, bound) in enumerate(rows):
                if row.shape != (n,):
                    raise DimensionError(
                        f"{kind} row {i} has length {row.shape[0]}, expected {n}"
                    )
                if not np.isfinite(bound):
                    raise DimensionError(f"{kind} row {i} bound is not finite")
                if not np.all(np.isfinite(row)):
                    raise DimensionError(f"{kind} row {i} has non-finite coefficients")
        if not np.all(np.isfinite(self.objective)):
            raise DimensionError("objective has non-finite coefficients")
        if self.var_upper_bounds is not None:
            if self.var_upper_bounds.shape != (n,):
                raise DimensionError(
                    f"var_upper_bounds has length {self.var_upper_bounds.shape[0]}, expected {n}"
                )
            if np.any(self.var_upper_bounds < 0):
                raise DimensionError("var_upper_bounds must be >= 0")

    @property
    def row_count(self) -> int:
        extra = 0
        if self.var_upper_bounds is not None:
            extra = int(np.sum(np.isfinite(self.var_upper_bounds)))
        return len(self.ge_constraints) + len(self.le_constraints) + extra

    def debug_dump(self) -> str:
        """Plain-text listing for bug reports."""
        lines = [f"minimize {_vec(self.objective)}"]
        for row, b in self.ge_constraints:
            lines.append(f"  {_vec(row)} >= {b:g}")
        for row, b in self.le_constraints:
            lines.append(f"  {_vec(row)} <= {b:g}")
        if self.var_upper_bounds is not None:
            lines.append(f"  x <= {_vec(self.var_upper_bounds)}")
        lines.append(f"  x >= 0   ({self.var_count} vars)")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "objective": self.objective.tolist(),
            "ge": [[r.tolist(), b] for r, b in self.ge_constraints],
            "le": [[r.tolist(), b] for r, b in self.le_constraints],
            "upper": None if self.var_upper_bounds is None else self.var_upper_bounds.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "LpProblem":
        return cls(
            objective=np.array(d["objective"], dtype=np.float64),
            ge_constraints=[(np.array(r), float(b)) for r, b in d.get("ge", [])],
            le_constraints=[(np.array(r), float(b)) for r, b in d.get("le", [])],
            var_upper_bounds=(
                None if d.get("upper") is None else np.array(d["upper"], dtype=np.float64)
            ),
        )

    @classmethod
    def from_json(cls, path) -> "LpProblem":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _vec(v: np.ndarray) -> str:
    return "[" + ", ".join(f"{x:g}" for x in v) + "]"


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective_value: float | None
    iterations: int

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"
