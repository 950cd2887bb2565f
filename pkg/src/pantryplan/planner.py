"""Weekly diet LP: build, solve, score, and diagnose.

One variable per candidate item (100 g units per week). Rows: one floor per
lower-bound nutrient, one budget row, one cap row per upper-bound nutrient,
and one diversity row per item capping its share of total plan mass so the
classic least-cost degeneracy (two or three foods) cannot occur.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, InfeasiblePlanError, MissingPriceError
from .knowledge import FoodItem, HouseholdMember
from .lp import LpProblem, LpSolution, solve

DEFAULT_DIVERSITY_CAP = 0.25
ADULT_EQUIV_MASS = 140.0  # base units (100 g) of food per adult-equivalent per week
REL_TOL = 1e-6


def mass_budget_for(members: list[HouseholdMember]) -> float:
    """Total weekly plan-mass estimate M used by the diversity rows."""
    total = 0.0
    for m in members:
        if m.age >= 14:
            total += 1.0
        elif m.age >= 4:
            total += 0.6
        else:
            total += 0.3
    return ADULT_EQUIV_MASS * total


@dataclass
class DietModelConfig:
    candidate_items: list[FoodItem]
    diversity_cap: float | None = DEFAULT_DIVERSITY_CAP  # None disables the rows
    upper_bound_nutrients: dict[str, float] = field(default_factory=dict)
    mass_budget: float = 2 * ADULT_EQUIV_MASS

    def __post_init__(self):
        if self.diversity_cap is not None and not (0 < self.diversity_cap <= 1):
            raise ContractViolation("diversity_cap must be in (0, 1]")
        for nid, cap in self.upper_bound_nutrients.items():
            if cap <= 0:
                raise ContractViolation(f"cap for {nid} must be positive")


@dataclass
class BuiltModel:
    problem: LpProblem
    item_ids: list[str]
    floor_labels: list[str]  # parallel to ge rows
    le_labels: list[str]  # parallel to le rows; le_labels[0] == "budget"
    warnings: list[str] = field(default_factory=list)

    @property
    def budget_row_index(self) -> int:
        return 0


@dataclass
class AdequacyReport:
    per_nutrient: dict[str, float]
    aggregate_pct: float
    violations: list[str]

    def to_dict(self) -> dict:
        return {
            "per_nutrient": {k: round(v, 9) for k, v in self.per_nutrient.items()},
            "aggregate_pct": round(self.aggregate_pct, 9),
            "violations": list(self.violations),
        }


@dataclass
class MealPlan:
    quantities: dict[str, float]
    total_cost: float
    adequacy: AdequacyReport
    prices_used: dict[str, float]
    substitutions: list[tuple[str, str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "quantities": {k: round(v, 9) for k, v in sorted(self.quantities.items())},
            "total_cost": round(self.total_cost, 9),
            "adequacy": self.adequacy.to_dict(),
            "prices_used": {k: self.prices_used[k] for k in sorted(self.prices_used)},
            "substitutions": [list(s) for s in self.substitutions],
        }

    @classmethod
    def from_dict(cls, d) -> "MealPlan":
        ad = d["adequacy"]
        return cls(
            quantities=dict(d["quantities"]),
            total_cost=d["total_cost"],
            adequacy=AdequacyReport(
                per_nutrient=dict(ad["per_nutrient"]),
                aggregate_pct=ad["aggregate_pct"],
                violations=list(ad["violations"]),
            ),
            prices_used=dict(d["prices_used"]),
            substitutions=[tuple(s) for s in d.get("substitutions", [])],
        )


@dataclass
class Diagnosis:
    kind: str  # "budget-bound" | "nutrient-bound" | "mixed"
    min_budget: float | None = None
    unsatisfiable: list[str] = field(default_factory=list)
    detail: str = ""

    def __str__(self):
        if self.kind == "budget-bound":
            return f"budget-bound (minimum feasible budget {self.min_budget:.2f})"
        if self.kind == "nutrient-bound":
            return f"nutrient-bound ({', '.join(self.unsatisfiable) or self.detail})"
        return (
            f"mixed: floors {', '.join(self.unsatisfiable)} unsatisfiable and "
            f"budget below {self.min_budget:.2f}"
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "min_budget": self.min_budget,
            "unsatisfiable": list(self.unsatisfiable),
            "detail": self.detail,
        }


def build_model(
    config: DietModelConfig,
    requirements: dict[str, float],
    prices: dict[str, float],
    budget: float,
) -> BuiltModel:
    """Assemble the weekly LP; see the module docstring for the row layout."""
    items = config.candidate_items
    missing = [it.id for it in items if it.id not in prices]
    if missing:
        raise MissingPriceError(missing)
    n = len(items)
    objective = np.array([prices[it.id] for it in items], dtype=np.float64)

    ge_rows: list[tuple[np.ndarray, float]] = []
    floor_labels: list[str] = []
    warnings: list[str] = []
    for nid in sorted(requirements):
        bound = requirements[nid]
        if bound <= 0:
            raise ContractViolation(f"floor for {nid} must be positive, got {bound}")
        row = np.array([it.nutrients.get(nid, 0.0) for it in items], dtype=np.float64)
        if n and not np.any(row > 0):
            warnings.append(f"no candidate item provides {nid}; model is infeasible")
        ge_rows.append((row, float(bound)))
        floor_labels.append(nid)

    le_rows: list[tuple[np.ndarray, float]] = [(objective.copy(), float(budget))]
    le_labels = ["budget"]
    for nid in sorted(config.upper_bound_nutrients):
        row = np.array([it.nutrients.get(nid, 0.0) for it in items], dtype=np.float64)
        le_rows.append((row, float(config.upper_bound_nutrients[nid])))
        le_labels.append(f"cap:{nid}")

    if config.diversity_cap is not None:
        per_item_cap = config.diversity_cap * config.mass_budget
        for j, it in enumerate(items):
            row = np.zeros(n)
            row[j] = 1.0
            le_rows.append((row, per_item_cap))
            le_labels.append(f"diversity:{it.id}")

    problem = LpProblem(
        objective=objective,
        ge_constraints=ge_rows,
        le_constraints=le_rows,
        var_count=n,
    )
    return BuiltModel(
        problem=problem,
        item_ids=[it.id for it in items],
        floor_labels=floor_labels,
        le_labels=le_labels,
        warnings=warnings,
    )


def adequacy(
    items: list[FoodItem],
    quantities: dict[str, float],
    requirements: dict[str, float],
) -> AdequacyReport:
    """Per-nutrient achieved/required ratios and their capped mean.

    Capping each ratio at 1 before averaging keeps over-supply of one
    nutrient from masking a deficit in another.
    """
    by_id = {it.id: it for it in items}
    per: dict[str, float] = {}
    capped_sum = 0.0
    for nid in sorted(requirements):
        need = requirements[nid]
        if need <= 0:
            raise ContractViolation(f"requirement for {nid} must be positive")
        achieved = 0.0
        for iid, qty in quantities.items():
            item = by_id.get(iid)
            if item is not None:
                achieved += item.nutrients.get(nid, 0.0) * qty
        ratio = achieved / need
        per[nid] = ratio
        capped_sum += min(1.0, ratio)
    count = len(requirements)
    aggregate = (capped_sum / count * 100.0) if count else 0.0
    violations = sorted((nid for nid, r in per.items() if r < 1.0), key=lambda k: (per[k], k))
    return AdequacyReport(per_nutrient=per, aggregate_pct=aggregate, violations=violations)


def plan(
    config: DietModelConfig,
    requirements: dict[str, float],
    prices: dict[str, float],
    budget: float,
) -> MealPlan:
    """Solve the weekly LP and wrap the optimum as a MealPlan.

    Raises InfeasiblePlanError (with a diagnosis) when no plan exists.
    """
    built = build_model(config, requirements, prices, budget)
    solution = solve(built.problem)
    if solution.status == "unbounded":
        raise AssertionError(
            "diet LP came back unbounded; prices are nonnegative and caps finite"
        )
    if solution.status == "infeasible":
        raise InfeasiblePlanError(diagnose_infeasibility(built))
    return _plan_from_solution(built, config, requirements, prices, solution)


def _plan_from_solution(
    built: BuiltModel,
    config: DietModelConfig,
    requirements: dict[str, float],
    prices: dict[str, float],
    solution: LpSolution,
) -> MealPlan:
    quantities = {
        iid: float(q)
        for iid, q in zip(built.item_ids, solution.x)
        if q > 1e-9
    }
    report = adequacy(config.candidate_items, quantities, requirements)
    return MealPlan(
        quantities=quantities,
        total_cost=float(solution.objective_value),
        adequacy=report,
        prices_used={iid: prices[iid] for iid in built.item_ids},
    )


def _without_le_rows(problem: LpProblem, drop: set[int]) -> LpProblem:
    return LpProblem(
        objective=problem.objective,
        ge_constraints=list(problem.ge_constraints),
        le_constraints=[r for i, r in enumerate(problem.le_constraints) if i not in drop],
        var_upper_bounds=problem.var_upper_bounds,
        var_count=problem.var_count,
    )


def diagnose_infeasibility(built: BuiltModel) -> Diagnosis:
    """Classify an infeasible model as budget-bound, nutrient-bound, or mixed.

    Budget-bound: feasible once the budget row is removed; the minimum budget
    restoring feasibility is the cost of that relaxed optimum. Nutrient-bound:
    floors that cannot be met even with unlimited money. Mixed: both.
    """
    problem = built.problem
    budget_idx = built.budget_row_index
    relaxed = _without_le_rows(problem, {budget_idx})
    sol = solve(relaxed)
    if sol.is_optimal:
        budget = problem.le_constraints[budget_idx][1]
        if sol.objective_value <= budget * (1 + REL_TOL) + REL_TOL:
            raise ContractViolation(
                "diagnose_infeasibility called on a feasible problem"
            )
        return Diagnosis(kind="budget-bound", min_budget=float(sol.objective_value))

    # No budget and still infeasible: find floors unreachable on their own.
    unsatisfiable: list[str] = []
    bad_rows: set[int] = set()
    for gi, (row, bound) in enumerate(problem.ge_constraints):
        probe = LpProblem(
            objective=-row,  # maximize achievable amount of this nutrient
            ge_constraints=[],
            le_constraints=relaxed.le_constraints,
            var_upper_bounds=problem.var_upper_bounds,
            var_count=problem.var_count,
        )
        psol = solve(probe)
        best = -psol.objective_value if psol.is_optimal else float("inf")
        if psol.is_optimal and best < bound * (1 - REL_TOL):
            unsatisfiable.append(built.floor_labels[gi])
            bad_rows.add(gi)

    if not unsatisfiable:
        return Diagnosis(
            kind="nutrient-bound",
            detail="floors are jointly unsatisfiable under the caps",
        )

    # Drop the hopeless floors; if money alone now fixes the rest, it's mixed.
    pruned = LpProblem(
        objective=problem.objective,
        ge_constraints=[r for i, r in enumerate(problem.ge_constraints) if i not in bad_rows],
        le_constraints=relaxed.le_constraints,
        var_upper_bounds=problem.var_upper_bounds,
        var_count=problem.var_count,
    )
    psol = solve(pruned)
    if psol.is_optimal:
        budget = problem.le_constraints[budget_idx][1]
        if psol.objective_value > budget * (1 + REL_TOL):
            return Diagnosis(
                kind="mixed",
                min_budget=float(psol.objective_value),
                unsatisfiable=unsatisfiable,
            )
    return Diagnosis(kind="nutrient-bound", unsatisfiable=unsatisfiable)
