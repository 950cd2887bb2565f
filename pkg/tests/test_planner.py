import json

import numpy as np
import pytest

from _oracle import grid_solve
from pantryplan.errors import (
    ContractViolation,
    InfeasiblePlanError,
    MissingPriceError,
)
from pantryplan.knowledge import FoodItem
from pantryplan.planner import (
    DietModelConfig,
    adequacy,
    build_model,
    diagnose_infeasibility,
    mass_budget_for,
    plan,
)
from pantryplan.knowledge import HouseholdMember

from conftest import DATA


def _config(items, caps=None, cap=0.25, mass=140.0):
    return DietModelConfig(
        candidate_items=items,
        diversity_cap=cap,
        upper_bound_nutrients=caps or {},
        mass_budget=mass,
    )


def test_structural_counts(small_foods, small_prices):
    built = build_model(
        _config(small_foods, caps={"sodium_mg": 14000.0}),
        {"energy_kcal": 2000.0, "protein_g": 400.0},
        small_prices,
        budget=100.0,
    )
    p = built.problem
    assert p.var_count == 3
    assert len(p.ge_constraints) == 2
    assert len(p.le_constraints) == 2 + 3  # budget + cap, then diversity rows
    assert built.le_labels[0] == "budget"


def test_no_caps_means_budget_plus_diversity_only(small_foods, small_prices):
    built = build_model(
        _config(small_foods), {"energy_kcal": 2000.0}, small_prices, budget=50.0
    )
    assert len(built.problem.le_constraints) == 1 + 3
    assert built.le_labels == [
        "budget",
        "diversity:chicken",
        "diversity:rice",
        "diversity:lentils",
    ]


def test_matrix_matches_golden_fixture(small_foods, small_prices):
    built = build_model(
        _config(small_foods, caps={"sodium_mg": 14000.0}),
        {"energy_kcal": 2000.0, "protein_g": 400.0},
        small_prices,
        budget=100.0,
    )
    golden = json.loads((DATA / "build_model_golden.json").read_text())
    assert built.problem.objective.tolist() == golden["objective"]
    assert [[r.tolist(), b] for r, b in built.problem.ge_constraints] == golden["ge"]
    assert [[r.tolist(), b] for r, b in built.problem.le_constraints] == golden["le"]
    assert built.floor_labels == golden["floor_labels"]
    assert built.le_labels == golden["le_labels"]


def test_missing_price_raises(small_foods):
    with pytest.raises(MissingPriceError) as err:
        build_model(_config(small_foods), {"energy_kcal": 2000.0}, {"chicken": 3.2}, 100.0)
    assert "rice" in err.value.item_ids and "lentils" in err.value.item_ids


def test_unreachable_floor_gets_warning(small_foods, small_prices):
    built = build_model(
        _config(small_foods),
        {"energy_kcal": 2000.0, "vitamin_d_iu": 4200.0},
        small_prices,
        budget=1000.0,
    )
    assert built.warnings == []  # chicken carries vitamin D

    no_source = FoodItem(
        id="water", name="Water", category="other", nutrients={},
        tags=frozenset({"halal"}), pack_size=1.0,
    )
    built2 = build_model(
        _config([no_source]), {"energy_kcal": 100.0}, {"water": 0.1}, 10.0
    )
    assert any("energy_kcal" in w for w in built2.warnings)


def test_one_food_world_buys_binding_amount():
    food = FoodItem(
        id="ration", name="Ration", category="other",
        nutrients={"energy_kcal": 100.0, "protein_g": 10.0},
        tags=frozenset({"halal"}), pack_size=1.0,
    )
    requirements = {"energy_kcal": 1000.0, "protein_g": 50.0}
    result = plan(_config([food], cap=1.0), requirements, {"ration": 1.0}, budget=1e9)
    # energy is the binding floor: 1000/100 = 10 units
    assert result.quantities["ration"] == pytest.approx(10.0, rel=1e-9)
    assert result.adequacy.aggregate_pct == pytest.approx(100.0, abs=1e-6)
    assert result.adequacy.violations == []


def test_zero_budget_diagnosed_budget_bound(small_foods, small_prices):
    requirements = {"energy_kcal": 2000.0, "protein_g": 400.0}
    with pytest.raises(InfeasiblePlanError) as err:
        plan(_config(small_foods), requirements, small_prices, budget=0.0)
    diag = err.value.diagnosis
    assert diag.kind == "budget-bound"
    unconstrained = plan(_config(small_foods), requirements, small_prices, budget=1e9)
    assert diag.min_budget == pytest.approx(unconstrained.total_cost, rel=1e-9)


def test_budget_at_90pct_of_minimum_is_budget_bound(small_foods, small_prices):
    requirements = {"energy_kcal": 2000.0, "protein_g": 400.0}
    unconstrained = plan(_config(small_foods), requirements, small_prices, budget=1e9)
    tight = 0.9 * unconstrained.total_cost
    with pytest.raises(InfeasiblePlanError) as err:
        plan(_config(small_foods), requirements, small_prices, budget=tight)
    diag = err.value.diagnosis
    assert diag.kind == "budget-bound"
    assert diag.min_budget == pytest.approx(unconstrained.total_cost, rel=1e-4)


def test_nutrient_without_source_is_nutrient_bound(small_foods, small_prices):
    requirements = {"energy_kcal": 2000.0, "vitamin_d_iu": 4200.0}
    # drop chicken: rice and lentils carry zero vitamin D
    veg = [it for it in small_foods if it.id != "chicken"]
    with pytest.raises(InfeasiblePlanError) as err:
        plan(_config(veg), requirements, small_prices, budget=1e9)
    diag = err.value.diagnosis
    assert diag.kind == "nutrient-bound"
    assert "vitamin_d_iu" in diag.unsatisfiable


def test_diagnose_on_feasible_problem_is_contract_violation(small_foods, small_prices):
    built = build_model(
        _config(small_foods), {"energy_kcal": 2000.0}, small_prices, budget=1e9
    )
    with pytest.raises(ContractViolation):
        diagnose_infeasibility(built)


def test_small_scenario_cost_matches_grid_oracle(small_foods, small_prices):
    # scaled-down floors keep the optimum inside the oracle's [0, 20] box
    requirements = {"energy_kcal": 1750.0, "protein_g": 39.2, "iron_mg": 5.6}
    config = _config(small_foods, cap=0.25, mass=56.0)
    result = plan(config, requirements, small_prices, budget=1e9)
    built = build_model(config, requirements, small_prices, budget=1e9)
    zo, _ = grid_solve(built.problem)
    assert result.total_cost == pytest.approx(zo, rel=1e-4)


def test_meal_plan_invariants_on_fixture(foods, base_prices, table, rules):
    from pantryplan.budgeting import household_requirements, weekly_budget
    from pantryplan.knowledge import HouseholdProfile, compatible_items

    profile = HouseholdProfile(
        members=[HouseholdMember(age=30, sex="male"),
                 HouseholdMember(age=29, sex="female")],
        monthly_income=9000,
        fixed_expenses=3000,
        dietary_rules=frozenset({"halal"}),
    )
    floors, caps = household_requirements(profile, table, rules)
    budget = weekly_budget(profile)
    config = DietModelConfig(
        candidate_items=compatible_items(foods, profile.dietary_rules),
        diversity_cap=0.15,
        upper_bound_nutrients=caps,
        mass_budget=mass_budget_for(profile.members),
    )
    result = plan(config, floors, base_prices, budget.amount)

    recomputed = sum(base_prices[i] * q for i, q in result.quantities.items())
    assert result.total_cost == pytest.approx(recomputed, rel=1e-6)
    assert result.total_cost <= budget.amount * (1 + 1e-6)
    for nid, need in floors.items():
        achieved = result.adequacy.per_nutrient[nid] * need
        assert achieved >= need * (1 - 1e-6)
    assert result.adequacy.aggregate_pct >= 100.0 - 1e-6


def test_budget_monotonicity(small_foods, small_prices):
    requirements = {"energy_kcal": 2000.0, "protein_g": 400.0}
    unconstrained = plan(_config(small_foods), requirements, small_prices, budget=1e9)
    base = unconstrained.total_cost
    prev_cost = None
    for budget in (base * 1.01, base * 1.5, base * 4, base * 100):
        cost = plan(_config(small_foods), requirements, small_prices, budget).total_cost
        if prev_cost is not None:
            assert cost <= prev_cost + 1e-9
        prev_cost = cost


def test_requirement_scaling_monotonicity(small_foods, small_prices):
    requirements = {"energy_kcal": 2000.0, "protein_g": 400.0}
    full = plan(_config(small_foods), requirements, small_prices, budget=1e9).total_cost
    for k in (0.25, 0.5, 0.9, 1.0):
        scaled = {n: k * v for n, v in requirements.items()}
        cost = plan(_config(small_foods), scaled, small_prices, budget=1e9).total_cost
        assert cost <= full + 1e-9


# -- adequacy -------------------------------------------------------------------

def test_adequacy_exact_match(small_foods):
    requirements = {"energy_kcal": 165.0, "protein_g": 31.0}
    report = adequacy(small_foods, {"chicken": 1.0}, requirements)
    assert report.aggregate_pct == pytest.approx(100.0)
    assert report.violations == []


def test_adequacy_half(small_foods):
    requirements = {"energy_kcal": 330.0, "protein_g": 62.0}
    report = adequacy(small_foods, {"chicken": 1.0}, requirements)
    assert report.aggregate_pct == pytest.approx(50.0)
    assert report.violations == ["energy_kcal", "protein_g"]


def test_adequacy_empty_plan(small_foods):
    requirements = {"energy_kcal": 100.0, "protein_g": 10.0}
    report = adequacy(small_foods, {}, requirements)
    assert report.aggregate_pct == 0.0
    assert set(report.violations) == set(requirements)


def test_adequacy_zero_requirement_rejected(small_foods):
    with pytest.raises(ContractViolation):
        adequacy(small_foods, {}, {"energy_kcal": 0.0})


def test_violations_sorted_by_ratio(small_foods):
    requirements = {"energy_kcal": 165.0, "protein_g": 62.0, "iron_mg": 100.0}
    report = adequacy(small_foods, {"chicken": 1.0}, requirements)
    assert report.violations[0] == "iron_mg"  # worst ratio first


def test_diversity_cap_none_removes_rows(small_foods, small_prices):
    built = build_model(
        DietModelConfig(candidate_items=small_foods, diversity_cap=None),
        {"energy_kcal": 2000.0},
        small_prices,
        budget=100.0,
    )
    assert built.le_labels == ["budget"]


def test_mass_budget_for_scales_with_ages():
    adults = [HouseholdMember(age=30, sex="male")]
    kids = [HouseholdMember(age=6, sex="male")]
    toddler = [HouseholdMember(age=2, sex="female")]
    assert mass_budget_for(adults) == pytest.approx(140.0)
    assert mass_budget_for(kids) == pytest.approx(84.0)
    assert mass_budget_for(toddler) == pytest.approx(42.0)
