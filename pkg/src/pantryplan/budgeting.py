"""Weekly budget and household nutrient requirements.

The budget is an income-share model capped by disposable income; nutrient
floors are per-member table lookups adjusted by condition rules and then
summed over the household. Rule magnitudes ship as configurable fixtures in
``personalization_rules.json`` and are not clinical guidance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import BudgetError, ConfigError
from .knowledge import (
    CONDITION_REGISTRY,
    HouseholdProfile,
    RequirementTable,
)

FOOD_SHARE_BAND = (0.15, 0.25)
WEEKS_PER_MONTH = 4.0


@dataclass
class BudgetPolicy:
    food_share: float = 0.20
    weeks_per_month: float = WEEKS_PER_MONTH
    allow_unsafe_share: bool = False

    def __post_init__(self):
        lo, hi = FOOD_SHARE_BAND
        if not self.allow_unsafe_share and not (lo <= self.food_share <= hi):
            raise ConfigError(
                f"food_share {self.food_share} outside legal band [{lo}, {hi}]"
            )


@dataclass
class WeeklyBudget:
    amount: float
    clamped: bool
    disposable_monthly: float
    food_share: float
    monthly_income: float

    def to_dict(self) -> dict:
        return {
            "amount": self.amount,
            "clamped": self.clamped,
            "disposable_monthly": self.disposable_monthly,
            "food_share": self.food_share,
            "monthly_income": self.monthly_income,
        }


def weekly_budget(profile: HouseholdProfile, policy: BudgetPolicy | None = None) -> WeeklyBudget:
    """Income-share weekly budget, clamped to the disposable-income ceiling.

    The household's own food_share wins over the policy default.
    """
    if policy is None:
        policy = BudgetPolicy()
    share = profile.food_share if profile.food_share else policy.food_share
    disposable = profile.monthly_income - profile.fixed_expenses
    if disposable <= 0:
        raise BudgetError(
            f"disposable income is {disposable:.2f}; cannot budget for food"
        )
    raw = share * profile.monthly_income / policy.weeks_per_month
    ceiling = disposable / policy.weeks_per_month
    if raw > ceiling:
        return WeeklyBudget(ceiling, True, disposable, share, profile.monthly_income)
    return WeeklyBudget(raw, False, disposable, share, profile.monthly_income)


@dataclass(frozen=True)
class RuleEffect:
    nutrient: str
    multiplier: float | None = None
    cap: float | None = None

    def __post_init__(self):
        if (self.multiplier is None) == (self.cap is None):
            raise ConfigError(
                f"effect on {self.nutrient}: exactly one of multiplier/cap required"
            )
        if self.multiplier is not None and self.multiplier <= 0:
            raise ConfigError(f"effect on {self.nutrient}: multiplier must be > 0")
        if self.cap is not None and self.cap <= 0:
            raise ConfigError(f"effect on {self.nutrient}: cap must be > 0")


@dataclass
class PersonalizationRule:
    condition: str
    effects: list[RuleEffect] = field(default_factory=list)

    def __post_init__(self):
        if self.condition not in CONDITION_REGISTRY:
            raise ConfigError(f"unknown condition code {self.condition!r}")


def load_personalization_rules(source=None) -> list[PersonalizationRule]:
    """Load condition rules; defaults to the bundled fixture file."""
    if source is None:
        text = (
            resources.files("pantryplan.data")
            .joinpath("personalization_rules.json")
            .read_text()
        )
        raw = json.loads(text)
    elif isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    else:
        raw = json.load(source)
    rules = []
    seen = set()
    for entry in raw:
        rule = PersonalizationRule(
            condition=entry["condition"],
            effects=[RuleEffect(nutrient=e["nutrient"],
                                multiplier=e.get("multiplier"),
                                cap=e.get("cap")) for e in entry["effects"]],
        )
        if rule.condition in seen:
            raise ConfigError(f"duplicate rule for condition {rule.condition!r}")
        seen.add(rule.condition)
        rules.append(rule)
    return rules


def household_requirements(
    profile: HouseholdProfile,
    table: RequirementTable,
    rules: list[PersonalizationRule],
) -> tuple[dict[str, float], dict[str, float]]:
    """Aggregate weekly floors R_n and caps U_n for the whole household.

    Per member: look up the table row, apply every matching condition rule's
    multipliers, then sum over members. Caps are per-member values summed
    over the members whose conditions set them.
    """
    by_condition = {r.condition: r for r in rules}
    floors: dict[str, float] = {}
    caps: dict[str, float] = {}
    for member in profile.members:
        r = table.lookup(member)
        for code in sorted(member.conditions):
            rule = by_condition.get(code)
            if rule is None:
                continue
            for effect in rule.effects:
                if effect.multiplier is not None and effect.nutrient in r:
                    r[effect.nutrient] *= effect.multiplier
                if effect.cap is not None:
                    caps[effect.nutrient] = caps.get(effect.nutrient, 0.0) + effect.cap
        for nid, val in r.items():
            floors[nid] = floors.get(nid, 0.0) + val
    return floors, caps
