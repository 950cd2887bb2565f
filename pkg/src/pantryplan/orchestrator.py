"""Rule-based agent orchestration: the weekly planning cycle.

A single-threaded event loop runs the agents in dependency order (budget ->
requirements -> plan -> procurement -> explanation), records WorkflowEvents,
and persists a PlanRecord only when the whole cycle succeeds. Price
ingestion may happen concurrently; it communicates through the knowledge
base and triggers re-planning when the monitor detects shocks.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

from .adaptation import (
    DEFAULT_MIN_SIMILARITY,
    DEFAULT_TAU,
    PlanningContext,
    ReplanTrace,
    ShockEvent,
    build_substitution_graph,
    detect_shocks,
    replan_on_shock,
)
from .budgeting import (
    BudgetPolicy,
    WeeklyBudget,
    household_requirements,
    load_personalization_rules,
    weekly_budget,
)
from .errors import ContractViolation, InfeasiblePlanError
from .knowledge import (
    HARD_SAFETY_TAGS,
    FoodItem,
    KnowledgeBase,
    PlanRecord,
    compatible_items,
)
from .planner import DietModelConfig, MealPlan, mass_budget_for, plan

EVENT_KINDS = (
    "data-ingested",
    "budget-computed",
    "requirements-computed",
    "plan-generated",
    "shock-detected",
    "replanned",
    "list-generated",
    "explained",
)

# Which earlier kinds each kind requires within one session.
EVENT_DEPENDENCIES = {
    "plan-generated": {"budget-computed", "requirements-computed"},
    "replanned": {"shock-detected"},
    "list-generated": {"plan-generated"},
    "explained": {"plan-generated"},
}


@dataclass(frozen=True)
class WorkflowEvent:
    kind: str
    sequence: int
    payload: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sequence": self.sequence, "payload": self.payload}


@dataclass
class ShoppingLine:
    item_id: str
    packs: int
    pack_size: float
    line_cost: float

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "packs": self.packs,
            "pack_size": self.pack_size,
            "line_cost": round(self.line_cost, 9),
        }


@dataclass
class ShoppingList:
    lines: list[ShoppingLine]
    total: float

    def to_dict(self) -> dict:
        return {"lines": [l.to_dict() for l in self.lines], "total": round(self.total, 9)}


@dataclass
class ExplanationEntry:
    agent: str
    decision: str
    evidence: dict

    def to_dict(self) -> dict:
        return {"agent": self.agent, "decision": self.decision, "evidence": self.evidence}


@dataclass
class Explanation:
    entries: list[ExplanationEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries]}

    def agents(self) -> list[str]:
        return [e.agent for e in self.entries]


def shopping_list(meal_plan: MealPlan, foods: dict[str, FoodItem]) -> ShoppingList:
    """Round plan quantities up to whole packs; zero-quantity items are omitted.

    packs is the minimal integer with packs * pack_size >= quantity.
    """
    lines = []
    total = 0.0
    for item_id in sorted(meal_plan.quantities):
        qty = meal_plan.quantities[item_id]
        if qty <= 0:
            continue
        item = foods[item_id]
        packs = math.ceil(qty / item.pack_size)
        while packs > 0 and (packs - 1) * item.pack_size >= qty:
            packs -= 1  # undo float overshoot from the ceil
        price = meal_plan.prices_used[item_id]
        line_cost = packs * item.pack_size * price
        lines.append(ShoppingLine(item_id, packs, item.pack_size, line_cost))
        total += line_cost
    return ShoppingList(lines=lines, total=total)


def explain(
    meal_plan: MealPlan,
    budget: WeeklyBudget,
    requirements: dict[str, float],
    shopping: ShoppingList | None = None,
    events: list[ShockEvent] | None = None,
    trace: ReplanTrace | None = None,
    binding_tol: float = 1e-6,
) -> Explanation:
    """One entry per agent that acted, with its numeric evidence."""
    entries = [
        ExplanationEntry(
            agent="budget",
            decision=(
                f"weekly budget {budget.amount:.2f} = {budget.food_share:.3f} x "
                f"{budget.monthly_income:.0f} / 4"
                + (" (clamped to disposable income)" if budget.clamped else "")
            ),
            evidence=budget.to_dict(),
        )
    ]

    binding = []
    for nid, ratio in meal_plan.adequacy.per_nutrient.items():
        need = requirements.get(nid)
        if need and abs(ratio * need - need) <= binding_tol * need:
            binding.append(nid)
    entries.append(
        ExplanationEntry(
            agent="nutrition",
            decision=(
                "binding floors: " + ", ".join(sorted(binding))
                if binding
                else "no nutrient floor is binding"
            ),
            evidence={
                "binding": sorted(binding),
                "aggregate_adequacy_pct": meal_plan.adequacy.aggregate_pct,
            },
        )
    )

    if events:
        entries.append(
            ExplanationEntry(
                agent="price-monitor",
                decision="detected " + ", ".join(
                    f"{e.item_id} {e.rel_change:+.0%}" for e in events
                ),
                evidence={"events": [e.to_dict() for e in events]},
            )
        )
    if trace is not None or meal_plan.substitutions:
        considered = [] if trace is None else [e.to_dict() for e in trace.shocked]
        entries.append(
            ExplanationEntry(
                agent="substitution",
                decision=(
                    "; ".join(
                        f"{a} -> {b} ({why})" for a, b, why in meal_plan.substitutions
                    )
                    or "no substitution needed"
                ),
                evidence={
                    "considered": considered,
                    "substitutions": [list(s) for s in meal_plan.substitutions],
                },
            )
        )
    if shopping is not None:
        overshoot = shopping.total - meal_plan.total_cost
        entries.append(
            ExplanationEntry(
                agent="procurement",
                decision=f"pack rounding adds {overshoot:.2f} over the LP cost",
                evidence={
                    "plan_cost": meal_plan.total_cost,
                    "list_total": shopping.total,
                    "overshoot": overshoot,
                },
            )
        )
    return Explanation(entries=entries)


@dataclass
class CycleResult:
    plan: MealPlan
    shopping: ShoppingList
    explanation: Explanation
    budget: WeeklyBudget
    events: list[WorkflowEvent]

    def to_dict(self) -> dict:
        return {
            "plan": self.plan.to_dict(),
            "shopping_list": self.shopping.to_dict(),
            "explanation": self.explanation.to_dict(),
            "budget": self.budget.to_dict(),
            "events": [e.to_dict() for e in self.events],
        }


class Orchestrator:
    """Drives the agents for every household in one knowledge base."""

    def __init__(
        self,
        kb: KnowledgeBase,
        tau: float = DEFAULT_TAU,
        diversity_cap: float | None = 0.15,
        min_similarity: float = DEFAULT_MIN_SIMILARITY,
        budget_policy: BudgetPolicy | None = None,
        persist: bool = True,
        rules=None,
        graph=None,
        ablate: frozenset[str] = frozenset(),
    ):
        unknown = set(ablate) - {"health-personalizer", "preference-agent"}
        if unknown:
            raise ContractViolation(f"cannot ablate unknown components {sorted(unknown)}")
        self.kb = kb
        self.tau = tau
        self.diversity_cap = diversity_cap
        self.min_similarity = min_similarity
        self.budget_policy = budget_policy or BudgetPolicy()
        self.rules = rules if rules is not None else load_personalization_rules()
        self.persist = persist
        self.ablate = frozenset(ablate)
        self._sequence = 0
        self._session_kinds: set[str] = set()
        self._graph_cache = graph

    # -- events ---------------------------------------------------------------

    def _emit(self, kind: str, payload: dict) -> WorkflowEvent:
        if kind not in EVENT_KINDS:
            raise ContractViolation(f"unknown workflow event kind {kind!r}")
        missing = EVENT_DEPENDENCIES.get(kind, set()) - self._session_kinds
        if missing:
            raise ContractViolation(
                f"event {kind!r} emitted before its dependencies {sorted(missing)}"
            )
        self._sequence += 1
        self._session_kinds.add(kind)
        event = WorkflowEvent(kind=kind, sequence=self._sequence, payload=payload)
        if self.persist:
            self.kb._append_jsonl("events.jsonl", [event.to_dict()])
        return event

    def _graph(self):
        if self._graph_cache is None:
            foods = list(self.kb.foods.values())
            self._graph_cache = build_substitution_graph(
                foods, min_similarity=self.min_similarity
            )
        return self._graph_cache

    # -- planning cycle ---------------------------------------------------------

    def _active_rules(self, profile) -> frozenset[str]:
        if "preference-agent" in self.ablate:
            return profile.dietary_rules & HARD_SAFETY_TAGS
        return profile.dietary_rules

    def _household_inputs(self, household_id: str):
        profile = self.kb.get_household(household_id)
        budget = weekly_budget(profile, self.budget_policy)
        personalization = [] if "health-personalizer" in self.ablate else self.rules
        floors, caps = household_requirements(
            profile, self.kb.requirements, personalization
        )
        diversity_cap = (
            None if "preference-agent" in self.ablate else self.diversity_cap
        )
        candidates = [
            it
            for it in compatible_items(
                list(self.kb.foods.values()), self._active_rules(profile)
            )
            if it.id not in profile.excluded_items
        ]
        config = DietModelConfig(
            candidate_items=candidates,
            diversity_cap=diversity_cap,
            upper_bound_nutrients=caps,
            mass_budget=mass_budget_for(profile.members),
        )
        return profile, budget, floors, config

    def run_weekly_cycle(self, household_id: str, as_of: float) -> CycleResult:
        """Steps: ingest -> budget -> requirements -> plan -> list -> explain."""
        self._session_kinds = set()
        events: list[WorkflowEvent] = []
        quotes = self.kb.latest_prices(as_of, item_ids=None)
        events.append(
            self._emit("data-ingested", {"household": household_id, "as_of": as_of})
        )
        profile, budget, floors, config = self._household_inputs(household_id)
        prices = {iid: q.price for iid, q in quotes.items()}
        events.append(self._emit("budget-computed", budget.to_dict()))
        events.append(
            self._emit(
                "requirements-computed",
                {"floors": floors, "caps": config.upper_bound_nutrients},
            )
        )
        meal_plan = plan(config, floors, prices, budget.amount)
        events.append(
            self._emit(
                "plan-generated",
                {"cost": meal_plan.total_cost, "items": len(meal_plan.quantities)},
            )
        )
        shopping = shopping_list(meal_plan, self.kb.foods)
        events.append(self._emit("list-generated", {"total": shopping.total}))
        explanation = explain(meal_plan, budget, floors, shopping=shopping)
        events.append(self._emit("explained", {"entries": len(explanation.entries)}))

        week_index = len(self.kb.history(household_id))
        trigger = "initial" if week_index == 0 else "manual"
        self.kb.append_plan_record(
            PlanRecord(
                plan=meal_plan.to_dict(),
                household_id=household_id,
                week_index=week_index,
                trigger=trigger,
                created_at=as_of,
            ),
            persist=self.persist,
        )
        return CycleResult(meal_plan, shopping, explanation, budget, events)

    # -- monitoring / replanning --------------------------------------------------

    def _planning_context(self, household_id: str) -> tuple[PlanningContext, WeeklyBudget]:
        profile, budget, floors, config = self._household_inputs(household_id)
        context = PlanningContext(
            catalog=list(self.kb.foods.values()),
            rules=self._active_rules(profile),
            requirements=floors,
            upper_caps=config.upper_bound_nutrients,
            budget=budget.amount,
            mass_budget=config.mass_budget,
            diversity_cap=config.diversity_cap,
            graph=self._graph(),
            excluded_items=profile.excluded_items,
        )
        return context, budget

    def budget_preview(self, profile) -> WeeklyBudget:
        return weekly_budget(profile, self.budget_policy)

    def ingest_prices_and_maybe_replan(
        self, household_id: str, quotes: list, as_of: float | None = None
    ) -> tuple[MealPlan, Explanation] | None:
        """Update the knowledge base; re-plan when the monitor fires.

        Returns None when every change stays inside the threshold.
        """
        if quotes:
            self.kb.ingest_quotes(quotes, persist=self.persist)
        if as_of is None:
            if not quotes:
                raise ContractViolation("need quotes or an explicit as_of")
            as_of = max(q.timestamp for q in quotes)
        return self.check_and_maybe_replan(household_id, as_of)

    def check_and_maybe_replan(
        self, household_id: str, as_of: float
    ) -> tuple[MealPlan, Explanation] | None:
        """Shock detection against the active plan's prices; re-plan on events."""
        record = self.kb.active_record(household_id)
        if record is None:
            raise ContractViolation(
                f"household {household_id!r} has no active plan to monitor"
            )
        active_plan = MealPlan.from_dict(record.plan)
        current = {
            iid: q.price
            for iid, q in self.kb.latest_prices(as_of).items()
        }
        shocks = detect_shocks(
            active_plan.prices_used,
            {iid: p for iid, p in current.items() if iid in active_plan.prices_used},
            tau=self.tau,
            timestamp=as_of,
        )
        if not shocks:
            return None
        self._session_kinds = set()
        self._emit(
            "shock-detected", {"events": [e.to_dict() for e in shocks]}
        )
        if self.persist:
            self.kb._append_jsonl("shocks.jsonl", [e.to_dict() for e in shocks])
        context, budget = self._planning_context(household_id)
        self._emit("budget-computed", budget.to_dict())
        self._emit(
            "requirements-computed",
            {"floors": context.requirements, "caps": context.upper_caps},
        )
        new_plan, trace = replan_on_shock(active_plan, shocks, context, current)
        self._emit("replanned", {"cost": new_plan.total_cost})
        self._session_kinds.add("plan-generated")
        shopping = shopping_list(new_plan, self.kb.foods)
        self._emit("list-generated", {"total": shopping.total})
        explanation = explain(
            new_plan,
            budget,
            context.requirements,
            shopping=shopping,
            events=shocks,
            trace=trace,
        )
        self._emit("explained", {"entries": len(explanation.entries)})
        self.kb.append_plan_record(
            PlanRecord(
                plan=new_plan.to_dict(),
                household_id=household_id,
                week_index=len(self.kb.history(household_id)),
                trigger="shock-replan",
                created_at=as_of,
            ),
            persist=self.persist,
        )
        return new_plan, explanation

    def whatif(
        self, household_id: str, item_id: str, rel_change: float
    ) -> dict:
        """Hypothetical shock on one item; never persisted.

        Changes inside the threshold return an empty diff.
        """
        record = self.kb.active_record(household_id)
        if record is None:
            raise ContractViolation(
                f"household {household_id!r} has no active plan for what-if"
            )
        active_plan = MealPlan.from_dict(record.plan)
        if item_id not in active_plan.prices_used:
            raise ContractViolation(f"item {item_id!r} is not priced in the active plan")
        hypothetical = dict(active_plan.prices_used)
        hypothetical[item_id] = hypothetical[item_id] * (1.0 + rel_change)
        shocks = detect_shocks(active_plan.prices_used, hypothetical, tau=self.tau)
        revalued = sum(
            hypothetical.get(iid, 0.0) * q for iid, q in active_plan.quantities.items()
        )
        if not shocks:
            return {
                "triggered": False,
                "cost_delta": 0.0,
                "old_cost_revalued": revalued,
                "new_cost": revalued,
                "substitutions": [],
                "adequacy_delta": 0.0,
                "plan": None,
            }
        context, budget = self._planning_context(household_id)
        try:
            new_plan, trace = replan_on_shock(active_plan, shocks, context, hypothetical)
        except InfeasiblePlanError as exc:
            return {
                "triggered": True,
                "infeasible": True,
                "diagnosis": exc.diagnosis.to_dict(),
                "old_cost_revalued": revalued,
            }
        return {
            "triggered": True,
            "cost_delta": new_plan.total_cost - revalued,
            "old_cost_revalued": revalued,
            "new_cost": new_plan.total_cost,
            "substitutions": [list(s) for s in new_plan.substitutions],
            "adequacy_delta": new_plan.adequacy.aggregate_pct
            - active_plan.adequacy.aggregate_pct,
            "plan": new_plan.to_dict(),
        }


def write_plan_json(result: CycleResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result.to_dict(), fh, indent=1, sort_keys=True)


def now() -> float:
    return time.time()
