"""Price-shock detection, the substitution graph, and shock-driven re-planning."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, DataError, UnknownItemError
from .knowledge import (
    FoodItem,
    HouseholdMember,
    compatible_items,
    load_requirement_table,
)
from .planner import DietModelConfig, MealPlan, plan

logger = logging.getLogger(__name__)

DEFAULT_TAU = 0.10
DEFAULT_MIN_SIMILARITY = 0.60
PROTEIN_CLASS_TAG = "protein-source"


@dataclass(frozen=True)
class ShockEvent:
    item_id: str
    old_price: float
    new_price: float
    rel_change: float
    timestamp: float

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "old_price": self.old_price,
            "new_price": self.new_price,
            "rel_change": self.rel_change,
            "timestamp": self.timestamp,
        }


def detect_shocks(
    prev: dict[str, float],
    curr: dict[str, float],
    tau: float = DEFAULT_TAU,
    timestamp: float = 0.0,
) -> list[ShockEvent]:
    """Items whose relative price change strictly exceeds tau.

    Items only present in ``curr`` are skipped with a log notice; a change of
    exactly tau does not trigger. Result sorted by |rel_change| descending,
    ties by item id.
    """
    if tau <= 0:
        raise ContractViolation("tau must be positive")
    new_only = sorted(set(curr) - set(prev))
    if new_only:
        logger.info("detect_shocks: ignoring items without history: %s", new_only)
    events = []
    for item_id in prev:
        if item_id not in curr:
            continue
        p_prev = prev[item_id]
        if p_prev <= 0:
            raise DataError(f"previous price for {item_id} must be > 0, got {p_prev}")
        rel = (curr[item_id] - p_prev) / p_prev
        if abs(rel) > tau:
            events.append(
                ShockEvent(
                    item_id=item_id,
                    old_price=p_prev,
                    new_price=curr[item_id],
                    rel_change=rel,
                    timestamp=timestamp,
                )
            )
    events.sort(key=lambda e: (-abs(e.rel_change), e.item_id))
    return events


@dataclass
class SubstitutionGraph:
    """Undirected item graph; edges link nutritionally similar foods."""

    items: dict[str, FoodItem]
    edges: dict[str, list[tuple[str, float]]] = field(default_factory=dict)

    def neighbors(self, item_id: str) -> list[tuple[str, float]]:
        if item_id not in self.items:
            raise UnknownItemError(f"unknown item {item_id!r}")
        return self.edges.get(item_id, [])

    def weight(self, a: str, b: str) -> float | None:
        for nid, w in self.edges.get(a, ()):
            if nid == b:
                return w
        return None


def _similarity_vectors(
    items: list[FoodItem], weights: dict[str, float]
) -> dict[str, np.ndarray]:
    nids = sorted(nid for nid, w in weights.items() if w > 0)
    vecs = {}
    for it in items:
        vecs[it.id] = np.array(
            [it.nutrients.get(nid, 0.0) / weights[nid] for nid in nids]
        )
    return vecs


def build_substitution_graph(
    items: list[FoodItem],
    min_similarity: float = DEFAULT_MIN_SIMILARITY,
    requirement_weights: dict[str, float] | None = None,
) -> SubstitutionGraph:
    """Link items of the same category or shared protein class whose
    requirement-normalized nutrient vectors have cosine similarity >=
    ``min_similarity``; the weight is that cosine.

    Normalizing each nutrient by the household requirement makes the
    nutrients the plan actually needs dominate the comparison.
    """
    if not items:
        raise ContractViolation("build_substitution_graph needs at least one item")
    if requirement_weights is None:
        # reference adult pair as the default normalization
        table = load_requirement_table()
        requirement_weights = {}
        for sex in ("male", "female"):
            r = table.lookup(HouseholdMember(age=30, sex=sex))
            for nid, v in r.items():
                requirement_weights[nid] = requirement_weights.get(nid, 0.0) + v

    vecs = _similarity_vectors(items, requirement_weights)
    norms = {iid: float(np.linalg.norm(v)) for iid, v in vecs.items()}
    graph = SubstitutionGraph(items={it.id: it for it in items})
    for i, a in enumerate(items):
        for b in items[i + 1 :]:
            related = a.category == b.category or (
                PROTEIN_CLASS_TAG in a.tags and PROTEIN_CLASS_TAG in b.tags
            )
            if not related:
                continue
            if norms[a.id] <= 0 or norms[b.id] <= 0:
                continue
            cos = float(vecs[a.id] @ vecs[b.id]) / (norms[a.id] * norms[b.id])
            if cos >= min_similarity:
                graph.edges.setdefault(a.id, []).append((b.id, cos))
                graph.edges.setdefault(b.id, []).append((a.id, cos))
    for lst in graph.edges.values():
        lst.sort(key=lambda e: (-e[1], e[0]))
    return graph


def substitution_candidates(
    graph: SubstitutionGraph,
    item_id: str,
    rules: frozenset[str] | set[str],
    k: int,
    prices: dict[str, float] | None = None,
) -> list[str]:
    """Up to k rule-compatible neighbors, best similarity first; ties break by
    current price (cheaper first) then id."""
    neighbors = graph.neighbors(item_id)
    if k <= 0:
        return []
    candidate_items = [graph.items[nid] for nid, _ in neighbors]
    allowed = {it.id for it in compatible_items(candidate_items, rules)}
    prices = prices or {}

    def sort_key(entry):
        nid, weight = entry
        return (-weight, prices.get(nid, math.inf), nid)

    ranked = sorted((e for e in neighbors if e[0] in allowed), key=sort_key)
    return [nid for nid, _ in ranked[:k]]


@dataclass
class PlanningContext:
    """Everything replan_on_shock needs to rebuild and re-solve the LP."""

    catalog: list[FoodItem]  # full food universe (pre rule-filter)
    rules: frozenset[str]
    requirements: dict[str, float]
    upper_caps: dict[str, float]
    budget: float
    mass_budget: float
    diversity_cap: float | None
    graph: SubstitutionGraph
    candidates_per_shock: int = 5
    excluded_items: frozenset[str] = frozenset()

    def candidate_items(self) -> list[FoodItem]:
        allowed = compatible_items(self.catalog, self.rules)
        return [it for it in allowed if it.id not in self.excluded_items]


@dataclass
class ReplanTraceEntry:
    item_id: str
    rel_change: float
    candidates: list[str]

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "rel_change": self.rel_change,
            "candidates": list(self.candidates),
        }


@dataclass
class ReplanTrace:
    shocked: list[ReplanTraceEntry]
    quantity_deltas: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "shocked": [e.to_dict() for e in self.shocked],
            "quantity_deltas": {
                k: round(v, 9) for k, v in sorted(self.quantity_deltas.items())
            },
        }


def replan_on_shock(
    current_plan: MealPlan,
    events: list[ShockEvent],
    context: PlanningContext,
    new_prices: dict[str, float],
) -> tuple[MealPlan, ReplanTrace]:
    """Re-solve the full weekly LP at post-shock prices.

    The candidate set is the rule-filtered catalog expanded by the
    substitution candidates of every shocked item (usually no-ops, since the
    catalog already contains them); re-solving globally rather than patching
    locally is what keeps the new plan's cost at or below the old quantities
    revalued at the new prices.
    """
    if not events:
        raise ContractViolation("replan_on_shock requires at least one shock event")

    candidates = context.candidate_items()
    have = {it.id for it in candidates}
    trace_entries = []
    for event in events:
        cand_ids = substitution_candidates(
            context.graph,
            event.item_id,
            context.rules,
            context.candidates_per_shock,
            prices=new_prices,
        )
        trace_entries.append(
            ReplanTraceEntry(
                item_id=event.item_id,
                rel_change=event.rel_change,
                candidates=cand_ids,
            )
        )
        for cid in cand_ids:
            if cid not in have and cid not in context.excluded_items:
                candidates.append(context.graph.items[cid])
                have.add(cid)

    config = DietModelConfig(
        candidate_items=candidates,
        diversity_cap=context.diversity_cap,
        upper_bound_nutrients=dict(context.upper_caps),
        mass_budget=context.mass_budget,
    )
    new_plan = plan(config, context.requirements, new_prices, context.budget)

    deltas: dict[str, float] = {}
    for iid in set(current_plan.quantities) | set(new_plan.quantities):
        delta = new_plan.quantities.get(iid, 0.0) - current_plan.quantities.get(iid, 0.0)
        if abs(delta) > 1e-9:
            deltas[iid] = delta

    shocked_ids = {e.item_id for e in events}
    removals = [
        iid for iid, d in deltas.items() if d < 0 and iid in shocked_ids
    ]
    additions = [iid for iid, d in deltas.items() if d > 0]
    by_event = {e.item_id: e for e in events}
    for removed in sorted(removals):
        event = by_event[removed]
        direction = "rose" if event.rel_change > 0 else "fell"
        for added in sorted(additions, key=lambda i: -deltas[i]):
            if added == removed:
                continue
            reason = (
                f"price of {removed} {direction} {abs(event.rel_change) * 100:.0f}%"
            )
            new_plan.substitutions.append((removed, added, reason))
            break

    return new_plan, ReplanTrace(shocked=trace_entries, quantity_deltas=deltas)
