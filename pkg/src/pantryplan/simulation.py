"""Synthetic households, shock scenarios, baselines, metrics, and ablations.

Timeline semantics per week w: the planner sees "opening" prices (the
previous week's true level), shocks land intra-week, and every method pays
the week's true prices for whatever it ends up buying.

  fixed-menu           week-0 optimal quantities frozen, revalued weekly
  static-optimization  re-solved at opening prices, blind to the shock
  agentic              opening solve + monitoring + shock re-planning

A frozen basket that overruns the weekly budget gets scaled down to fit
(households cannot overspend), which is where its adequacy erodes; costs
are compared only on weeks where all methods are feasible unscaled.

Randomness: numpy PCG64 generators derived from ``SeedSequence(seed,
spawn_key=...)``, one independent stream per (household, repetition), so
results are byte-identical for a given config and seed on any platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adaptation import build_substitution_graph
from .budgeting import household_requirements, load_personalization_rules, weekly_budget
from .errors import BudgetError, ConfigError, InfeasiblePlanError
from .knowledge import (
    FoodItem,
    HouseholdMember,
    HouseholdProfile,
    KnowledgeBase,
    PriceQuote,
    load_bundled_foods,
    load_bundled_prices,
    load_requirement_table,
)
from .orchestrator import Orchestrator
from .planner import adequacy

METHOD_FIXED = "fixed-menu"
METHOD_STATIC = "static-optimization"
METHOD_AGENTIC = "agentic"
ALL_METHODS = (METHOD_FIXED, METHOD_STATIC, METHOD_AGENTIC)

ABLATABLE = ("price-monitor", "health-personalizer", "preference-agent")

MAX_SHOCK = 0.30

# Sampling strata for synthetic households (documented fixture probabilities).
P_RULE_HALAL = 0.8
P_RULE_VEGETARIAN = 0.08
P_RULE_LOW_SODIUM = 0.10
P_COND_VITD = 0.30
P_COND_ANEMIA = 0.15
P_COND_HYPERTENSION = 0.15
P_COND_DIABETES = 0.10
ACTIVITY_CHOICES = ("sedentary", "moderate", "active")
ACTIVITY_P = (0.3, 0.5, 0.2)


@dataclass(frozen=True)
class ShockSpec:
    target: str  # item id, category name, or "mixed"
    rel_change: float
    week: int

    def __post_init__(self):
        if abs(self.rel_change) > MAX_SHOCK:
            raise ConfigError(
                f"shock magnitude {self.rel_change} outside +/-{MAX_SHOCK}"
            )
        if self.rel_change <= -1.0:
            raise ConfigError("shock would make prices non-positive")
        if self.week < 0:
            raise ConfigError("shock week must be >= 0")


@dataclass
class ScenarioConfig:
    n_households: int = 100
    seed: int = 42
    weeks: int = 8
    repetitions: int = 10
    tau: float = 0.10
    jitter_pct: float = 0.0
    diversity_cap: float = 0.15
    mixed_probability: float = 1.0
    mixed_up_probability: float = 0.5  # fair-coin sign for "mixed" shocks
    baselines: tuple[str, ...] = ALL_METHODS
    shock_spec: list[ShockSpec] = field(default_factory=list)

    def __post_init__(self):
        if self.n_households < 1 or self.weeks < 1 or self.repetitions < 1:
            raise ConfigError("n_households, weeks, repetitions must be >= 1")
        unknown = set(self.baselines) - set(ALL_METHODS)
        if unknown:
            raise ConfigError(f"unknown baselines {sorted(unknown)}")
        if not (0 <= self.jitter_pct <= 0.02):
            raise ConfigError("jitter_pct must be within [0, 0.02]")

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        spec = [
            ShockSpec(s["target"], float(s["rel_change"]), int(s["week"]))
            for s in d.get("shock_spec", [])
        ]
        return cls(
            n_households=int(d.get("n_households", 100)),
            seed=int(d.get("seed", 42)),
            weeks=int(d.get("weeks", 8)),
            repetitions=int(d.get("repetitions", 10)),
            tau=float(d.get("tau", 0.10)),
            jitter_pct=float(d.get("jitter_pct", 0.0)),
            diversity_cap=float(d.get("diversity_cap", 0.15)),
            mixed_probability=float(d.get("mixed_probability", 1.0)),
            mixed_up_probability=float(d.get("mixed_up_probability", 0.5)),
            baselines=tuple(d.get("baselines", ALL_METHODS)),
            shock_spec=spec,
        )

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def default_scenario() -> ScenarioConfig:
    from importlib import resources

    text = (
        resources.files("pantryplan.data")
        .joinpath("scenario_default.json")
        .read_text()
    )
    return ScenarioConfig.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Synthetic households
# ---------------------------------------------------------------------------

def _sample_member(rng, adult: bool) -> HouseholdMember:
    if adult:
        age = float(rng.integers(22, 56))
    else:
        age = float(rng.integers(1, 18))
    sex = "male" if rng.random() < 0.5 else "female"
    activity = ACTIVITY_CHOICES[
        int(rng.choice(len(ACTIVITY_CHOICES), p=ACTIVITY_P))
    ]
    conditions = set()
    if adult:
        if rng.random() < P_COND_VITD:
            conditions.add("vitamin-d-deficiency")
        if rng.random() < P_COND_ANEMIA:
            conditions.add("anemia")
        if rng.random() < P_COND_HYPERTENSION:
            conditions.add("hypertension")
        if rng.random() < P_COND_DIABETES:
            conditions.add("diabetes")
    return HouseholdMember(
        age=age, sex=sex, activity_level=activity, conditions=frozenset(conditions)
    )


def generate_households(n: int, seed: int) -> list[HouseholdProfile]:
    """Stratified synthetic households: incomes U[5000, 15000] SAR, sizes
    2..6, two adults plus children, rule and condition sets drawn with the
    module-level probabilities. Deterministic for a given seed."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    households = []
    for _ in range(n):
        income = float(rng.uniform(5000.0, 15000.0))
        size = int(rng.integers(2, 7))
        members = [_sample_member(rng, adult=True), _sample_member(rng, adult=True)]
        members += [_sample_member(rng, adult=False) for _ in range(size - 2)]
        rules = set()
        if rng.random() < P_RULE_HALAL:
            rules.add("halal")
        if rng.random() < P_RULE_VEGETARIAN:
            rules.add("vegetarian")
        if rng.random() < P_RULE_LOW_SODIUM:
            rules.add("low-sodium-suitable")
        food_share = float(rng.uniform(0.15, 0.25))
        fixed_expenses = income * float(rng.uniform(0.40, 0.70))
        households.append(
            HouseholdProfile(
                members=members,
                monthly_income=income,
                fixed_expenses=fixed_expenses,
                dietary_rules=frozenset(rules),
                food_share=food_share,
            )
        )
    return households


# ---------------------------------------------------------------------------
# Price scenario engine
# ---------------------------------------------------------------------------

def shock_series(
    base_prices: dict[str, float],
    shock_spec: list[ShockSpec],
    seed,
    weeks: int,
    categories: dict[str, str] | None = None,
    jitter_pct: float = 0.0,
    mixed_probability: float = 1.0,
    mixed_up_probability: float = 0.5,
) -> list[dict[str, float]]:
    """Per-week true price maps; a shock applies from its week onward.

    "mixed" targets shock each item independently with probability
    ``mixed_probability`` and a random sign at the given magnitude. Optional
    jitter perturbs non-target items by up to +/-jitter_pct each week.
    """
    categories = categories or {}
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    rng = np.random.Generator(np.random.PCG64(seed))

    factors = {iid: np.ones(weeks) for iid in base_prices}
    targeted: set[str] = set()
    for spec in shock_spec:
        if spec.week >= weeks:
            continue
        if spec.target == "mixed":
            members = sorted(base_prices)
        elif spec.target in base_prices:
            members = [spec.target]
        else:
            members = sorted(
                iid for iid, cat in categories.items() if cat == spec.target
            )
            if not members:
                raise ConfigError(
                    f"shock target {spec.target!r} matches no item or category"
                )
        for iid in members:
            if spec.target == "mixed":
                if rng.random() >= mixed_probability:
                    continue
                sign = 1.0 if rng.random() < mixed_up_probability else -1.0
                change = sign * abs(spec.rel_change)
            else:
                change = spec.rel_change
            factors[iid][spec.week :] *= 1.0 + change
            targeted.add(iid)

    if jitter_pct > 0:
        for iid in sorted(base_prices):
            if iid in targeted:
                continue
            noise = rng.uniform(-jitter_pct, jitter_pct, size=weeks)
            factors[iid] *= 1.0 + noise

    series = []
    for w in range(weeks):
        prices = {iid: base_prices[iid] * factors[iid][w] for iid in base_prices}
        bad = [iid for iid, p in prices.items() if p <= 0]
        if bad:
            raise ConfigError(f"shock drove prices non-positive for {bad}")
        series.append(prices)
    return series


# ---------------------------------------------------------------------------
# Per-run engine
# ---------------------------------------------------------------------------

def _evaluate_frozen(quantities, prices, budget, floors, foods_list):
    """Revalue a frozen basket at the week's prices.

    The reported cost is the full (uncapped) revaluation: what keeping the
    menu would cost. Nutrition is evaluated on what the household can
    actually buy, so baskets that overrun the budget are scaled down before
    scoring adequacy.
    """
    raw_cost = float(sum(prices[iid] * q for iid, q in sorted(quantities.items())))
    feasible = raw_cost <= budget * (1 + 1e-9)
    if feasible or raw_cost <= 0:
        used = quantities
    else:
        scale = budget / raw_cost
        used = {iid: q * scale for iid, q in quantities.items()}
    report = adequacy(foods_list, used, floors)
    bought = sorted(iid for iid, q in used.items() if q > 1e-9)
    return {
        "cost": raw_cost,
        "feasible": feasible,
        "adequacy": report.aggregate_pct,
        "vitd_pct": min(1.0, report.per_nutrient.get("vitamin_d_iu", 0.0)) * 100.0,
        "items": len(bought),
        "item_ids": bought,
    }


def _evaluate_plan(meal_plan, floors, foods_list):
    report = adequacy(foods_list, meal_plan.quantities, floors)
    bought = sorted(iid for iid, q in meal_plan.quantities.items() if q > 1e-9)
    return {
        "cost": meal_plan.total_cost,
        "feasible": True,
        "adequacy": report.aggregate_pct,
        "vitd_pct": min(1.0, report.per_nutrient.get("vitamin_d_iu", 0.0)) * 100.0,
        "items": len(bought),
        "item_ids": bought,
    }


def _quotes(prices: dict[str, float], t: float) -> list[PriceQuote]:
    return [
        PriceQuote(item_id=iid, vendor="sim", price=p, timestamp=t)
        for iid, p in sorted(prices.items())
    ]


def _run_one(
    profile: HouseholdProfile,
    run_seed,
    config: ScenarioConfig,
    foods: list[FoodItem],
    base_prices: dict[str, float],
    shared,
    monitor_on: bool,
    ablate: frozenset[str],
) -> list[dict]:
    """Simulate one (household, repetition); returns per-week method records."""
    table, rules, graph = shared
    categories = {it.id: it.category for it in foods}
    series = shock_series(
        base_prices,
        config.shock_spec,
        run_seed,
        config.weeks,
        categories=categories,
        jitter_pct=config.jitter_pct,
        mixed_probability=config.mixed_probability,
        mixed_up_probability=config.mixed_up_probability,
    )

    # Evaluation floors always use the full personalization rules, even when
    # the planner is ablated; that is what the ablation measures.
    try:
        eval_floors, _ = household_requirements(profile, table, rules)
        weekly_budget(profile)
    except BudgetError:
        return []

    kb = KnowledgeBase(data_dir="/nonexistent-sim", requirements=table)
    kb.load_foods(foods)
    kb.households["h"] = profile  # direct insert: simulation never persists
    orc = Orchestrator(
        kb,
        tau=config.tau,
        diversity_cap=config.diversity_cap,
        persist=False,
        rules=rules,
        graph=graph,
        ablate=ablate,
    )

    records = []
    x0 = None
    for w in range(config.weeks):
        opening = base_prices if w == 0 else series[w - 1]
        true = series[w]
        kb.ingest_quotes(_quotes(opening, float(w)), persist=False)
        week_rec = {}
        try:
            cycle = orc.run_weekly_cycle("h", as_of=float(w))
        except InfeasiblePlanError:
            for method in ALL_METHODS:
                week_rec[method] = {
                    "cost": None,
                    "feasible": False,
                    "adequacy": 0.0,
                    "vitd_pct": 0.0,
                    "items": 0,
                    "item_ids": [],
                }
            records.append({"week": w, "methods": week_rec, "shocked": False, "replan_ok": None})
            continue
        if x0 is None:
            x0 = dict(cycle.plan.quantities)
        budget = cycle.budget.amount

        week_rec[METHOD_FIXED] = _evaluate_frozen(x0, true, budget, eval_floors, foods)
        static_rec = _evaluate_frozen(
            cycle.plan.quantities, true, budget, eval_floors, foods
        )
        week_rec[METHOD_STATIC] = static_rec

        shocked = False
        replan_ok = None
        if monitor_on:
            try:
                outcome = orc.ingest_prices_and_maybe_replan(
                    "h", _quotes(true, w + 0.5), as_of=w + 0.5
                )
            except InfeasiblePlanError:
                outcome = None
                shocked = True
                replan_ok = False
            if outcome is not None:
                shocked = True
                replan_ok = True
                new_plan, _explanation = outcome
                week_rec[METHOD_AGENTIC] = _evaluate_plan(new_plan, eval_floors, foods)
            else:
                week_rec[METHOD_AGENTIC] = dict(static_rec)
        else:
            week_rec[METHOD_AGENTIC] = dict(static_rec)

        records.append(
            {"week": w, "methods": week_rec, "shocked": shocked, "replan_ok": replan_ok}
        )
    return records


# ---------------------------------------------------------------------------
# Experiment driver and metrics
# ---------------------------------------------------------------------------

@dataclass
class MetricsRow:
    method: str
    mean_cost: float
    sd_cost: float
    savings_pct: float
    adequacy_pct: float
    replan_success: float
    diversity: float

    def to_csv_row(self) -> list[str]:
        return [
            self.method,
            f"{self.mean_cost:.6f}",
            f"{self.sd_cost:.6f}",
            f"{self.savings_pct:.6f}",
            f"{self.adequacy_pct:.6f}",
            f"{self.replan_success:.6f}",
            f"{self.diversity:.6f}",
        ]


@dataclass
class ExperimentResult:
    rows: list[MetricsRow]
    records: list[dict]
    weekly_mean_cost: dict[str, list[float]]
    config: ScenarioConfig
    n_feasible_weeks: int
    n_infeasible_runs: int

    def row(self, method: str) -> MetricsRow:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)

    def results_csv(self) -> str:
        lines = ["method,mean_cost,sd_cost,savings_pct,adequacy_pct,replan_success,diversity"]
        for r in self.rows:
            lines.append(",".join(r.to_csv_row()))
        return "\n".join(lines) + "\n"

    def plot_data(self) -> dict:
        return {
            "schema": 1,
            "weeks": self.config.weeks,
            "weekly_mean_cost": {
                m: [round(v, 6) for v in series]
                for m, series in sorted(self.weekly_mean_cost.items())
            },
            "adequacy_pct": {r.method: round(r.adequacy_pct, 6) for r in self.rows},
            "mean_cost": {r.method: round(r.mean_cost, 6) for r in self.rows},
            "savings_pct": {r.method: round(r.savings_pct, 6) for r in self.rows},
        }


def run_experiment(
    config: ScenarioConfig,
    foods: list[FoodItem] | None = None,
    base_prices: dict[str, float] | None = None,
    monitor_on: bool = True,
    ablate: frozenset[str] = frozenset(),
) -> ExperimentResult:
    """Run households x repetitions through all baselines and aggregate."""
    if foods is None:
        foods = load_bundled_foods()
    if base_prices is None:
        base_prices = {q.item_id: q.price for q in load_bundled_prices()}
    table = load_requirement_table()
    rules = load_personalization_rules()
    graph = build_substitution_graph(foods)
    shared = (table, rules, graph)

    households = generate_households(config.n_households, config.seed)
    raw_records: list[dict] = []
    infeasible_runs = 0
    for h_idx, profile in enumerate(households):
        for rep in range(config.repetitions):
            run_seed = np.random.SeedSequence(config.seed, spawn_key=(h_idx, rep))
            run = _run_one(
                profile,
                run_seed,
                config,
                foods,
                base_prices,
                shared,
                monitor_on=monitor_on,
                ablate=ablate,
            )
            if not run:
                infeasible_runs += 1
                continue
            has_vitd = any(
                "vitamin-d-deficiency" in m.conditions for m in profile.members
            )
            for rec in run:
                for method, vals in rec["methods"].items():
                    raw_records.append(
                        {
                            "household": h_idx,
                            "rep": rep,
                            "week": rec["week"],
                            "method": method,
                            "shocked": rec["shocked"],
                            "replan_ok": rec["replan_ok"],
                            "has_vitd_member": has_vitd,
                            **vals,
                        }
                    )

    rows, weekly, n_paired = _aggregate(config, raw_records)
    return ExperimentResult(
        rows=rows,
        records=raw_records,
        weekly_mean_cost=weekly,
        config=config,
        n_feasible_weeks=n_paired,
        n_infeasible_runs=infeasible_runs,
    )


def _aggregate(config: ScenarioConfig, records: list[dict]):
    methods = [m for m in ALL_METHODS if m in config.baselines]
    by_key: dict[tuple, dict[str, dict]] = {}
    for rec in records:
        by_key.setdefault((rec["household"], rec["rep"], rec["week"]), {})[
            rec["method"]
        ] = rec

    # Cost means pair every week where all methods produced a plan to price;
    # the stricter all-feasible pairing is what the dominance suite uses.
    paired_keys = [
        k
        for k, vals in sorted(by_key.items())
        if all(m in vals and vals[m]["cost"] is not None for m in ALL_METHODS)
    ]
    n_all_feasible = sum(
        1
        for k in paired_keys
        if all(by_key[k][m]["feasible"] for m in ALL_METHODS)
    )

    rows = []
    weekly: dict[str, list[float]] = {}
    fixed_mean = None
    for method in methods:
        paired_costs = [by_key[k][method]["cost"] for k in paired_keys]
        per_run: dict[tuple, list[float]] = {}
        for k in paired_keys:
            per_run.setdefault((k[0], k[1]), []).append(by_key[k][method]["cost"])
        run_means = [float(np.mean(v)) for _, v in sorted(per_run.items())]
        mean_cost = float(np.mean(paired_costs)) if paired_costs else float("nan")
        sd_cost = float(np.std(run_means, ddof=1)) if len(run_means) > 1 else 0.0

        m_recs = [r for r in records if r["method"] == method]
        adequacy_vals = [r["adequacy"] for r in m_recs if r["cost"] is not None]
        adequacy_pct = float(np.mean(adequacy_vals)) if adequacy_vals else 0.0
        diversity_vals = [r["items"] for r in m_recs if r["feasible"]]
        diversity = float(np.mean(diversity_vals)) if diversity_vals else 0.0

        if method == METHOD_AGENTIC:
            attempts = [r for r in m_recs if r["shocked"]]
            # one record per (h, rep, week); replan_ok is per-week
            ok = sum(1 for r in attempts if r["replan_ok"])
            replan_success = ok / len(attempts) if attempts else 1.0
        else:
            replan_success = 0.0

        weekly[method] = [
            float(
                np.mean(
                    [by_key[k][method]["cost"] for k in paired_keys if k[2] == w]
                    or [float("nan")]
                )
            )
            for w in range(config.weeks)
        ]
        rows.append(
            MetricsRow(
                method=method,
                mean_cost=mean_cost,
                sd_cost=sd_cost,
                savings_pct=0.0,
                adequacy_pct=adequacy_pct,
                replan_success=replan_success,
                diversity=diversity,
            )
        )
        if method == METHOD_FIXED:
            fixed_mean = mean_cost

    if fixed_mean:
        for row in rows:
            row.savings_pct = (fixed_mean - row.mean_cost) / fixed_mean * 100.0
    return rows, weekly, n_all_feasible


# ---------------------------------------------------------------------------
# Ablations
# ---------------------------------------------------------------------------

@dataclass
class AblationResult:
    disabled: str
    full: ExperimentResult
    ablated: ExperimentResult

    def summary(self) -> dict:
        def pick(res: ExperimentResult) -> dict:
            agentic = res.row(METHOD_AGENTIC)
            vitd = [
                r["vitd_pct"]
                for r in res.records
                if r["method"] == METHOD_AGENTIC
                and r["has_vitd_member"]
                and r["cost"] is not None
            ]
            return {
                "mean_cost": agentic.mean_cost,
                "adequacy_pct": agentic.adequacy_pct,
                "diversity": agentic.diversity,
                "vitamin_d_adequacy_pct": float(np.mean(vitd)) if vitd else float("nan"),
            }

        return {
            "disabled": self.disabled,
            "full": pick(self.full),
            "ablated": pick(self.ablated),
        }


def run_ablation(config: ScenarioConfig, disabled: str) -> AblationResult:
    """Paired experiment: full system vs one component switched off."""
    if disabled not in ABLATABLE:
        raise ConfigError(f"cannot ablate {disabled!r}; expected one of {ABLATABLE}")
    full = run_experiment(config)
    if disabled == "price-monitor":
        ablated = run_experiment(config, monitor_on=False)
    else:
        ablated = run_experiment(config, ablate=frozenset({disabled}))
    return AblationResult(disabled=disabled, full=full, ablated=ablated)


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------

def write_outputs(result: ExperimentResult, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "results": out / "results.csv",
        "records": out / "records.jsonl",
        "plot": out / "plot_data.json",
    }
    paths["results"].write_text(result.results_csv())
    with open(paths["records"], "w", encoding="utf-8") as fh:
        for rec in result.records:
            clean = {
                k: (round(v, 9) if isinstance(v, float) else v) for k, v in rec.items()
            }
            fh.write(json.dumps(clean, sort_keys=True) + "\n")
    paths["plot"].write_text(json.dumps(result.plot_data(), indent=1, sort_keys=True))
    return paths
