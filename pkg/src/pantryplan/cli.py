"""Command-line interface.

Data directory resolution: ``--data-dir`` flag, else the ``PANTRY_DATA_DIR``
environment variable, else ``./pantry_data``.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .budgeting import load_personalization_rules
from .errors import InfeasiblePlanError, PantryError
from .knowledge import (
    KnowledgeBase,
    load_food_db,
    load_household,
    load_price_feed,
    load_requirement_table,
)
from .orchestrator import Orchestrator, write_plan_json
from .simulation import (
    ABLATABLE,
    ScenarioConfig,
    default_scenario,
    run_ablation,
    run_experiment,
    write_outputs,
)


@click.group()
def main():
    """Price-aware weekly meal planning."""


@main.command("plan")
@click.option("--household", "household_path", required=True, type=click.Path(exists=True))
@click.option("--foods", "foods_path", required=True, type=click.Path(exists=True))
@click.option("--prices", "prices_path", required=True, type=click.Path(exists=True))
@click.option("--requirements", "requirements_path", type=click.Path(exists=True))
@click.option("--rules", "rules_path", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--as-of", type=float, default=None, help="price cutoff timestamp")
def plan_cmd(household_path, foods_path, prices_path, requirements_path, rules_path, out_path, as_of):
    """Plan one week for one household from explicit data files."""
    table = load_requirement_table(requirements_path)
    kb = KnowledgeBase(data_dir="/tmp/pantry-cli-unused", requirements=table)
    fmt = "json" if foods_path.endswith(".json") else "csv"
    nutrient_ids = [n for n in table.nutrients]
    kb.load_foods(load_food_db(foods_path, format=fmt, nutrient_ids=nutrient_ids))
    quotes = load_price_feed(prices_path)
    kb.ingest_quotes(quotes, persist=False)
    kb.households["cli"] = load_household(household_path)
    rules = load_personalization_rules(rules_path) if rules_path else None
    orc = Orchestrator(kb, persist=False, rules=rules)
    if as_of is None:
        as_of = max(q.timestamp for q in quotes)
    try:
        result = orc.run_weekly_cycle("cli", as_of=as_of)
    except InfeasiblePlanError as exc:
        click.echo(f"infeasible: {exc.diagnosis}", err=True)
        sys.exit(2)
    except PantryError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    write_plan_json(result, out_path)
    click.echo(
        f"planned {len(result.plan.quantities)} items, cost {result.plan.total_cost:.2f} "
        f"(budget {result.budget.amount:.2f}) -> {out_path}"
    )


@main.command("ingest-prices")
@click.argument("prices_file", type=click.Path(exists=True))
@click.option("--data-dir", type=click.Path(), default=None)
def ingest_prices_cmd(prices_file, data_dir):
    """Append a price feed to the knowledge base and re-plan shocked households."""
    kb = KnowledgeBase(data_dir=data_dir)
    kb.restore()
    from .knowledge import load_bundled_foods

    if not kb.foods:
        kb.load_foods(load_bundled_foods())
    quotes = load_price_feed(prices_file)
    orc = Orchestrator(kb)
    kb.ingest_quotes(quotes)
    if not quotes:
        click.echo("no quotes in feed")
        return
    as_of = max(q.timestamp for q in quotes)
    replanned = []
    for household_id in sorted(kb.households):
        if kb.active_record(household_id) is None:
            continue
        try:
            if orc.check_and_maybe_replan(household_id, as_of) is not None:
                replanned.append(household_id)
        except InfeasiblePlanError as exc:
            click.echo(f"{household_id}: replan infeasible ({exc.diagnosis})", err=True)
    click.echo(f"ingested {len(quotes)} quotes; replanned: {', '.join(replanned) or 'none'}")


@main.command("simulate")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None, help="override the config seed")
@click.option("--out", "out_dir", required=True, type=click.Path())
def simulate_cmd(config_path, seed, out_dir):
    """Run the synthetic-household experiment and write results."""
    config = ScenarioConfig.from_json(config_path) if config_path else default_scenario()
    if seed is not None:
        config.seed = seed
    result = run_experiment(config)
    paths = write_outputs(result, out_dir)
    click.echo(result.results_csv().strip())
    click.echo(
        f"feasible weeks {result.n_feasible_weeks}, infeasible runs "
        f"{result.n_infeasible_runs}; wrote {paths['results']}"
    )


@main.command("ablate")
@click.option(
    "--disable",
    "disabled",
    multiple=True,
    required=True,
    type=click.Choice(ABLATABLE),
)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", required=True, type=click.Path())
def ablate_cmd(disabled, config_path, seed, out_dir):
    """Compare the full system against runs with one component disabled."""
    config = ScenarioConfig.from_json(config_path) if config_path else default_scenario()
    if seed is not None:
        config.seed = seed
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summaries = []
    for component in disabled:
        result = run_ablation(config, component)
        summary = result.summary()
        summaries.append(summary)
        (out / f"ablation_{component}.json").write_text(
            json.dumps(summary, indent=1, sort_keys=True)
        )
        (out / f"ablation_{component}_full.csv").write_text(result.full.results_csv())
        (out / f"ablation_{component}_ablated.csv").write_text(
            result.ablated.results_csv()
        )
        click.echo(json.dumps(summary, indent=1, sort_keys=True))
    (out / "ablations.json").write_text(json.dumps(summaries, indent=1, sort_keys=True))


@main.command("plot-data")
@click.option("--records", "records_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def plot_data_cmd(records_path, out_path):
    """Re-derive chart-ready JSON (weekly costs, adequacy) from raw records."""
    records = []
    with open(records_path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    weeks = 1 + max((r["week"] for r in records), default=0)
    methods = sorted({r["method"] for r in records})
    weekly = {}
    adequacy = {}
    for m in methods:
        weekly[m] = []
        for w in range(weeks):
            costs = [
                r["cost"]
                for r in records
                if r["method"] == m and r["week"] == w and r["cost"] is not None
            ]
            weekly[m].append(round(sum(costs) / len(costs), 6) if costs else None)
        adq = [r["adequacy"] for r in records if r["method"] == m and r["cost"] is not None]
        adequacy[m] = round(sum(adq) / len(adq), 6) if adq else None
    doc = {"schema": 1, "weeks": weeks, "weekly_mean_cost": weekly, "adequacy_pct": adequacy}
    Path(out_path).write_text(json.dumps(doc, indent=1, sort_keys=True))
    click.echo(f"wrote {out_path}")


@main.command("serve")
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--data-dir", type=click.Path(), default=None)
def serve_cmd(port, host, data_dir):
    """Serve the HTTP API."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(data_dir=data_dir), host=host, port=port)


if __name__ == "__main__":
    main()
