"""HTTP API over the orchestrator; JSON bodies, schema-versioned.

Routes:
  POST /households                    create or update a profile
  GET  /households/{id}
  POST /households/{id}/plan?as_of=   run the weekly cycle
  POST /prices                        batch quotes (JSON array or JSONL)
  POST /households/{id}/whatif        hypothetical shock, never persisted
  GET  /households/{id}/history       plan records
  GET  /healthz
"""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException, Request
from pydantic import BaseModel, Field

from .errors import (
    BudgetError,
    ContractViolation,
    InfeasiblePlanError,
    MissingPriceError,
    PantryError,
    ParseError,
    UnknownItemError,
)
from .knowledge import (
    HouseholdProfile,
    KnowledgeBase,
    PriceQuote,
    load_bundled_foods,
    load_bundled_prices,
)
from .orchestrator import Orchestrator


class MemberIn(BaseModel):
    age: float
    sex: str
    activity_level: str = "moderate"
    conditions: list[str] = Field(default_factory=list)


class HouseholdIn(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    members: list[MemberIn]
    monthly_income: float
    fixed_expenses: float
    dietary_rules: list[str] = Field(default_factory=list)
    food_share: float = 0.20
    excluded_items: list[str] = Field(default_factory=list)
    household_id: str | None = None

    model_config = {"populate_by_name": True}


class QuoteIn(BaseModel):
    item_id: str
    vendor: str
    price: float
    timestamp: float


class WhatIfIn(BaseModel):
    item_id: str
    rel_change: float


def _profile_from_request(body: HouseholdIn) -> HouseholdProfile:
    try:
        return HouseholdProfile.from_dict(
            {
                "schema": body.schema_version,
                "members": [m.model_dump() for m in body.members],
                "monthly_income": body.monthly_income,
                "fixed_expenses": body.fixed_expenses,
                "dietary_rules": body.dietary_rules,
                "food_share": body.food_share,
                "excluded_items": body.excluded_items,
            }
        )
    except PantryError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def create_app(
    data_dir=None,
    kb: KnowledgeBase | None = None,
    orchestrator: Orchestrator | None = None,
    load_fixtures: bool = True,
) -> FastAPI:
    """Build the app; by default backed by the bundled food and price data."""
    if kb is None:
        kb = KnowledgeBase(data_dir=data_dir)
        kb.restore()
    if load_fixtures and not kb.foods:
        kb.load_foods(load_bundled_foods())
    if load_fixtures and not kb.quotes:
        kb.ingest_quotes(load_bundled_prices(), persist=False)
    orc = orchestrator or Orchestrator(kb)
    app = FastAPI(title="pantryplan", version="1")
    app.state.kb = kb
    app.state.orchestrator = orc

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "schema": 1}

    @app.post("/households", status_code=201)
    def create_household(body: HouseholdIn):
        profile = _profile_from_request(body)
        try:
            budget = orc.budget_preview(profile)
        except BudgetError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        household_id = kb.add_household(profile, body.household_id)
        return {
            "schema": 1,
            "household_id": household_id,
            "weekly_budget": budget.to_dict(),
        }

    @app.get("/households/{household_id}")
    def get_household(household_id: str):
        try:
            profile = kb.get_household(household_id)
        except UnknownItemError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        doc = profile.to_dict()
        doc["household_id"] = household_id
        return doc

    @app.post("/households/{household_id}/plan")
    def plan_household(household_id: str, as_of: float = 0.0):
        try:
            result = orc.run_weekly_cycle(household_id, as_of=as_of)
        except UnknownItemError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except InfeasiblePlanError as exc:
            raise HTTPException(
                status_code=409,
                detail={"error": "infeasible", "diagnosis": exc.diagnosis.to_dict()},
            ) from exc
        except (BudgetError, MissingPriceError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        doc = result.to_dict()
        doc["schema"] = 1
        doc["household_id"] = household_id
        return doc

    @app.post("/prices")
    async def ingest_prices(request: Request):
        quotes = await _parse_quotes(request)
        if not quotes:
            return {"schema": 1, "replanned": []}
        kb.ingest_quotes(quotes, persist=orc.persist)
        as_of = max(q.timestamp for q in quotes)
        replanned = []
        for household_id in sorted(kb.households):
            if kb.active_record(household_id) is None:
                continue
            try:
                outcome = orc.check_and_maybe_replan(household_id, as_of)
            except InfeasiblePlanError:
                continue
            if outcome is not None:
                replanned.append(household_id)
        return {"schema": 1, "replanned": replanned}

    async def _parse_quotes(request: Request) -> list[PriceQuote]:
        raw = await request.body()
        content_type = request.headers.get("content-type", "")
        try:
            if "json" in content_type and not content_type.endswith("jsonl"):
                data = json.loads(raw)
                if not isinstance(data, list):
                    raise ParseError("expected a JSON array of quotes")
                return [
                    PriceQuote(
                        item_id=d["item_id"],
                        vendor=d["vendor"],
                        price=float(d["price"]),
                        timestamp=float(d["timestamp"]),
                    )
                    for d in data
                ]
            from .knowledge import load_price_feed

            return load_price_feed(raw)
        except (KeyError, ValueError, ParseError) as exc:
            raise HTTPException(status_code=422, detail=f"bad quote batch: {exc}") from exc

    @app.post("/households/{household_id}/whatif")
    def whatif(household_id: str, body: WhatIfIn):
        try:
            result = orc.whatif(household_id, body.item_id, body.rel_change)
        except UnknownItemError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ContractViolation as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        result["schema"] = 1
        return result

    @app.get("/households/{household_id}/history")
    def history(household_id: str):
        try:
            kb.get_household(household_id)
        except UnknownItemError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return {
            "schema": 1,
            "records": [r.to_dict() for r in kb.history(household_id)],
        }

    return app
