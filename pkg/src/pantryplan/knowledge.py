"""Shared knowledge base: foods, nutrients, prices, households, and plan history.

All quantities are per 100 g ("base unit"); prices are currency per base unit.
Requirement values are weekly. Persistence is a single-directory document
store (JSON document per collection plus append-only JSONL logs), rooted at
``PANTRY_DATA_DIR`` unless an explicit path is given.
"""

from __future__ import annotations

import csv
import io
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (
    DataError,
    MissingPriceError,
    ParseError,
    RegistryError,
)

from importlib import resources

SCHEMA_VERSION = 1

# Closed registries. Unknown codes at load time are errors, not warnings.
TAG_REGISTRY = frozenset(
    {
        "halal",
        "vegetarian",
        "low-sodium-suitable",
        "gluten-free",
        "nut-free",
        "protein-source",
    }
)

# Tags that encode safety constraints (allergies); these are enforced even
# when soft preference filtering is disabled (simulation ablations).
HARD_SAFETY_TAGS = frozenset({"gluten-free", "nut-free"})

CONDITION_REGISTRY = frozenset(
    {"vitamin-d-deficiency", "anemia", "hypertension", "diabetes"}
)

SEXES = ("male", "female")
ACTIVITY_LEVELS = ("sedentary", "moderate", "active")


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NutrientDef:
    """One nutrient in the registry; unit is fixed for all food entries."""

    id: str
    name: str
    unit: str
    bound_kind: str  # "lower" | "upper" | "both"

    def __post_init__(self):
        if self.bound_kind not in ("lower", "upper", "both"):
            raise RegistryError(f"nutrient {self.id}: bad bound_kind {self.bound_kind!r}")

    @property
    def has_floor(self) -> bool:
        return self.bound_kind in ("lower", "both")


@dataclass
class FoodItem:
    """A purchasable item; nutrient amounts are per 100 g."""

    id: str
    name: str
    category: str
    nutrients: dict[str, float]
    tags: frozenset[str]
    pack_size: float  # base units per purchasable pack
    available: bool = True

    def validate(self, nutrient_ids: Iterable[str]) -> None:
        known = set(nutrient_ids)
        for nid, amount in self.nutrients.items():
            if nid not in known:
                raise RegistryError(f"food {self.id}: unknown nutrient {nid!r}")
            if amount < 0:
                raise ParseError(f"food {self.id}: negative amount for {nid}", field=nid)
        unknown_tags = self.tags - TAG_REGISTRY
        if unknown_tags:
            raise RegistryError(
                f"food {self.id}: unknown tags {sorted(unknown_tags)}"
            )
        if self.pack_size <= 0:
            raise ParseError(f"food {self.id}: pack_size must be > 0", field="pack_size")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "category": self.category,
            "nutrients": dict(self.nutrients),
            "tags": sorted(self.tags),
            "pack_size": self.pack_size,
            "available": self.available,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "FoodItem":
        return cls(
            id=d["id"],
            name=d["name"],
            category=d["category"],
            nutrients={k: float(v) for k, v in d["nutrients"].items()},
            tags=frozenset(d.get("tags", ())),
            pack_size=float(d["pack_size"]),
            available=bool(d.get("available", True)),
        )


@dataclass(frozen=True)
class PriceQuote:
    item_id: str
    vendor: str
    price: float  # currency per base unit
    timestamp: float

    def __post_init__(self):
        if self.price <= 0:
            raise ParseError(
                f"quote for {self.item_id}@{self.vendor}: price must be > 0",
                field="price",
            )

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "vendor": self.vendor,
            "price": self.price,
            "timestamp": self.timestamp,
        }


@dataclass
class HouseholdMember:
    age: float
    sex: str
    activity_level: str = "moderate"
    conditions: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.age < 0:
            raise ParseError("member age must be >= 0", field="age")
        if self.sex not in SEXES:
            raise ParseError(f"unknown sex {self.sex!r}", field="sex")
        if self.activity_level not in ACTIVITY_LEVELS:
            raise ParseError(
                f"unknown activity level {self.activity_level!r}", field="activity_level"
            )
        unknown = frozenset(self.conditions) - CONDITION_REGISTRY
        if unknown:
            raise RegistryError(f"unknown condition codes {sorted(unknown)}")
        object.__setattr__(self, "conditions", frozenset(self.conditions))

    def to_dict(self) -> dict:
        return {
            "age": self.age,
            "sex": self.sex,
            "activity_level": self.activity_level,
            "conditions": sorted(self.conditions),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "HouseholdMember":
        return cls(
            age=float(d["age"]),
            sex=d["sex"],
            activity_level=d.get("activity_level", "moderate"),
            conditions=frozenset(d.get("conditions", ())),
        )


@dataclass
class HouseholdProfile:
    members: list[HouseholdMember]
    monthly_income: float
    fixed_expenses: float
    dietary_rules: frozenset[str] = frozenset()
    food_share: float = 0.20
    excluded_items: frozenset[str] = frozenset()  # user-rejected substitutes

    def __post_init__(self):
        if not self.members:
            raise ParseError("household must have at least one member", field="members")
        if not (0 < self.food_share < 1):
            raise ParseError("food_share must be in (0, 1)", field="food_share")
        if self.fixed_expenses > self.monthly_income:
            raise ParseError(
                "fixed_expenses exceed monthly_income", field="fixed_expenses"
            )
        unknown = frozenset(self.dietary_rules) - TAG_REGISTRY
        if unknown:
            raise RegistryError(f"unknown dietary rules {sorted(unknown)}")
        object.__setattr__(self, "dietary_rules", frozenset(self.dietary_rules))
        object.__setattr__(self, "excluded_items", frozenset(self.excluded_items))

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "members": [m.to_dict() for m in self.members],
            "monthly_income": self.monthly_income,
            "fixed_expenses": self.fixed_expenses,
            "dietary_rules": sorted(self.dietary_rules),
            "food_share": self.food_share,
            "excluded_items": sorted(self.excluded_items),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "HouseholdProfile":
        schema = d.get("schema", SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise ParseError(f"unsupported household schema {schema}", field="schema")
        return cls(
            members=[HouseholdMember.from_dict(m) for m in d["members"]],
            monthly_income=float(d["monthly_income"]),
            fixed_expenses=float(d["fixed_expenses"]),
            dietary_rules=frozenset(d.get("dietary_rules", ())),
            food_share=float(d.get("food_share", 0.20)),
            excluded_items=frozenset(d.get("excluded_items", ())),
        )


@dataclass(frozen=True)
class DemographicBucket:
    age_min: float
    age_max: float  # inclusive
    sex: str

    def covers(self, member: HouseholdMember) -> bool:
        return self.sex == member.sex and self.age_min <= member.age <= self.age_max


class RequirementTable:
    """Weekly nutrient floors per demographic bucket (age band x sex).

    Activity level scales the energy requirement only; other nutrients are
    taken as-is from the bucket row.
    """

    def __init__(
        self,
        nutrients: list[NutrientDef],
        buckets: list[tuple[DemographicBucket, dict[str, float]]],
        activity_energy_multiplier: dict[str, float],
        energy_nutrient: str = "energy_kcal",
    ):
        self.nutrients = {n.id: n for n in nutrients}
        if len(self.nutrients) != len(nutrients):
            raise RegistryError("duplicate nutrient ids in registry")
        self.buckets = buckets
        self.activity_energy_multiplier = activity_energy_multiplier
        self.energy_nutrient = energy_nutrient
        floor_ids = {nid for nid, n in self.nutrients.items() if n.has_floor}
        for bucket, values in buckets:
            missing = floor_ids - set(values)
            if missing:
                raise RegistryError(
                    f"bucket {bucket} missing floor nutrients {sorted(missing)}"
                )

    def lookup(self, member: HouseholdMember) -> dict[str, float]:
        """Weekly per-member requirement vector, activity-adjusted."""
        for bucket, values in self.buckets:
            if bucket.covers(member):
                r = dict(values)
                mult = self.activity_energy_multiplier[member.activity_level]
                if self.energy_nutrient in r:
                    r[self.energy_nutrient] *= mult
                return r
        from .errors import TableCoverageError

        raise TableCoverageError(
            f"no demographic bucket covers member age={member.age} sex={member.sex}"
        )

    def floor_nutrient_ids(self) -> list[str]:
        return [nid for nid, n in self.nutrients.items() if n.has_floor]

    @classmethod
    def from_dict(cls, d: Mapping) -> "RequirementTable":
        nutrients = [NutrientDef(**n) for n in d["nutrients"]]
        buckets = [
            (
                DemographicBucket(b["age_min"], b["age_max"], b["sex"]),
                {k: float(v) for k, v in b["weekly"].items()},
            )
            for b in d["buckets"]
        ]
        return cls(nutrients, buckets, dict(d["activity_energy_multiplier"]))


@dataclass
class PlanRecord:
    """Append-only history entry; ``plan`` is the MealPlan serialized to a dict."""

    plan: dict
    household_id: str
    week_index: int
    trigger: str  # "initial" | "shock-replan" | "manual"
    created_at: float

    def __post_init__(self):
        if self.week_index < 0:
            raise ParseError("week_index must be >= 0", field="week_index")
        if self.trigger not in ("initial", "shock-replan", "manual"):
            raise ParseError(f"unknown trigger {self.trigger!r}", field="trigger")

    def to_dict(self) -> dict:
        return {
            "plan": self.plan,
            "household_id": self.household_id,
            "week_index": self.week_index,
            "trigger": self.trigger,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PlanRecord":
        return cls(
            plan=d["plan"],
            household_id=d["household_id"],
            week_index=int(d["week_index"]),
            trigger=d["trigger"],
            created_at=float(d["created_at"]),
        )


# ---------------------------------------------------------------------------
# Loaders
# ---------------------------------------------------------------------------

FOOD_CSV_FIXED_COLUMNS = ("id", "name", "category", "pack_size", "tags")


def load_requirement_table(source=None) -> RequirementTable:
    """Load the requirement table; defaults to the bundled fixture."""
    if source is None:
        text = resources.files("pantryplan.data").joinpath("requirements.json").read_text()
        return RequirementTable.from_dict(json.loads(text))
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return RequirementTable.from_dict(json.load(fh))
    return RequirementTable.from_dict(json.load(source))


def load_food_db(source, format: str = "csv", nutrient_ids: Iterable[str] | None = None) -> list[FoodItem]:
    """Parse a food database from a byte stream (or path) in csv or json format.

    CSV header: ``id,name,category,pack_size,tags,<nutrient-id>...`` with
    pipe-separated tags. Duplicate ids and unknown tags/nutrients are errors.
    """
    if nutrient_ids is None:
        nutrient_ids = [n.id for n in load_requirement_table().nutrients.values()]
    nutrient_ids = list(nutrient_ids)

    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            return load_food_db(fh, format=format, nutrient_ids=nutrient_ids)
    if isinstance(source, bytes):
        source = io.BytesIO(source)

    if format == "json":
        items = [FoodItem.from_dict(d) for d in json.load(source)]
    elif format == "csv":
        text = io.TextIOWrapper(source, encoding="utf-8", newline="")
        items = _parse_food_csv(text, nutrient_ids)
    else:
        raise ParseError(f"unsupported food db format {format!r}")

    seen: set[str] = set()
    for item in items:
        if item.id in seen:
            raise ParseError(f"duplicate food id {item.id!r}", field="id")
        seen.add(item.id)
        item.validate(nutrient_ids)
    return items


def _parse_food_csv(text, nutrient_ids: list[str]) -> list[FoodItem]:
    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        return []
    header = [h.strip() for h in header]
    if tuple(header[: len(FOOD_CSV_FIXED_COLUMNS)]) != FOOD_CSV_FIXED_COLUMNS:
        raise ParseError(
            f"bad foods.csv header; expected it to start with {','.join(FOOD_CSV_FIXED_COLUMNS)}",
            row=1,
        )
    nutrient_cols = header[len(FOOD_CSV_FIXED_COLUMNS):]
    known = set(nutrient_ids)
    for col in nutrient_cols:
        if col not in known:
            raise RegistryError(f"foods.csv header names unknown nutrient {col!r}")

    items = []
    for rownum, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError("wrong number of columns", row=rownum)
        rec = dict(zip(header, (c.strip() for c in row)))
        try:
            pack_size = float(rec["pack_size"])
        except ValueError:
            raise ParseError(
                f"pack_size {rec['pack_size']!r} is not a number",
                row=rownum,
                field="pack_size",
            ) from None
        nutrients = {}
        for col in nutrient_cols:
            try:
                nutrients[col] = float(rec[col])
            except ValueError:
                raise ParseError(
                    f"{rec[col]!r} is not a number", row=rownum, field=col
                ) from None
        tags = frozenset(t for t in rec["tags"].split("|") if t)
        item = FoodItem(
            id=rec["id"],
            name=rec["name"],
            category=rec["category"],
            nutrients=nutrients,
            tags=tags,
            pack_size=pack_size,
        )
        items.append(item)
    return items


def load_price_feed(source) -> list[PriceQuote]:
    """Parse a prices.jsonl stream (or path): one quote object per line."""
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            return load_price_feed(fh)
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    text = io.TextIOWrapper(source, encoding="utf-8")
    quotes = []
    for lineno, line in enumerate(text, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}", row=lineno) from None
        try:
            quote = PriceQuote(
                item_id=d["item_id"],
                vendor=d["vendor"],
                price=float(d["price"]),
                timestamp=float(d["timestamp"]),
            )
        except KeyError as exc:
            raise ParseError(f"missing key {exc}", row=lineno) from None
        except ParseError as exc:
            raise ParseError(str(exc), row=lineno) from None
        quotes.append(quote)
    return quotes


def load_household(source) -> HouseholdProfile:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return HouseholdProfile.from_dict(json.load(fh))
    return HouseholdProfile.from_dict(json.load(source))


def load_bundled_foods() -> list[FoodItem]:
    data = resources.files("pantryplan.data").joinpath("foods.csv").read_bytes()
    return load_food_db(data, format="csv")


def load_bundled_prices() -> list[PriceQuote]:
    data = resources.files("pantryplan.data").joinpath("prices.jsonl").read_bytes()
    return load_price_feed(data)


# ---------------------------------------------------------------------------
# Query operations
# ---------------------------------------------------------------------------

def compatible_items(items: list[FoodItem], rules: Iterable[str]) -> list[FoodItem]:
    """Items carrying every rule tag and currently available, order preserved."""
    rules = frozenset(rules)
    return [it for it in items if it.available and rules <= it.tags]


def select_latest_prices(
    quotes: Iterable[PriceQuote],
    as_of: float,
    item_ids: Iterable[str] | None = None,
) -> dict[str, PriceQuote]:
    """Latest-before quote per item; cheapest vendor wins at equal timestamps.

    Remaining ties break by vendor name so repeated calls are deterministic.
    """
    best: dict[str, PriceQuote] = {}
    for q in quotes:
        if q.timestamp > as_of:
            continue
        cur = best.get(q.item_id)
        if (
            cur is None
            or q.timestamp > cur.timestamp
            or (q.timestamp == cur.timestamp and (q.price, q.vendor) < (cur.price, cur.vendor))
        ):
            best[q.item_id] = q
    if item_ids is not None:
        wanted = set(item_ids)
        missing = wanted - set(best)
        if missing:
            raise MissingPriceError(missing)
        return {iid: best[iid] for iid in best if iid in wanted}
    if not best:
        raise MissingPriceError(set())
    return best


# ---------------------------------------------------------------------------
# Persistent store
# ---------------------------------------------------------------------------

class KnowledgeBase:
    """Single-writer document store shared by all agents.

    Reads are safe from any thread; all mutations take the writer lock and
    append to the on-disk logs before returning.
    """

    def __init__(
        self,
        data_dir: str | Path | None = None,
        requirements: RequirementTable | None = None,
    ):
        if data_dir is None:
            import os

            data_dir = os.environ.get("PANTRY_DATA_DIR", "pantry_data")
        self.data_dir = Path(data_dir)
        self._write_lock = threading.Lock()
        self.foods: dict[str, FoodItem] = {}
        self.quotes: list[PriceQuote] = []
        self.households: dict[str, HouseholdProfile] = {}
        self.plan_records: list[PlanRecord] = []
        self.requirements = requirements if requirements is not None else load_requirement_table()
        self._next_household = 1

    # -- loading ------------------------------------------------------------

    def load_foods(self, items: list[FoodItem]) -> None:
        with self._write_lock:
            self.foods = {it.id: it for it in items}

    def ingest_quotes(self, quotes: list[PriceQuote], persist: bool = True) -> None:
        """Append quotes, keeping each (item, vendor) series timestamp-sorted."""
        with self._write_lock:
            self.quotes.extend(quotes)
            self.quotes.sort(key=lambda q: (q.item_id, q.vendor, q.timestamp))
            if persist:
                self._append_jsonl("prices.jsonl", [q.to_dict() for q in quotes])

    def latest_prices(
        self, as_of: float, item_ids: Iterable[str] | None = None
    ) -> dict[str, PriceQuote]:
        return select_latest_prices(self.quotes, as_of, item_ids)

    # -- households ----------------------------------------------------------

    def add_household(self, profile: HouseholdProfile, household_id: str | None = None) -> str:
        with self._write_lock:
            if household_id is None:
                household_id = f"hh-{self._next_household:04d}"
                self._next_household += 1
            self.households[household_id] = profile
            self._save_households()
        return household_id

    def get_household(self, household_id: str) -> HouseholdProfile:
        try:
            return self.households[household_id]
        except KeyError:
            from .errors import UnknownItemError

            raise UnknownItemError(f"unknown household {household_id!r}") from None

    # -- plan history ---------------------------------------------------------

    def append_plan_record(self, record: PlanRecord, persist: bool = True) -> None:
        with self._write_lock:
            self.plan_records.append(record)
            if persist:
                self._append_jsonl("plans.jsonl", [record.to_dict()])

    def history(self, household_id: str) -> list[PlanRecord]:
        return [r for r in self.plan_records if r.household_id == household_id]

    def active_record(self, household_id: str) -> PlanRecord | None:
        recs = self.history(household_id)
        return recs[-1] if recs else None

    # -- persistence -----------------------------------------------------------

    def _append_jsonl(self, name: str, rows: list[dict]) -> None:
        self.data_dir.mkdir(parents=True, exist_ok=True)
        with open(self.data_dir / name, "a", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")

    def _save_households(self) -> None:
        self.data_dir.mkdir(parents=True, exist_ok=True)
        doc = {
            "schema": SCHEMA_VERSION,
            "next_id": self._next_household,
            "households": {hid: p.to_dict() for hid, p in self.households.items()},
        }
        tmp = self.data_dir / "households.json.tmp"
        tmp.write_text(json.dumps(doc, indent=1, sort_keys=True))
        tmp.replace(self.data_dir / "households.json")

    def restore(self) -> None:
        """Reload households, quotes, and plan history from the data dir."""
        hh_path = self.data_dir / "households.json"
        if hh_path.exists():
            doc = json.loads(hh_path.read_text())
            self.households = {
                hid: HouseholdProfile.from_dict(p)
                for hid, p in doc.get("households", {}).items()
            }
            self._next_household = doc.get("next_id", len(self.households) + 1)
        prices_path = self.data_dir / "prices.jsonl"
        if prices_path.exists():
            with open(prices_path, "rb") as fh:
                self.quotes = load_price_feed(fh)
            self.quotes.sort(key=lambda q: (q.item_id, q.vendor, q.timestamp))
        plans_path = self.data_dir / "plans.jsonl"
        if plans_path.exists():
            self.plan_records = []
            with open(plans_path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self.plan_records.append(PlanRecord.from_dict(json.loads(line)))
