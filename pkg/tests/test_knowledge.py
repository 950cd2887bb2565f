import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pantryplan.errors import (
    MissingPriceError,
    ParseError,
    RegistryError,
    TableCoverageError,
)
from pantryplan.knowledge import (
    FoodItem,
    HouseholdMember,
    HouseholdProfile,
    KnowledgeBase,
    PlanRecord,
    PriceQuote,
    compatible_items,
    load_food_db,
    load_price_feed,
    select_latest_prices,
)

from conftest import DATA


# -- food db loading ---------------------------------------------------------

def test_small_csv_loads_field_by_field(small_foods):
    assert [it.id for it in small_foods] == ["chicken", "rice", "lentils"]
    chicken = small_foods[0]
    assert chicken.name == "Chicken breast"
    assert chicken.category == "protein"
    assert chicken.pack_size == 5.0
    assert chicken.nutrients["protein_g"] == 31.0
    assert chicken.nutrients["energy_kcal"] == 165.0
    assert chicken.nutrients["vitamin_d_iu"] == 4.0
    assert "halal" in chicken.tags and "protein-source" in chicken.tags
    assert "vegetarian" not in chicken.tags
    lentils = small_foods[2]
    assert lentils.nutrients["iron_mg"] == 6.5
    assert "vegetarian" in lentils.tags


def test_empty_stream_gives_empty_list():
    assert load_food_db(b"", format="csv") == []


def test_duplicate_food_id_rejected():
    rows = (
        "id,name,category,pack_size,tags,energy_kcal\n"
        "a,A,grain,1,halal,100\n"
        "a,A2,grain,1,halal,100\n"
    )
    with pytest.raises(ParseError, match="duplicate"):
        load_food_db(rows.encode(), format="csv", nutrient_ids=["energy_kcal"])


def test_unknown_tag_is_registry_error():
    rows = "id,name,category,pack_size,tags,energy_kcal\na,A,grain,1,organic,100\n"
    with pytest.raises(RegistryError, match="organic"):
        load_food_db(rows.encode(), format="csv", nutrient_ids=["energy_kcal"])


def test_unknown_nutrient_column_is_registry_error():
    rows = "id,name,category,pack_size,tags,caffeine_mg\na,A,grain,1,halal,10\n"
    with pytest.raises(RegistryError, match="caffeine_mg"):
        load_food_db(rows.encode(), format="csv", nutrient_ids=["energy_kcal"])


def test_malformed_number_names_row_and_field():
    rows = "id,name,category,pack_size,tags,energy_kcal\na,A,grain,oops,halal,100\n"
    with pytest.raises(ParseError) as err:
        load_food_db(rows.encode(), format="csv", nutrient_ids=["energy_kcal"])
    assert err.value.row == 2
    assert err.value.field == "pack_size"


def test_negative_price_in_feed_is_parse_error():
    line = json.dumps(
        {"item_id": "a", "vendor": "v", "price": -1, "timestamp": 0}
    ).encode()
    with pytest.raises(ParseError, match="price"):
        load_price_feed(line)


def test_food_json_round_trip(small_foods):
    payload = json.dumps([it.to_dict() for it in small_foods]).encode()
    again = load_food_db(io.BytesIO(payload), format="json")
    assert [it.to_dict() for it in again] == [it.to_dict() for it in small_foods]


# -- latest price selection ----------------------------------------------------

def q(item, vendor, price, ts):
    return PriceQuote(item_id=item, vendor=vendor, price=price, timestamp=ts)


def test_latest_before_semantics():
    quotes = [q("a", "v", 10.0, 1.0), q("a", "v", 12.0, 5.0)]
    assert select_latest_prices(quotes, as_of=3.0)["a"].price == 10.0


def test_cheapest_vendor_wins_at_equal_timestamp():
    quotes = [q("a", "v1", 10.0, 2.0), q("a", "v2", 9.5, 2.0)]
    assert select_latest_prices(quotes, as_of=2.0)["a"].price == 9.5


def test_vendor_name_breaks_exact_price_ties():
    quotes = [q("a", "zeta", 9.5, 2.0), q("a", "alpha", 9.5, 2.0)]
    assert select_latest_prices(quotes, as_of=2.0)["a"].vendor == "alpha"


def test_missing_price_lists_items():
    quotes = [q("a", "v", 10.0, 5.0)]
    with pytest.raises(MissingPriceError) as err:
        select_latest_prices(quotes, as_of=1.0, item_ids=["a", "b"])
    assert err.value.item_ids == ["a", "b"]


def test_later_quote_never_changes_earlier_answers():
    quotes = [q("a", "v", 10.0, 1.0), q("a", "v", 11.0, 2.0)]
    before = select_latest_prices(quotes, as_of=1.5)["a"]
    quotes_after = quotes + [q("a", "v", 99.0, 7.0)]
    after = select_latest_prices(quotes_after, as_of=1.5)["a"]
    assert before == after


# -- rule filtering -------------------------------------------------------------

def _item(iid, tags, available=True):
    return FoodItem(
        id=iid,
        name=iid,
        category="x",
        nutrients={},
        tags=frozenset(tags),
        pack_size=1.0,
        available=available,
    )


def test_halal_filter_example():
    items = [
        _item("chicken", {"halal"}),
        _item("pork", set()),
        _item("lentils", {"halal", "vegetarian"}),
    ]
    assert [i.id for i in compatible_items(items, {"halal"})] == ["chicken", "lentils"]


def test_empty_rules_returns_all_available():
    items = [_item("a", set()), _item("b", {"halal"}), _item("c", set(), available=False)]
    assert [i.id for i in compatible_items(items, set())] == ["a", "b"]


def test_rule_intersection():
    items = [
        _item("chicken", {"halal"}),
        _item("pork", set()),
        _item("lentils", {"halal", "vegetarian"}),
    ]
    assert [i.id for i in compatible_items(items, {"halal", "vegetarian"})] == ["lentils"]


@settings(max_examples=60)
@given(
    tags=st.lists(
        st.sets(st.sampled_from(["halal", "vegetarian", "gluten-free"])), max_size=8
    ),
    rules=st.sets(st.sampled_from(["halal", "vegetarian", "gluten-free"])),
)
def test_compatible_items_subset_and_idempotent(tags, rules):
    items = [_item(f"i{k}", t) for k, t in enumerate(tags)]
    once = compatible_items(items, rules)
    assert set(i.id for i in once) <= set(i.id for i in items)
    assert compatible_items(once, rules) == once


# -- profiles and persistence ----------------------------------------------------

def test_household_round_trip(case_study_household):
    doc = case_study_household.to_dict()
    again = HouseholdProfile.from_dict(doc)
    assert again.to_dict() == doc


def test_profile_invariants():
    member = HouseholdMember(age=30, sex="male")
    with pytest.raises(ParseError):
        HouseholdProfile(members=[], monthly_income=1000, fixed_expenses=0)
    with pytest.raises(ParseError):
        HouseholdProfile(members=[member], monthly_income=1000, fixed_expenses=2000)
    with pytest.raises(ParseError):
        HouseholdProfile(
            members=[member], monthly_income=1000, fixed_expenses=0, food_share=1.5
        )
    with pytest.raises(RegistryError):
        HouseholdProfile(
            members=[member],
            monthly_income=1000,
            fixed_expenses=0,
            dietary_rules=frozenset({"keto"}),
        )


def test_member_validation():
    with pytest.raises(ParseError):
        HouseholdMember(age=-1, sex="male")
    with pytest.raises(RegistryError):
        HouseholdMember(age=10, sex="female", conditions=frozenset({"gout"}))


def test_requirement_table_coverage_error(table):
    with pytest.raises(TableCoverageError):
        table.lookup(HouseholdMember(age=300, sex="male"))


def test_activity_scales_energy_only(table):
    sedentary = table.lookup(HouseholdMember(age=30, sex="male", activity_level="sedentary"))
    active = table.lookup(HouseholdMember(age=30, sex="male", activity_level="active"))
    assert active["energy_kcal"] > sedentary["energy_kcal"]
    for nid in sedentary:
        if nid != "energy_kcal":
            assert active[nid] == sedentary[nid]


def test_plan_record_validation():
    with pytest.raises(ParseError):
        PlanRecord(plan={}, household_id="h", week_index=-1, trigger="initial", created_at=0)
    with pytest.raises(ParseError):
        PlanRecord(plan={}, household_id="h", week_index=0, trigger="whim", created_at=0)


def test_knowledge_base_restore_round_trip(tmp_path, small_foods, case_study_household):
    kb = KnowledgeBase(data_dir=tmp_path)
    kb.load_foods(small_foods)
    hid = kb.add_household(case_study_household)
    kb.ingest_quotes([q("chicken", "v", 3.2, 1.0)])
    kb.append_plan_record(
        PlanRecord(plan={"total_cost": 1.0}, household_id=hid, week_index=0,
                   trigger="initial", created_at=1.0)
    )

    kb2 = KnowledgeBase(data_dir=tmp_path)
    kb2.restore()
    assert kb2.get_household(hid).to_dict() == case_study_household.to_dict()
    assert [x.to_dict() for x in kb2.quotes] == [x.to_dict() for x in kb.quotes]
    assert [r.to_dict() for r in kb2.plan_records] == [r.to_dict() for r in kb.plan_records]
