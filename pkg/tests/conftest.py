import pathlib

import pytest

from pantryplan.budgeting import load_personalization_rules
from pantryplan.knowledge import (
    HouseholdMember,
    HouseholdProfile,
    load_bundled_foods,
    load_bundled_prices,
    load_food_db,
    load_requirement_table,
)

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def foods():
    return load_bundled_foods()


@pytest.fixture(scope="session")
def base_prices():
    return {q.item_id: q.price for q in load_bundled_prices()}


@pytest.fixture(scope="session")
def table():
    return load_requirement_table()


@pytest.fixture(scope="session")
def rules():
    return load_personalization_rules()


@pytest.fixture()
def small_foods():
    return load_food_db(DATA / "foods_small.csv", format="csv")


@pytest.fixture()
def small_prices():
    return {"chicken": 3.2, "rice": 0.55, "lentils": 1.2}


@pytest.fixture()
def adult():
    return HouseholdMember(age=30, sex="male")


@pytest.fixture()
def case_study_household():
    """The 4-person, 10,000 SAR/month profile used across the examples."""
    return HouseholdProfile(
        members=[
            HouseholdMember(age=35, sex="male"),
            HouseholdMember(age=32, sex="female"),
            HouseholdMember(age=10, sex="male"),
            HouseholdMember(age=6, sex="female"),
        ],
        monthly_income=10000,
        fixed_expenses=6000,
        dietary_rules=frozenset({"halal"}),
        food_share=0.166,
    )
