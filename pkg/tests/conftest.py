import pytest

import scentag as st


@pytest.fixture(scope="session")
def registry():
    return st.builtin_registry()


@pytest.fixture(scope="session")
def paper_categories(registry):
    return st.parse_category(registry, st.fixture_text("paper_categories.cat"))


@pytest.fixture(scope="session")
def straight_record(registry):
    return st.parse_scenario(registry, st.fixture_text("straight_road.scn"))


@pytest.fixture(scope="session")
def oncoming_record(registry):
    return st.parse_scenario(registry, st.fixture_text("oncoming_turn.scn"))


@pytest.fixture(scope="session")
def cutin_record(registry):
    return st.parse_scenario(registry, st.fixture_text("cutin.scn"))
