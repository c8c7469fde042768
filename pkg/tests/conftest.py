import sys

import pytest

import ssikit.data as data
from ssikit import parse_model, parse_spec, validate


@pytest.fixture(scope="session")
def coin_model():
    return parse_model(data.read("coin.ssi"))


@pytest.fixture(scope="session")
def coin(coin_model):
    return validate(coin_model)


@pytest.fixture(scope="session")
def fair_coin():
    return validate(parse_model(data.read("coin_fair.ssi")))


@pytest.fixture(scope="session")
def warrior():
    return validate(parse_model(data.read("bug_warrior.ssi")))


@pytest.fixture(scope="session")
def eat_this():
    return parse_spec(data.read("eat_this.spec"), default_id="eat-this")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
