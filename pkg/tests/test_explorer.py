# tests/test_explorer.py
import pytest

from phoenix_vault.core.codec import dumps
from phoenix_vault.core.errors import BudgetExceeded, InvalidConfig
from phoenix_vault.core.explorer import ExploreConfig, Explorer, canonical_key, explore
from phoenix_vault.core.mutants import MUTANTS
from phoenix_vault.core.properties import check_trace
from phoenix_vault.core.chain import Trace
from phoenix_vault.core.uint256 import MAX_INT, ArithmeticMode
from phoenix_vault.core.vault import vault_new
from phoenix_vault.models.actions import Withdraw, make_address


def small(**overrides) -> ExploreConfig:
    values = dict(address_universe=4, amount_cap=2, max_depth=3, delay=2, max_ledger_size=3,
                  mode=ArithmeticMode.FIXED, initial_funds=None)
    values.update(overrides)
    return ExploreConfig(**values)


def test_depth_zero_visits_only_the_root():
    report = explore(small(max_depth=0))
    assert report.states_visited == 1
    assert report.transitions == 0
    assert report.ok


@pytest.mark.parametrize("overrides", [
    {"address_universe": 2}, {"amount_cap": 0}, {"max_depth": -1}, {"max_ledger_size": 0}, {"workers": 0},
    {"initial_funds": MAX_INT + 1},
])
def test_invalid_config(overrides):
    with pytest.raises(InvalidConfig):
        small(**overrides)


def test_fixed_vault_holds_every_property():
    report = explore(small())
    assert report.ok
    assert report.states_visited > 1
    assert all(v.holds for v in report.verdicts())


def test_legacy_vault_breaks_funds_coverage():
    report = explore(small(mode=ArithmeticMode.LEGACY))
    assert report.violated() == {"4.1"}
    violation = report.violations[0]
    assert len(violation.witness) == 3
    assert violation.witness[1].action.amount > MAX_INT // 2

    # The witness replays to the same violation.
    config = small(mode=ArithmeticMode.LEGACY).vault_config()
    trace = Trace(list(violation.witness), end_block=violation.witness[-1].block)
    assert "4.1" in {v.property.number for v in check_trace(config, trace)}


def test_legacy_witness_prefers_a_withdrawal():
    config = small(address_universe=3, max_ledger_size=2, max_depth=4, mode=ArithmeticMode.LEGACY)
    report = explore(config)
    assert report.violated() == {"4.1"}
    [violation] = report.violations
    assert len(violation.witness) == 3
    assert isinstance(violation.witness[-1].action, Withdraw)
    assert violation.witness[-1].outcome.applied

    trace = Trace(list(violation.witness), end_block=violation.witness[-1].block)
    assert "4.1" in {v.property.number for v in check_trace(config.vault_config(), trace)}


def test_exploration_is_deterministic():
    config = small(mode=ArithmeticMode.LEGACY)
    first = dumps(explore(config).to_model())
    assert dumps(explore(config).to_model()) == first
    assert dumps(explore(small(mode=ArithmeticMode.LEGACY, workers=2)).to_model()) == first


def test_state_budget():
    with pytest.raises(BudgetExceeded):
        explore(small(state_budget=5))


def test_canonical_key_uses_relative_time():
    state = vault_new(2, make_address(1), make_address(2), 4)
    assert canonical_key(state, 0) == canonical_key(state, 7)


def test_spare_outsider_stands_in_for_the_rest():
    explorer = Explorer(small(address_universe=6))
    root = explorer.config.vault_config()
    senders = explorer._senders(vault_new(root.delay, root.t1, root.creator, root.max_ledger_size))
    assert senders == [make_address(1), make_address(2), make_address(3)]


@pytest.mark.parametrize("number", sorted(MUTANTS))
def test_each_broken_engine_is_caught(number):
    report = explore(small(max_depth=4, fail_fast=True, engine=MUTANTS[number]()))
    assert number in report.violated()
    found = next(v for v in report.violations if v.property.number == number)
    assert found.witness


@pytest.mark.slow
def test_default_bounds_fixed_vault():
    report = explore(ExploreConfig(mode=ArithmeticMode.FIXED))
    assert report.ok
    assert report.depth == 6


@pytest.mark.slow
def test_default_bounds_legacy_vault():
    report = explore(ExploreConfig(mode=ArithmeticMode.LEGACY))
    assert report.violated() == {"4.1"}
    [violation] = report.violations
    assert len(violation.witness) <= 3
    assert violation.witness[1].action.amount > MAX_INT // 2
    assert isinstance(violation.witness[-1].action, Withdraw)
