# tests/test_scenarios.py
import pytest

from phoenix_vault.core.chain import chain_replay
from phoenix_vault.core.errors import ErrorCode, InvalidConfig, ParseError, ReplayDivergence
from phoenix_vault.core.properties import check_trace
from phoenix_vault.core.scenarios import (
    ATTACKER, ATTACKER_WALLET, OWNER_WALLET, SCENARIOS, parse_params, run_scenario,
)
from phoenix_vault.core.uint256 import MAX_INT, ArithmeticMode

LEGACY, FIXED = ArithmeticMode.LEGACY, ArithmeticMode.FIXED


def stages(result) -> dict:
    return {s.stage: (s.funds, s.pending_sum) for s in result.narrative}


def test_dos_legacy_stage_values():
    result = run_scenario("dos", LEGACY)
    assert result.passed
    by_stage = stages(result)
    assert by_stage["stage 1"] == (3, 2)
    assert by_stage["stage 2"] == (3, 0)
    assert by_stage["stage 3"] == (1, MAX_INT - 1)
    assert [v.property.number for v in result.violations] == ["4.1"]
    stage3 = next(s for s in result.narrative if s.stage == "stage 3")
    assert result.violations[0].block == stage3.block
    assert result.trace.records[-1].outcome.error is ErrorCode.INSUFFICIENT_FUNDS


def test_dos_fixed_rejects_the_overflow():
    result = run_scenario("dos", FIXED)
    assert result.violations == []
    assert ErrorCode.OVERFLOW in {r.outcome.error for r in result.trace.records}
    assert stages(result)["stage 3"] == (1, 0)
    assert result.trace.records[-1].outcome.applied


def test_dos_with_unit_amounts_still_lands():
    result = run_scenario("dos", LEGACY, k=1, l=1)
    assert stages(result)["stage 3"] == (2, MAX_INT)
    assert "no smaller request" in result.narrative[-1].note


def test_fixed_dos_trace_diverges_under_legacy():
    result = run_scenario("dos", FIXED)
    legacy = result.config.model_copy(update={"mode": LEGACY})
    with pytest.raises(ReplayDivergence) as exc:
        chain_replay(legacy, result.trace)
    pivot = next(r for r in result.trace.records if r.outcome.error is ErrorCode.OVERFLOW)
    assert exc.value.block == pivot.block


def test_recorded_scenarios_replay(mode):
    for name in SCENARIOS:
        result = run_scenario(name, mode)
        replayed = chain_replay(result.config, result.trace)
        assert replayed.balances == result.balances


def test_delay_evasion_legacy():
    result = run_scenario("delay-evasion", LEGACY)
    by_stage = stages(result)
    assert by_stage["stage 1"] == (2, 2)
    assert by_stage["stage 2"] == (2, 0)
    assert by_stage["stage 3"] == (2, 2)
    assert result.balances[ATTACKER_WALLET] == 2
    assert {v.property.number for v in result.violations} == {"4.1"}


def test_delay_evasion_repeated():
    result = run_scenario("delay-evasion", LEGACY, n=3)
    assert result.balances[ATTACKER_WALLET] == 6
    drains = [r for r in result.trace.records if r.sender == ATTACKER and r.action.kind == "withdraw"]
    deposits = [r for r in result.trace.records if r.action.kind == "deposit"][1:]
    assert len(deposits) == 3
    for deposit in deposits:
        assert any(d.block == deposit.block + 1 for d in drains)


def test_delay_evasion_fixed_is_stopped():
    result = run_scenario("delay-evasion", FIXED, n=3)
    assert result.violations == []
    assert result.balances.get(ATTACKER_WALLET, 0) == 0


def test_type2_recovery(mode):
    result = run_scenario("type2-recovery", mode, n=3)
    assert result.balances.get(ATTACKER_WALLET, 0) == 0
    assert result.balances[OWNER_WALLET] == 4
    assert result.violations == []
    codes = [r.outcome.error for r in result.trace.records if not r.outcome.applied]
    assert codes == [ErrorCode.NOT_FOUND] * 3 + [ErrorCode.UNAUTHORIZED]


def test_type1_lockdown(mode):
    result = run_scenario("type1-lockdown", mode)
    assert stages(result)["equilibrium"] == (10, 4)
    codes = [r.outcome.error for r in result.trace.records if not r.outcome.applied]
    assert codes == [ErrorCode.UNLOCK_NOT_INCREASED, ErrorCode.LOCKED, ErrorCode.LOCKED]
    assert result.balances == {}


@pytest.mark.parametrize("name", ["tier2-loss", "tier1-loss"])
def test_key_loss_recovery(name):
    result = run_scenario(name, FIXED, funds=7)
    assert result.balances == {OWNER_WALLET: 7}
    assert stages(result)["rescue"] == (0, 0)


def test_scenario_trace_is_clean_under_fixed_arithmetic():
    for name in SCENARIOS:
        result = run_scenario(name, FIXED)
        assert check_trace(result.config, result.trace) == []


@pytest.mark.parametrize("name, params", [
    ("dos", {"k": 4}),
    ("delay-evasion", {"deposits": (1,)}),
    ("type2-recovery", {"n": 10}),
    ("type1-lockdown", {"k": 6}),
    ("dos", {"delay": 0}),
])
def test_invalid_parameters(name, params):
    with pytest.raises(InvalidConfig):
        run_scenario(name, LEGACY, **params)


def test_parse_params():
    assert parse_params("K=2, L=1,n=3,delay=5,funds=4,deposits=2:2:2") == {
        "k": 2, "l": 1, "n": 3, "delay": 5, "funds": 4, "deposits": (2, 2, 2)}
    assert parse_params("") == {}
    for bad in ("K", "x=1", "n=three"):
        with pytest.raises(ParseError):
            parse_params(bad)


def test_unknown_scenario():
    with pytest.raises(ParseError):
        run_scenario("reentrancy", FIXED)
