# tests/test_chain.py
import orjson
import pytest

from phoenix_vault.core.chain import Chain, Trace, TraceRecord, chain_advance, chain_new, chain_replay, chain_submit
from phoenix_vault.core.codec import (
    decode_trace, dumps, encode_trace, load_config, load_snapshot, restore_chain, snapshot_chain,
)
from phoenix_vault.core.errors import ErrorCode, InvalidConfig, ParseError, ReplayDivergence
from phoenix_vault.core.random_trace import random_trace
from phoenix_vault.core.uint256 import MAX_INT, ArithmeticMode
from phoenix_vault.models.actions import Deposit, RequestWithdrawal, Withdraw

from .conftest import make_config
from .helpers import CREATOR, OUTSIDER, PAYEE, tags


def test_chain_new(chain):
    assert chain.current_block == 0
    assert len(chain.trace) == 0
    assert chain.vault.funds == 0


def test_chain_new_invalid_config():
    config = make_config().model_copy(update={"creator": make_config().t1})
    with pytest.raises(InvalidConfig):
        chain_new(config)


def test_submit_increments_block(chain):
    outcome = chain_submit(chain, OUTSIDER, Deposit(amount=5))
    assert outcome.applied
    assert chain.current_block == 1 and chain.vault.funds == 5
    assert chain.trace.records[0] == TraceRecord(1, OUTSIDER, Deposit(amount=5), outcome)


def test_withdraw_needs_third_following_block(chain):
    chain.submit(OUTSIDER, Deposit(amount=5))
    chain.submit(CREATOR, RequestWithdrawal(amount=2, recipient=PAYEE))
    chain.submit(OUTSIDER, Deposit(amount=0))
    assert chain.submit(OUTSIDER, Withdraw(id=1)).error is ErrorCode.TOO_EARLY
    assert chain.submit(OUTSIDER, Withdraw(id=1)).applied
    assert chain.balances == {PAYEE: 2}
    assert chain.vault.funds == 3
    assert chain.conserved()


def test_advance(chain):
    chain.submit(OUTSIDER, Deposit(amount=5))
    chain.submit(CREATOR, RequestWithdrawal(amount=5, recipient=PAYEE))
    chain_advance(chain, chain.config.delay + 1)
    assert chain.submit(OUTSIDER, Withdraw(id=1)).applied
    assert chain.current_block == 2 + 3 + 1
    assert chain.trace.idle_spans == [(3, 3)]
    with pytest.raises(InvalidConfig):
        chain.advance(0)


def test_identical_configs_give_identical_chains():
    first, second = Chain(make_config(funds=4)), Chain(make_config(funds=4))
    for c in (first, second):
        c.submit(CREATOR, RequestWithdrawal(amount=3, recipient=PAYEE))
        c.advance(10)
    assert first.vault == second.vault
    assert first.current_block == second.current_block == 11


@pytest.mark.parametrize("seed", range(50))
def test_replay_reproduces_random_traces(seed, mode):
    config, trace = random_trace(seed, 60, mode)
    original = chain_replay(config, trace)
    again = chain_replay(config, decode_trace(encode_trace(trace)))
    assert again.vault == original.vault
    assert again.balances == original.balances
    assert again.current_block == trace.end_block
    assert again.conserved()


@pytest.mark.slow
def test_replay_reproduces_many_random_traces(mode):
    for seed in range(1000):
        config, trace = random_trace(seed, 100, mode)
        assert chain_replay(config, trace).conserved()


def test_fixed_trace_diverges_under_legacy():
    chain = Chain(make_config(funds=2))
    chain.submit(CREATOR, RequestWithdrawal(amount=2, recipient=PAYEE))
    chain.submit(CREATOR, RequestWithdrawal(amount=MAX_INT - 1, recipient=PAYEE))
    assert tags(r.outcome for r in chain.trace.records) == ["applied", "rejected:Overflow"]

    legacy = make_config(funds=2, mode=ArithmeticMode.LEGACY)
    with pytest.raises(ReplayDivergence) as exc:
        chain_replay(legacy, chain.trace)
    assert exc.value.block == 2


def test_decreasing_blocks_rejected():
    trace = Trace([TraceRecord(3, OUTSIDER, Deposit(amount=1)), TraceRecord(2, OUTSIDER, Deposit(amount=1))], 3)
    with pytest.raises(ParseError):
        chain_replay(make_config(), trace)


def test_trace_codec_keeps_idle_tail(chain):
    chain.submit(OUTSIDER, Deposit(amount=MAX_INT))
    chain.advance(4)
    encoded = encode_trace(chain.trace)
    assert encoded.splitlines()[-1] == b'{"block":"5","idle":true}'
    assert f'"amount":"{MAX_INT}"'.encode() in encoded
    decoded = decode_trace(encoded)
    assert decoded.end_block == 5
    assert [(r.block, r.sender, r.action, r.outcome.tag()) for r in decoded.records] == [
        (r.block, r.sender, r.action, r.outcome.tag()) for r in chain.trace.records]
    assert encode_trace(decoded) == encoded


@pytest.mark.parametrize("payload", [
    b"not json\n",
    b'{"block":"1","sender":"0x01","action":{"kind":"deposit","amount":"1"}}\n',
    b'{"block":"1","idle":true}\n{"block":"2","sender":"0x' + b"0" * 40 + b'","action":{"kind":"deposit","amount":"1"}}\n',
    b'{"block":"1","sender":"0x' + b"0" * 40 + b'","action":{"kind":"deposit","amount":"-1"}}\n',
])
def test_malformed_traces(payload):
    with pytest.raises(ParseError):
        decode_trace(payload)


def test_snapshot_round_trip():
    chain = Chain(make_config(funds=9))
    chain.submit(CREATOR, RequestWithdrawal(amount=3, recipient=PAYEE))
    chain.submit(CREATOR, RequestWithdrawal(amount=4, recipient=OUTSIDER))
    chain.advance(3)
    chain.submit(OUTSIDER, Withdraw(id=1))
    snapshot = snapshot_chain(chain)
    restored = restore_chain(load_snapshot(dumps(snapshot)))
    assert restored.vault == chain.vault
    assert restored.balances == {PAYEE: 3}
    assert dumps(snapshot_chain(restored)) == dumps(snapshot)
    assert restored.submit(OUTSIDER, Withdraw(id=2)).applied


def test_config_round_trip():
    config = make_config(funds=MAX_INT, mode=ArithmeticMode.LEGACY)
    assert load_config(dumps(config)) == config


def _edited_snapshot(edit) -> bytes:
    chain = Chain(make_config(funds=9))
    chain.submit(CREATOR, RequestWithdrawal(amount=3, recipient=PAYEE))
    chain.submit(CREATOR, RequestWithdrawal(amount=4, recipient=OUTSIDER))
    payload = orjson.loads(dumps(snapshot_chain(chain)))
    edit(payload)
    return orjson.dumps(payload)


def _unknown_engine(payload):
    payload["engine"] = "bogus"


def _overflowing_requests(payload):
    for request in payload["vault"]["ledger"]["requests"]:
        request["amount"] = str(MAX_INT)


@pytest.mark.parametrize("edit", [_unknown_engine, _overflowing_requests])
def test_corrupt_snapshot_is_a_parse_error(edit):
    snapshot = load_snapshot(_edited_snapshot(edit))
    with pytest.raises(ParseError):
        restore_chain(snapshot)


def test_legacy_snapshot_sum_wraps():
    def legacy(payload):
        _overflowing_requests(payload)
        payload["config"]["mode"] = payload["vault"]["mode"] = "legacy"

    restored = restore_chain(load_snapshot(_edited_snapshot(legacy)))
    assert restored.vault.ledger.amount_sum == MAX_INT - 1
