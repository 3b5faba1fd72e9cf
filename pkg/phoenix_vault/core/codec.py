# core/codec.py
import logging
from pathlib import Path

import orjson
from pydantic import BaseModel, ValidationError

from ..models.schemas import (
    IdleMarkerModel, LedgerModel, OutcomeModel, RequestModel, SnapshotModel, TraceRecordModel, VaultConfig,
    VaultStateModel,
)
from .chain import Chain, Trace, TraceRecord
from .errors import ParseError, VaultError
from .ledger import Ledger, Request
from .mutants import engine_by_name
from .vault import ActionOutcome, VaultState

logger = logging.getLogger(__name__)

_DUMP_OPTS = orjson.OPT_SORT_KEYS


def dumps(model: BaseModel | dict) -> bytes:
    """Byte-stable JSON: keys sorted, amounts already rendered as decimal strings."""
    payload = model.model_dump(mode="json", exclude_none=True) if isinstance(model, BaseModel) else model
    return orjson.dumps(payload, option=_DUMP_OPTS)


def _load(data: bytes | str, model: type[BaseModel], where: str = ""):
    try:
        return model.model_validate(orjson.loads(data))
    except (orjson.JSONDecodeError, ValidationError) as e:
        raise ParseError(f"{where or model.__name__}: {e}") from e


# ---- Traces ----

def outcome_to_model(outcome: ActionOutcome) -> OutcomeModel:
    if outcome.applied:
        return OutcomeModel(status="applied")
    return OutcomeModel(status="rejected", error=outcome.error)


def outcome_from_model(model: OutcomeModel) -> ActionOutcome:
    if model.status == "applied":
        return ActionOutcome()
    if model.error is None:
        raise ParseError("rejected outcome without an error code")
    return ActionOutcome.rejected(model.error)


def record_to_model(record: TraceRecord) -> TraceRecordModel:
    return TraceRecordModel(
        block=record.block,
        sender=record.sender,
        action=record.action,
        outcome=outcome_to_model(record.outcome) if record.outcome is not None else None,
    )


def record_from_model(model: TraceRecordModel) -> TraceRecord:
    outcome = outcome_from_model(model.outcome) if model.outcome is not None else None
    return TraceRecord(model.block, model.sender, model.action, outcome)


def encode_trace(trace: Trace) -> bytes:
    lines = [dumps(record_to_model(record)) for record in trace.records]
    last = trace.records[-1].block if trace.records else 0
    if trace.end_block > last:
        lines.append(dumps(IdleMarkerModel(block=trace.end_block)))
    return b"".join(line + b"\n" for line in lines)


def decode_trace(data: bytes | str) -> Trace:
    if isinstance(data, str):
        data = data.encode()
    trace = Trace()
    lines = [line for line in data.splitlines() if line.strip()]
    for number, line in enumerate(lines, start=1):
        try:
            raw = orjson.loads(line)
        except orjson.JSONDecodeError as e:
            raise ParseError(f"line {number}: {e}") from e
        if isinstance(raw, dict) and raw.get("idle") is True:
            if number != len(lines):
                raise ParseError(f"line {number}: idle marker must be the last line")
            marker = _load(line, IdleMarkerModel, f"line {number}")
            trace.end_block = marker.block
            continue
        record = record_from_model(_load(line, TraceRecordModel, f"line {number}"))
        trace.records.append(record)
        trace.end_block = record.block
    trace.validate()
    return trace


# ---- Vault state and snapshots ----

def state_to_model(state: VaultState) -> VaultStateModel:
    ledger = state.ledger
    return VaultStateModel(
        funds=state.funds,
        delay=state.delay,
        t1=sorted(state.t1),
        t2=sorted(state.t2),
        unlock=state.unlock,
        mode=state.mode,
        self_address=state.self_address,
        destroyed=state.destroyed,
        ledger=LedgerModel(
            max_size=ledger.max_size,
            next_id=ledger.next_id,
            lastid=ledger.lastid,
            requests=[RequestModel(id=r.id, amount=r.amount, recipient=r.recipient, creation=r.creation,
                                   initiator=r.initiator) for r in ledger.iterate()],
        ),
    )


def state_from_model(model: VaultStateModel) -> VaultState:
    requests = [Request(r.id, r.amount, r.recipient, r.creation, r.initiator) for r in model.ledger.requests]
    try:
        ledger = Ledger.restore(model.ledger.max_size, model.mode, model.ledger.next_id, model.ledger.lastid,
                                requests)
    except VaultError as e:
        raise ParseError(f"ledger: {e.code.value}: {e.detail}") from e
    return VaultState(
        funds=model.funds,
        delay=model.delay,
        t1=frozenset(model.t1),
        t2=frozenset(model.t2),
        unlock=model.unlock,
        ledger=ledger,
        mode=model.mode,
        self_address=model.self_address,
        destroyed=model.destroyed,
    )


def snapshot_chain(chain: Chain) -> SnapshotModel:
    return SnapshotModel(
        config=chain.config,
        engine=chain.engine.name,
        current_block=chain.current_block,
        deposited=chain.deposited,
        balances=dict(sorted(chain.balances.items())),
        vault=state_to_model(chain.vault),
    )


def restore_chain(snapshot: SnapshotModel) -> Chain:
    try:
        engine = engine_by_name(snapshot.engine)
    except KeyError:
        raise ParseError(f"snapshot names unknown engine {snapshot.engine!r}") from None
    chain = Chain(snapshot.config, engine)
    chain.vault = state_from_model(snapshot.vault)
    chain.current_block = snapshot.current_block
    chain.deposited = snapshot.deposited
    chain.balances = dict(snapshot.balances)
    chain.trace.end_block = snapshot.current_block
    return chain


# ---- Files ----

def load_config(data: bytes | str) -> VaultConfig:
    return _load(data, VaultConfig, "vault config")


def load_snapshot(data: bytes | str) -> SnapshotModel:
    return _load(data, SnapshotModel, "snapshot")


def read_bytes(path: str | Path) -> bytes:
    return Path(path).read_bytes()


def write_bytes(path: str | Path, data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    logger.info(f"wrote {len(data)} bytes to {path}")
