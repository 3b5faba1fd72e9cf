# models/schemas.py
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..config.settings import settings
from ..core.errors import ErrorCode
from ..core.uint256 import ArithmeticMode
from .actions import Action, Address, Uint


class _Wire(BaseModel):
    model_config = ConfigDict(extra="forbid")


# Vault construction
class VaultConfig(_Wire):
    delay: int = Field(ge=1)
    t1: Address
    creator: Address
    max_ledger_size: int = Field(default=settings.MAX_LEDGER_SIZE, ge=1)
    mode: ArithmeticMode = ArithmeticMode(settings.DEFAULT_MODE)
    initial_funds: Uint = 0
    self_address: Address = settings.VAULT_ADDRESS


# Trace file lines
class OutcomeModel(_Wire):
    status: Literal["applied", "rejected"]
    error: Optional[ErrorCode] = None


class TraceRecordModel(_Wire):
    block: Uint
    sender: Address
    action: Action
    outcome: Optional[OutcomeModel] = None


class IdleMarkerModel(_Wire):
    block: Uint
    idle: Literal[True] = True


# Snapshots
class RequestModel(_Wire):
    id: Uint
    amount: Uint
    recipient: Address
    creation: Uint
    initiator: Address


class LedgerModel(_Wire):
    max_size: int
    next_id: Uint
    lastid: Uint
    requests: list[RequestModel] = []


class VaultStateModel(_Wire):
    funds: Uint
    delay: Uint
    t1: list[Address]
    t2: list[Address]
    unlock: Uint
    mode: ArithmeticMode
    self_address: Address
    destroyed: bool = False
    ledger: LedgerModel


class SnapshotModel(_Wire):
    config: VaultConfig
    engine: str = "phoenix"
    current_block: Uint
    deposited: Uint
    balances: dict[Address, Uint] = {}
    vault: VaultStateModel


# Reports
class ViolationModel(_Wire):
    property: str
    layer: str
    description: str
    block: Uint
    state_digest: str
    witness: list[TraceRecordModel]


class PropertyVerdict(_Wire):
    property: str
    layer: str
    description: str
    holds: bool
    violations: int = 0


class ExploreReportModel(_Wire):
    engine: str
    mode: ArithmeticMode
    depth: int
    states_visited: int
    transitions: int
    verdicts: list[PropertyVerdict]
    violations: list[ViolationModel]


class StageModel(_Wire):
    stage: str
    block: Uint
    funds: Uint
    pending_sum: Uint
    note: str = ""


class ScenarioResultModel(_Wire):
    name: str
    mode: ArithmeticMode
    passed: bool
    narrative: list[StageModel]
    violations: list[str]
    failure: Optional[str] = None
