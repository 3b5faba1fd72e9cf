# core/chain.py
"""Block-numbered environment: one action per block, external balances, full trace."""
import logging
from dataclasses import dataclass, field

from ..models.actions import Action
from ..models.schemas import VaultConfig
from .errors import InvalidConfig, ParseError, ReplayDivergence
from .vault import ActionOutcome, VaultEngine, VaultState, vault_engine, vault_new

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class TraceRecord:
    block: int
    sender: str
    action: Action
    outcome: ActionOutcome | None = None  # None: not recorded (hand-written traces)


@dataclass
class Trace:
    records: list[TraceRecord] = field(default_factory=list)
    end_block: int = 0
    idle_spans: list[tuple[int, int]] = field(default_factory=list)  # (first idle block, count)

    def validate(self):
        previous = 0
        for record in self.records:
            if record.block <= previous:
                raise ParseError(f"block {record.block} does not follow block {previous}")
            previous = record.block
        if self.end_block < previous:
            raise ParseError(f"trace ends at block {self.end_block} before its last record {previous}")

    def __len__(self) -> int:
        return len(self.records)


def vault_from_config(config: VaultConfig) -> VaultState:
    return vault_new(config.delay, config.t1, config.creator, config.max_ledger_size, config.mode,
                     self_address=config.self_address, initial_funds=config.initial_funds)


class Chain:
    def __init__(self, config: VaultConfig, engine: VaultEngine | None = None):
        self.config = config
        self.engine = engine or vault_engine
        self.vault = vault_from_config(config)
        self.current_block = 0
        self.balances: dict[str, int] = {}
        self.deposited = config.initial_funds
        self.trace = Trace()

    def submit(self, sender: str, action: Action) -> ActionOutcome:
        self.current_block += 1
        block = self.current_block
        self.vault, outcome = self.engine.apply(self.vault, block, sender, action)
        if outcome.applied:
            self._settle(outcome)
            if action.kind == "deposit":
                self.deposited += action.amount
        self.trace.records.append(TraceRecord(block, sender, action, outcome))
        self.trace.end_block = block
        return outcome

    def advance(self, n: int):
        if n < 1:
            raise InvalidConfig(f"advance needs a positive block count, got {n}")
        self.trace.idle_spans.append((self.current_block + 1, n))
        self.current_block += n
        self.trace.end_block = self.current_block

    def advance_to(self, block: int):
        """Idle until the next submission lands on ``block``."""
        gap = block - self.current_block - 1
        if gap < 0:
            raise ParseError(f"block {block} is not after block {self.current_block}")
        if gap:
            self.advance(gap)

    def run(self, records: list[TraceRecord], verify: bool = False) -> list[ActionOutcome]:
        """Submit each record at its own block; with ``verify`` recorded outcomes must match."""
        outcomes = []
        for record in records:
            self.advance_to(record.block)
            outcome = self.submit(record.sender, record.action)
            if verify and record.outcome is not None and record.outcome.tag() != outcome.tag():
                logger.warning(f"replay diverged at block {record.block}: "
                               f"recorded {record.outcome.tag()}, got {outcome.tag()}")
                raise ReplayDivergence(
                    f"block {record.block}: {record.action.kind} recorded as {record.outcome.tag()} "
                    f"but replayed as {outcome.tag()}", block=record.block)
            outcomes.append(outcome)
        return outcomes

    def total_credited(self) -> int:
        return sum(self.balances.values())

    def conserved(self) -> bool:
        return self.deposited == self.vault.funds + self.total_credited()

    def _settle(self, outcome: ActionOutcome):
        credited = outcome.effects.credited
        if credited:
            recipient, amount = credited
            self.balances[recipient] = self.balances.get(recipient, 0) + amount


def chain_new(config: VaultConfig, engine: VaultEngine | None = None) -> Chain:
    return Chain(config, engine)


def chain_submit(chain: Chain, sender: str, action: Action) -> ActionOutcome:
    return chain.submit(sender, action)


def chain_advance(chain: Chain, n: int):
    chain.advance(n)


def chain_replay(config: VaultConfig, trace: Trace, engine: VaultEngine | None = None) -> Chain:
    trace.validate()
    chain = Chain(config, engine)
    chain.run(trace.records, verify=True)
    if trace.end_block > chain.current_block:
        chain.advance(trace.end_block - chain.current_block)
    return chain
