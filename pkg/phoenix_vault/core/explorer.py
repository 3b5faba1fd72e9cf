# core/explorer.py
"""
Bounded exhaustive exploration of the vault.

Breadth-first over action sequences, one action (or an idle block) per block, every
transition checked against all properties. States are deduplicated on a canonical
key with relative timing, so a state reached again at a later block with the same
request ages and lock horizon is not expanded twice. Since levels are processed in
order, the first witness found for a property is a shortest one. A later witness of
the same length replaces it when it ends in a withdrawal and the first does not.
"""
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..config.settings import settings
from ..models.actions import (
    ZERO_ADDRESS, AddT1, AddT2, CancelAllRequests, CancelRequest, CancelSelfRequest, Deposit, Destroy, Lock,
    RemoveT2, RequestWithdrawal, Withdraw, make_address,
)
from ..models.schemas import ExploreReportModel, PropertyVerdict, VaultConfig, ViolationModel
from .chain import TraceRecord, vault_from_config
from .codec import dumps, record_to_model
from .errors import BudgetExceeded, InvalidConfig
from .properties import PROPERTIES, Violation, check_state, check_transition
from .uint256 import MAX_INT, ArithmeticMode, is_uint256
from .vault import VaultEngine, VaultState, vault_engine

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExploreConfig:
    address_universe: int = settings.EXPLORE_ADDRESSES
    amount_cap: int = settings.EXPLORE_AMOUNT_CAP
    max_depth: int = settings.EXPLORE_DEPTH
    delay: int = settings.EXPLORE_DELAY
    max_ledger_size: int = settings.EXPLORE_MAX_LEDGER_SIZE
    mode: ArithmeticMode = ArithmeticMode(settings.DEFAULT_MODE)
    initial_funds: int | None = settings.EXPLORE_INITIAL_FUNDS
    state_budget: int = settings.EXPLORE_STATE_BUDGET
    workers: int = settings.EXPLORE_WORKERS
    fail_fast: bool = False
    engine: VaultEngine | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", ArithmeticMode(self.mode))
        if self.address_universe < 3:
            raise InvalidConfig("the address universe needs tier one, the creator and one outsider")
        for name in ("amount_cap", "delay", "max_ledger_size", "state_budget", "workers"):
            if getattr(self, name) < 1:
                raise InvalidConfig(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.max_depth < 0:
            raise InvalidConfig(f"max_depth must be >= 0, got {self.max_depth}")
        if self.initial_funds is not None and not is_uint256(self.initial_funds):
            raise InvalidConfig(f"initial_funds {self.initial_funds} outside uint256")

    @property
    def t1(self) -> str:
        return make_address(1)

    @property
    def creator(self) -> str:
        return make_address(2)

    @property
    def outsiders(self) -> list[str]:
        return [make_address(i) for i in range(3, self.address_universe + 1)]

    def vault_config(self) -> VaultConfig:
        funds = self.amount_cap if self.initial_funds is None else self.initial_funds
        return VaultConfig(delay=self.delay, t1=self.t1, creator=self.creator,
                           max_ledger_size=self.max_ledger_size, mode=self.mode, initial_funds=funds)


@dataclass
class ExploreReport:
    engine: str
    mode: ArithmeticMode
    depth: int
    states_visited: int = 0
    transitions: int = 0
    violations: list[Violation] = field(default_factory=list)
    counts: Counter = field(default_factory=Counter)

    @property
    def ok(self) -> bool:
        return not self.violations

    def violated(self) -> set[str]:
        return {v.property.number for v in self.violations}

    def verdicts(self) -> list[PropertyVerdict]:
        return [PropertyVerdict(property=p.number, layer=p.layer.value, description=p.description,
                                holds=self.counts[p.number] == 0, violations=self.counts[p.number])
                for p in PROPERTIES]

    def to_model(self) -> ExploreReportModel:
        return ExploreReportModel(
            engine=self.engine,
            mode=self.mode,
            depth=self.depth,
            states_visited=self.states_visited,
            transitions=self.transitions,
            verdicts=self.verdicts(),
            violations=[violation_to_model(v) for v in self.violations],
        )


def violation_to_model(violation: Violation) -> ViolationModel:
    return ViolationModel(
        property=violation.property.number,
        layer=violation.property.layer.value,
        description=violation.property.description,
        block=violation.block,
        state_digest=violation.state_digest,
        witness=[record_to_model(r) for r in violation.witness],
    )


# ---- State keys ----

def canonical_key(state: VaultState, block: int) -> tuple:
    horizon = state.delay + 1
    requests = tuple((r.amount, r.recipient, r.initiator, min(block - r.creation, horizon))
                     for r in state.ledger.iterate())
    return (state.funds, state.delay, tuple(sorted(state.t1)), tuple(sorted(state.t2)), state.destroyed,
            max(state.unlock - block, 0), requests)


@dataclass(slots=True)
class _Node:
    state: VaultState
    block: int
    parent: "_Node | None" = None
    record: TraceRecord | None = None  # None: idle block or the root

    def witness(self) -> tuple[TraceRecord, ...]:
        records = []
        node = self
        while node is not None:
            if node.record is not None:
                records.append(node.record)
            node = node.parent
        return tuple(reversed(records))


@dataclass(slots=True)
class _Step:
    record: TraceRecord | None
    post: VaultState
    applied: bool
    violations: list[Violation]


class Explorer:
    def __init__(self, config: ExploreConfig):
        self.config = config
        self.engine = config.engine or vault_engine
        self.claimer = config.outsiders[0]
        self.payee = config.outsiders[-1]
        self.universe = [config.t1, config.creator, *config.outsiders]

    # ---- Action enumeration ----

    def _senders(self, state: VaultState) -> list[str]:
        # Unused outsiders are interchangeable; one stands in for all of them.
        privileged = state.t1 | state.t2
        seen = privileged | {r.initiator for r in state.ledger.iterate()}
        senders = [a for a in self.universe if a in seen]
        spare = next((a for a in self.universe if a not in seen), None)
        if spare is not None:
            senders.append(spare)
        return senders

    def _targets(self, state: VaultState) -> list[str]:
        return [*self._senders(state), ZERO_ADDRESS]

    def _amounts(self) -> list[int]:
        cap = self.config.amount_cap
        return [*range(1, cap + 1), *(MAX_INT - a + 1 for a in range(1, cap + 1))]

    def actions(self, state: VaultState, block: int) -> list[tuple[str, object]]:
        senders = self._senders(state)
        targets = self._targets(state)
        ids = [r.id for r in state.ledger.iterate()]
        unlocks = ([state.unlock - 1] if state.unlock > 0 else []) + [state.unlock + 1, block + state.delay + 2]
        faucet = settings.FAUCET_ADDRESS

        steps = [(faucet, Deposit(amount=a)) for a in range(1, self.config.amount_cap + 1)]
        for sender in senders:
            steps += [(sender, RequestWithdrawal(amount=a, recipient=self.payee)) for a in self._amounts()]
            steps += [(sender, RequestWithdrawal(amount=1, recipient=r)) for r in (state.self_address, ZERO_ADDRESS)]
        steps += [(self.claimer, Withdraw(id=i)) for i in ids]
        for sender in senders:
            steps += [(sender, CancelRequest(id=i)) for i in ids]
            steps += [(sender, CancelSelfRequest(id=i)) for i in ids]
            steps.append((sender, CancelAllRequests()))
            steps += [(sender, Lock(new_unlock=u)) for u in unlocks]
            steps += [(sender, AddT1(address=t)) for t in targets]
            steps += [(sender, AddT2(address=t)) for t in targets]
            steps += [(sender, RemoveT2(address=t)) for t in targets]
            steps.append((sender, Destroy(beneficiary=self.claimer)))
        return steps

    # ---- Expansion ----

    def expand(self, node: _Node) -> list[_Step]:
        """All successors of ``node``; the idle successor comes first."""
        block = node.block + 1
        pre = node.state
        steps = [_Step(None, pre, True, [])]
        for sender, action in self.actions(pre, block):
            post, outcome = self.engine.apply(pre, block, sender, action)
            found = check_transition(pre, block, sender, action, post, outcome)
            if outcome.applied and post is not pre:
                found += check_state(post)
            steps.append(_Step(TraceRecord(block, sender, action, outcome), post, outcome.applied, found))
        return steps

    def run(self) -> ExploreReport:
        config = self.config
        root = _Node(vault_from_config(config.vault_config()), 0)
        report = ExploreReport(engine=self.engine.name, mode=config.mode, depth=0)
        first: dict[str, Violation] = {}
        visited = {canonical_key(root.state, 0)}
        report.states_visited = 1

        for v in check_state(root.state):
            report.counts[v.property.number] += 1
            first.setdefault(v.property.number, v)

        logger.info(f"exploring {self.engine.name} ({config.mode.value}) to depth {config.max_depth}")
        frontier = [root]
        pool = ThreadPoolExecutor(config.workers) if config.workers > 1 else None
        try:
            for depth in range(1, config.max_depth + 1):
                if not frontier:
                    break
                expansions = pool.map(self.expand, frontier) if pool else map(self.expand, frontier)
                frontier = self._merge(frontier, expansions, visited, report, first)
                report.depth = depth
                logger.info(f"depth {depth}: {len(visited)} states, {report.transitions} transitions, "
                            f"{len(first)} properties violated")
                if config.fail_fast and first:
                    break
        finally:
            if pool:
                pool.shutdown()

        report.violations = sorted(first.values(), key=_violation_order)
        logger.info(f"exploration done: {report.states_visited} states, {report.transitions} transitions, "
                    f"violated {sorted(report.violated()) or 'nothing'}")
        return report

    def _merge(self, frontier, expansions, visited, report, first) -> list[_Node]:
        # Sequential and in frontier order, whatever produced the expansions.
        next_frontier = []
        for node, steps in zip(frontier, expansions):
            for step in steps:
                report.transitions += 1
                child = None
                if step.violations:
                    child = _Node(step.post, node.block + 1, node, step.record)
                    for v in step.violations:
                        number = v.property.number
                        report.counts[number] += 1
                        known = first.get(number)
                        if known is None or _pays_out_instead(known, step.record, child):
                            first[number] = Violation(v.property, v.detail, child.block, v.state_digest,
                                                      child.witness())
                if not step.applied or (step.record is not None and step.post is node.state):
                    continue
                key = canonical_key(step.post, node.block + 1)
                if key in visited:
                    continue
                visited.add(key)
                report.states_visited = len(visited)
                if len(visited) > self.config.state_budget:
                    logger.warning(f"state budget {self.config.state_budget} exhausted at depth {report.depth + 1}")
                    raise BudgetExceeded(f"more than {self.config.state_budget} states visited")
                next_frontier.append(child or _Node(step.post, node.block + 1, node, step.record))
        return next_frontier


def _pays_out_instead(known: Violation, record: TraceRecord | None, child: _Node) -> bool:
    """True for a paid-out withdrawal ending a witness as short as ``known``, which ends otherwise."""
    if record is None or not record.outcome.applied or not isinstance(record.action, Withdraw):
        return False
    if known.witness and isinstance(known.witness[-1].action, Withdraw):
        return False
    return len(child.witness()) == len(known.witness)


def _violation_order(violation: Violation):
    encoded = b"".join(dumps(record_to_model(r)) for r in violation.witness)
    return len(violation.witness), encoded, violation.property.number


def explore(config: ExploreConfig) -> ExploreReport:
    return Explorer(config).run()
