# core/scenarios.py
"""
Canned attack and recovery runs.

Each scenario drives a Chain through a scripted sequence of submissions, records a
(funds, pending sum) narrative at its named stages, asserts the outcome the vault is
supposed to produce, and finally property-checks its own trace. A failed expectation
raises ScenarioAssertionFailed naming the stage where the run diverged.
"""
import logging
from dataclasses import dataclass, field

from ..config.settings import settings
from ..models.actions import (
    AddT2, CancelAllRequests, CancelSelfRequest, Deposit, Lock, RemoveT2, RequestWithdrawal, Withdraw,
    make_address,
)
from ..models.schemas import ScenarioResultModel, StageModel, VaultConfig
from .chain import Chain, Trace
from .errors import ErrorCode, InvalidConfig, ParseError, ScenarioAssertionFailed
from .properties import Violation, check_trace
from .uint256 import MAX_INT, ArithmeticMode
from .vault import ActionOutcome

logger = logging.getLogger(__name__)

OWNER_T1 = make_address(0xA1)
OWNER_T2 = make_address(0xB2)
FRESH_T2 = make_address(0xB3)
OWNER_WALLET = make_address(0xC1)
ATTACKER = make_address(0xE1)
ATTACKER_WALLET = make_address(0xE2)
ROGUE_T2 = make_address(0xE3)

APPLIED = "applied"


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    mode: ArithmeticMode = ArithmeticMode(settings.DEFAULT_MODE)
    k: int = 2   # sum pending before the attack, or the attacker's request size
    l: int = 2   # amount claimed by the victim, or the delay-evading request size
    n: int = 1   # repetitions
    delay: int = settings.SCENARIO_DELAY
    funds: int | None = None
    deposits: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", ArithmeticMode(self.mode))
        if min(self.k, self.l, self.n, self.delay) < 1:
            raise InvalidConfig("K, L, n and delay must all be positive")


@dataclass(frozen=True, slots=True)
class Stage:
    stage: str
    block: int
    funds: int
    pending_sum: int
    note: str = ""


@dataclass
class ScenarioResult:
    name: str
    mode: ArithmeticMode
    passed: bool
    config: VaultConfig
    trace: Trace
    narrative: list[Stage] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)
    balances: dict[str, int] = field(default_factory=dict)

    def to_model(self) -> ScenarioResultModel:
        return ScenarioResultModel(
            name=self.name,
            mode=self.mode,
            passed=self.passed,
            narrative=[StageModel(stage=s.stage, block=s.block, funds=s.funds, pending_sum=s.pending_sum,
                                  note=s.note) for s in self.narrative],
            violations=[v.property.number for v in self.violations],
        )


class _Run:
    """A scripted chain plus its stage narrative."""

    def __init__(self, spec: ScenarioSpec):
        self.spec = spec
        self.config = VaultConfig(delay=spec.delay, t1=OWNER_T1, creator=OWNER_T2, mode=spec.mode)
        self.chain = Chain(self.config)
        self.narrative: list[Stage] = []

    @property
    def legacy(self) -> bool:
        return self.spec.mode is ArithmeticMode.LEGACY

    def submit(self, sender: str, action, expect: str | ErrorCode, stage: str) -> ActionOutcome:
        outcome = self.chain.submit(sender, action)
        wanted = APPLIED if expect == APPLIED else f"rejected:{expect.value}"
        if outcome.tag() != wanted:
            self.fail(stage, f"{action.kind} at block {self.chain.current_block} was {outcome.tag()}, "
                             f"expected {wanted}")
        return outcome

    def wait_for_maturity(self):
        self.chain.advance(self.spec.delay)

    def stage(self, label: str, note: str = "", funds: int | None = None, pending: int | None = None):
        vault = self.chain.vault
        self.narrative.append(Stage(label, self.chain.current_block, vault.funds, vault.ledger.amount_sum, note))
        if funds is not None and vault.funds != funds:
            self.fail(label, f"funds {vault.funds}, expected {funds}")
        if pending is not None and vault.ledger.amount_sum != pending:
            self.fail(label, f"pending sum {vault.ledger.amount_sum}, expected {pending}")

    def check(self, condition: bool, stage: str, detail: str):
        if not condition:
            self.fail(stage, detail)

    def fail(self, stage: str, detail: str):
        logger.warning(f"{self.spec.name} ({self.spec.mode.value}) diverged at {stage}: {detail}")
        raise ScenarioAssertionFailed(f"{stage}: {detail}", stage=stage)

    def balance(self, address: str) -> int:
        return self.chain.balances.get(address, 0)

    def finish(self, expected: set[str]) -> ScenarioResult:
        self.check(self.chain.conserved(), "conservation",
                   f"deposited {self.chain.deposited} != funds {self.chain.vault.funds} "
                   f"+ credited {self.chain.total_credited()}")
        violations = check_trace(self.config, self.chain.trace)
        found = {v.property.number for v in violations}
        self.check(found == expected, "properties", f"violated {sorted(found)}, expected {sorted(expected)}")
        logger.info(f"{self.spec.name} ({self.spec.mode.value}) passed with violations {sorted(found)}")
        return ScenarioResult(self.spec.name, self.spec.mode, True, self.config, self.chain.trace,
                              self.narrative, violations, dict(self.chain.balances))


# ---- Overflow attacks ----

def run_dos(spec: ScenarioSpec) -> ScenarioResult:
    """Wrap the pending sum to zero, then let a claim push it just below MAX_INT."""
    funds = 3 if spec.funds is None else spec.funds
    k, l = spec.k, spec.l
    if not l <= k <= funds:
        raise InvalidConfig(f"need L <= K <= funds, got L={l} K={k} funds={funds}")
    run = _Run(spec)

    run.submit(settings.FAUCET_ADDRESS, Deposit(amount=funds), APPLIED, "setup")
    run.submit(OWNER_T1, AddT2(address=ATTACKER), APPLIED, "setup")
    claim = run.submit(OWNER_T2, RequestWithdrawal(amount=l, recipient=OWNER_WALLET), APPLIED, "stage 1")
    if k > l:
        run.submit(OWNER_T2, RequestWithdrawal(amount=k - l, recipient=OWNER_WALLET), APPLIED, "stage 1")
    run.stage("stage 1", f"{k} pending", funds=funds, pending=k)

    pivot = RequestWithdrawal(amount=MAX_INT - k + 1, recipient=ATTACKER_WALLET)
    if run.legacy:
        run.submit(ATTACKER, pivot, APPLIED, "stage 2")
        run.stage("stage 2", "overflowing request accepted", funds=funds, pending=0)
    else:
        run.submit(ATTACKER, pivot, ErrorCode.OVERFLOW, "stage 2")
        run.stage("stage 2", "overflowing request rejected", funds=funds, pending=k)

    run.wait_for_maturity()
    run.submit(OWNER_T2, Withdraw(id=claim.effects.created_id), APPLIED, "stage 3")
    remaining = funds - l
    if run.legacy:
        run.stage("stage 3", f"claim of {l} paid", funds=remaining, pending=MAX_INT - l + 1)
    else:
        run.stage("stage 3", f"claim of {l} paid", funds=remaining, pending=k - l)

    follow_up = RequestWithdrawal(amount=1, recipient=OWNER_WALLET)
    if run.legacy and l > 1:
        run.submit(OWNER_T2, follow_up, ErrorCode.INSUFFICIENT_FUNDS, "follow-up")
        run.stage("follow-up", f"1-coin request refused with {remaining} in the vault")
    elif run.legacy:
        run.stage("follow-up", "sum sits at MAX_INT, above funds; no smaller request exists to refuse")
    else:
        fits = k - l + 1 <= remaining
        run.submit(OWNER_T2, follow_up, APPLIED if fits else ErrorCode.INSUFFICIENT_FUNDS, "follow-up")
        run.stage("follow-up", "1-coin request " + ("accepted" if fits else "refused: vault fully committed"))
    return run.finish({"4.1"} if run.legacy else set())


def run_delay_evasion(spec: ScenarioSpec) -> ScenarioResult:
    """Plant claims that only become payable later, then drain each later deposit at once."""
    funds = 2 if spec.funds is None else spec.funds
    k, l, n = spec.k, spec.l, spec.n
    deposits = spec.deposits or (l,) * n
    if not (k <= funds and l <= funds):
        raise InvalidConfig(f"need K <= funds and L <= funds, got K={k} L={l} funds={funds}")
    if len(deposits) != n or min(deposits) < l:
        raise InvalidConfig(f"need {n} deposits of at least {l}, got {list(deposits)}")
    run = _Run(spec)

    run.submit(settings.FAUCET_ADDRESS, Deposit(amount=funds), APPLIED, "setup")
    run.submit(OWNER_T1, AddT2(address=ATTACKER), APPLIED, "setup")
    victim = run.submit(OWNER_T2, RequestWithdrawal(amount=k, recipient=OWNER_WALLET), APPLIED, "stage 1")
    run.stage("stage 1", f"{k} pending", funds=funds, pending=k)

    if not run.legacy:
        run.submit(ATTACKER, RequestWithdrawal(amount=MAX_INT - k + 1, recipient=ATTACKER_WALLET),
                   ErrorCode.OVERFLOW, "stage 2")
        run.stage("stage 2", "first overflowing request rejected", funds=funds, pending=k)
        return run.finish(set())

    ambush_ids = []
    pending = k
    for rung in range(1, n + 1):
        label = "stage 2" if rung == 1 else f"rung {rung}"
        run.submit(ATTACKER, RequestWithdrawal(amount=MAX_INT - pending + 1, recipient=ATTACKER_WALLET),
                   APPLIED, label)
        run.stage(label, "sum wrapped to zero", funds=funds, pending=0)
        ambush = run.submit(ATTACKER, RequestWithdrawal(amount=l, recipient=ATTACKER_WALLET), APPLIED, label)
        ambush_ids.append(ambush.effects.created_id)
        pending = l
        run.stage("stage 3" if rung == 1 else f"rung {rung}", f"delay-evading request {rung} for {l}",
                  funds=funds, pending=l)

    run.wait_for_maturity()
    run.submit(OWNER_T2, Withdraw(id=victim.effects.created_id), APPLIED, "victim claim")
    run.stage("victim claim", f"victim withdrew {k}", funds=funds - k)

    for rung, (request_id, amount) in enumerate(zip(ambush_ids, deposits), start=1):
        run.submit(settings.FAUCET_ADDRESS, Deposit(amount=amount), APPLIED, f"deposit {rung}")
        deposited_at = run.chain.current_block
        run.submit(ATTACKER, Withdraw(id=request_id), APPLIED, f"drain {rung}")
        run.check(run.chain.current_block == deposited_at + 1, f"drain {rung}", "claim was not immediate")
        run.stage(f"drain {rung}", f"deposit of {amount} claimed in the next block")

    drained = run.balance(ATTACKER_WALLET)
    run.check(drained == n * l, "drained", f"attacker holds {drained}, expected {n * l}")
    return run.finish({"4.1"})


# ---- Recovery flows ----

def run_type2_recovery(spec: ScenarioSpec) -> ScenarioResult:
    """A stolen tier-two key is revoked before its requests mature; a new key takes over."""
    funds = 10 if spec.funds is None else spec.funds
    k, l, n = spec.k, spec.l, spec.n
    if 2 * l > funds or n * k > funds - l:
        raise InvalidConfig(f"funds {funds} cannot cover the legitimate claims and {n} thief requests of {k}")
    run = _Run(spec)

    run.submit(settings.FAUCET_ADDRESS, Deposit(amount=funds), APPLIED, "setup")
    legit = run.submit(OWNER_T2, RequestWithdrawal(amount=l, recipient=OWNER_WALLET), APPLIED, "setup")
    run.wait_for_maturity()
    run.submit(OWNER_T2, Withdraw(id=legit.effects.created_id), APPLIED, "legitimate claim")
    run.stage("legitimate claim", f"owner withdrew {l}", funds=funds - l, pending=0)

    victim = run.submit(OWNER_T2, RequestWithdrawal(amount=l, recipient=OWNER_WALLET), APPLIED, "theft")
    # The thief now signs with the owner's tier-two key.
    run.submit(OWNER_T2, CancelSelfRequest(id=victim.effects.created_id), APPLIED, "theft")
    stolen = [run.submit(OWNER_T2, RequestWithdrawal(amount=k, recipient=ATTACKER_WALLET), APPLIED, "theft")
              .effects.created_id for _ in range(n)]
    first_creation = run.chain.vault.ledger.get(stolen[0]).creation
    run.stage("theft", f"victim request cancelled, {n} thief requests pending", pending=n * k)

    removal = run.submit(OWNER_T1, RemoveT2(address=OWNER_T2), APPLIED, "revocation")
    run.check(run.chain.current_block <= first_creation + spec.delay, "revocation",
              "revocation came after the thief's requests matured")
    run.check(sorted(removal.effects.removed_ids) == sorted(stolen), "revocation",
              f"removed {list(removal.effects.removed_ids)}, expected {stolen}")
    run.check(len(run.chain.vault.ledger) == 0, "revocation", "thief requests survived the revocation")
    run.stage("revocation", f"{len(stolen)} thief requests purged in one action", funds=funds - l, pending=0)

    run.wait_for_maturity()
    for request_id in stolen:
        run.submit(OWNER_T2, Withdraw(id=request_id), ErrorCode.NOT_FOUND, "thief claims")
    run.submit(OWNER_T2, RequestWithdrawal(amount=k, recipient=ATTACKER_WALLET), ErrorCode.UNAUTHORIZED,
               "thief claims")

    run.submit(OWNER_T1, AddT2(address=FRESH_T2), APPLIED, "new key")
    fresh = run.submit(FRESH_T2, RequestWithdrawal(amount=l, recipient=OWNER_WALLET), APPLIED, "new key")
    run.wait_for_maturity()
    run.submit(FRESH_T2, Withdraw(id=fresh.effects.created_id), APPLIED, "new key")
    run.stage("new key", f"replacement key withdrew {l}", funds=funds - 2 * l, pending=0)

    run.check(run.balance(ATTACKER_WALLET) == 0, "outcome", f"attacker holds {run.balance(ATTACKER_WALLET)}")
    run.check(run.balance(OWNER_WALLET) == 2 * l, "outcome", f"owner holds {run.balance(OWNER_WALLET)}")
    return run.finish(set())


def run_type1_lockdown(spec: ScenarioSpec) -> ScenarioResult:
    """Both sides hold the tier-one key; the defender freezes the vault so nobody can move funds."""
    funds = 10 if spec.funds is None else spec.funds
    k = spec.k
    if 2 * k > funds:
        raise InvalidConfig(f"funds {funds} cannot cover two requests of {k}")
    run = _Run(spec)

    run.submit(settings.FAUCET_ADDRESS, Deposit(amount=funds), APPLIED, "setup")
    run.submit(OWNER_T1, AddT2(address=ROGUE_T2), APPLIED, "compromise")
    run.submit(ROGUE_T2, RequestWithdrawal(amount=k, recipient=ATTACKER_WALLET), APPLIED, "compromise")
    run.stage("compromise", "attacker added a rogue tier-two key and requested funds", funds=funds, pending=k)

    cancelled = run.submit(OWNER_T1, CancelAllRequests(), APPLIED, "defence")
    run.check(cancelled.effects.cancelled == 1, "defence", f"cancelled {cancelled.effects.cancelled} requests")
    horizon = run.chain.current_block + 1 + settings.LOCKDOWN_HORIZON
    run.submit(OWNER_T1, Lock(new_unlock=horizon), APPLIED, "defence")
    run.stage("defence", f"all requests cancelled, locked until block {horizon}", funds=funds, pending=0)

    run.submit(OWNER_T1, Lock(new_unlock=horizon - 1), ErrorCode.UNLOCK_NOT_INCREASED, "equilibrium")
    rogue = run.submit(ROGUE_T2, RequestWithdrawal(amount=k, recipient=ATTACKER_WALLET), APPLIED, "equilibrium")
    owner = run.submit(OWNER_T2, RequestWithdrawal(amount=k, recipient=OWNER_WALLET), APPLIED, "equilibrium")
    run.wait_for_maturity()
    run.submit(ROGUE_T2, Withdraw(id=rogue.effects.created_id), ErrorCode.LOCKED, "equilibrium")
    run.submit(OWNER_T2, Withdraw(id=owner.effects.created_id), ErrorCode.LOCKED, "equilibrium")
    run.stage("equilibrium", "every claim refused while locked", funds=funds, pending=2 * k)

    run.check(run.balance(ATTACKER_WALLET) == 0, "outcome", f"attacker holds {run.balance(ATTACKER_WALLET)}")
    return run.finish(set())


def run_tier2_key_loss(spec: ScenarioSpec) -> ScenarioResult:
    """The tier-two key is forgotten; tier one registers a new one which empties the vault safely."""
    funds = 10 if spec.funds is None else spec.funds
    run = _Run(spec)

    run.submit(settings.FAUCET_ADDRESS, Deposit(amount=funds), APPLIED, "setup")
    run.submit(OWNER_T1, AddT2(address=FRESH_T2), APPLIED, "replacement")
    run.submit(OWNER_T1, RemoveT2(address=OWNER_T2), APPLIED, "replacement")
    run.stage("replacement", "lost key revoked, new key registered", funds=funds, pending=0)

    claim = run.submit(FRESH_T2, RequestWithdrawal(amount=funds, recipient=OWNER_WALLET), APPLIED, "rescue")
    run.wait_for_maturity()
    run.submit(FRESH_T2, Withdraw(id=claim.effects.created_id), APPLIED, "rescue")
    run.stage("rescue", "all funds moved to the owner", funds=0, pending=0)
    run.check(run.balance(OWNER_WALLET) == funds, "outcome", f"owner recovered {run.balance(OWNER_WALLET)}")
    return run.finish(set())


def run_tier1_key_loss(spec: ScenarioSpec) -> ScenarioResult:
    """The tier-one key is forgotten; the tier-two key still moves everything out after the delay."""
    funds = 10 if spec.funds is None else spec.funds
    run = _Run(spec)

    run.submit(settings.FAUCET_ADDRESS, Deposit(amount=funds), APPLIED, "setup")
    claim = run.submit(OWNER_T2, RequestWithdrawal(amount=funds, recipient=OWNER_WALLET), APPLIED, "rescue")
    run.wait_for_maturity()
    run.submit(OWNER_T2, Withdraw(id=claim.effects.created_id), APPLIED, "rescue")
    run.stage("rescue", "all funds moved to a vault under new keys", funds=0, pending=0)
    run.check(run.balance(OWNER_WALLET) == funds, "outcome", f"owner recovered {run.balance(OWNER_WALLET)}")
    return run.finish(set())


SCENARIOS = {
    "dos": run_dos,
    "delay-evasion": run_delay_evasion,
    "type2-recovery": run_type2_recovery,
    "type1-lockdown": run_type1_lockdown,
    "tier2-loss": run_tier2_key_loss,
    "tier1-loss": run_tier1_key_loss,
}


def parse_params(text: str) -> dict:
    """``K=2,L=1,n=3,delay=5,funds=4,deposits=2:2:2`` -> ScenarioSpec keyword arguments."""
    params = {}
    for item in filter(None, (part.strip() for part in (text or "").split(","))):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key.lower() not in ("k", "l", "n", "delay", "funds", "deposits"):
            raise ParseError(f"bad scenario parameter {item!r}")
        try:
            if key.lower() == "deposits":
                params["deposits"] = tuple(int(v) for v in value.split(":"))
            else:
                params[key.lower()] = int(value)
        except ValueError as e:
            raise ParseError(f"bad value in {item!r}") from e
    return params


def run_scenario(name: str, mode: ArithmeticMode | str, **params) -> ScenarioResult:
    if name not in SCENARIOS:
        raise ParseError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}")
    return SCENARIOS[name](ScenarioSpec(name=name, mode=ArithmeticMode(mode), **params))
