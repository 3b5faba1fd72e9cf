# core/vault.py
import logging
from dataclasses import dataclass, field, replace
from enum import Enum

from ..config.settings import settings
from ..models.actions import ZERO_ADDRESS, Action
from .errors import ErrorCode, InvalidConfig, VaultError
from .ledger import Ledger, Request
from .uint256 import ArithmeticMode, is_uint256

logger = logging.getLogger(__name__)


class Tier(str, Enum):
    T1 = "T1"
    T2 = "T2"
    UNPRIVILEGED = "Unprivileged"


@dataclass(frozen=True, eq=True)
class VaultState:
    funds: int
    delay: int
    t1: frozenset[str]
    t2: frozenset[str]
    unlock: int
    ledger: Ledger
    mode: ArithmeticMode
    self_address: str
    destroyed: bool = False

    __hash__ = None


@dataclass(frozen=True, slots=True)
class Effects:
    funds_delta: int = 0
    credited: tuple[str, int] | None = None
    created_id: int | None = None
    removed_ids: tuple[int, ...] = ()
    cancelled: int = 0
    tier_changes: tuple[str, ...] = ()
    unlock_change: tuple[int, int] | None = None
    destroyed: bool = False
    beneficiary: str | None = None


@dataclass(frozen=True, slots=True)
class ActionOutcome:
    error: ErrorCode | None = None
    effects: Effects = field(default_factory=Effects)

    @property
    def applied(self) -> bool:
        return self.error is None

    @classmethod
    def rejected(cls, code: ErrorCode) -> "ActionOutcome":
        return cls(error=code)

    def tag(self) -> str:
        return "applied" if self.applied else f"rejected:{self.error.value}"


def vault_new(delay: int, t1_addr: str, creator: str, max_ledger_size: int,
              mode: ArithmeticMode = ArithmeticMode.FIXED, *, self_address: str | None = None,
              initial_funds: int = 0) -> VaultState:
    """Construct a vault: one tier-one address and the creator as the single tier-two address."""
    self_address = self_address or settings.VAULT_ADDRESS
    if delay < 1:
        raise InvalidConfig(f"delay must be a positive block count, got {delay}")
    if t1_addr == creator:
        raise InvalidConfig("tier-one address must differ from the creator")
    if ZERO_ADDRESS in (t1_addr, creator):
        raise InvalidConfig("the zero address cannot hold a tier")
    if self_address in (t1_addr, creator):
        raise InvalidConfig("the vault cannot hold a tier in itself")
    if not is_uint256(initial_funds):
        raise InvalidConfig(f"initial funds {initial_funds} outside uint256")
    return VaultState(
        funds=initial_funds,
        delay=delay,
        t1=frozenset({t1_addr}),
        t2=frozenset({creator}),
        unlock=0,
        ledger=Ledger(max_ledger_size, ArithmeticMode(mode)),
        mode=ArithmeticMode(mode),
        self_address=self_address,
    )


def vault_tier_of(state: VaultState, address: str) -> Tier:
    if address in state.t1:
        return Tier.T1
    if address in state.t2:
        return Tier.T2
    return Tier.UNPRIVILEGED


class VaultEngine:
    """
    The vault's transition rules.

    Every guard the rules rely on is a separate method so a variant engine can
    change exactly one of them (see core/mutants.py). ``apply`` runs guards and
    then effects; ``execute`` runs effects alone, which is how recorded traces are
    re-executed when their outcomes are taken as given.
    """

    name = "phoenix"

    def __init__(self):
        self._steps = {
            "deposit": (self._guard_deposit, self._effect_deposit),
            "request": (self._guard_request, self._effect_request),
            "withdraw": (self._guard_withdraw, self._effect_withdraw),
            "cancel_request": (self._guard_cancel_request, self._effect_cancel_request),
            "cancel_all_requests": (self._guard_cancel_all, self._effect_cancel_all),
            "cancel_self_request": (self._guard_cancel_self, self._effect_cancel_request),
            "lock": (self._guard_lock, self._effect_lock),
            "add_t1": (self._guard_add_t1, self._effect_add_t1),
            "add_t2": (self._guard_add_t2, self._effect_add_t2),
            "remove_t2": (self._guard_remove_t2, self._effect_remove_t2),
            "destroy": (self._guard_destroy, self._effect_destroy),
        }

    # ---- Entry points ----

    def apply(self, state: VaultState, block: int, sender: str, action: Action) -> tuple[VaultState, ActionOutcome]:
        if state.destroyed:
            return state, ActionOutcome.rejected(ErrorCode.DESTROYED)
        guard, effect = self._steps[action.kind]
        try:
            guard(state, block, sender, action)
            post, effects = effect(state, block, sender, action, True)
        except VaultError as e:
            logger.debug(f"block {block}: {action.kind} from {sender} rejected ({e.code.value})")
            return state, ActionOutcome.rejected(e.code)
        return post, ActionOutcome(effects=effects)

    def execute(self, state: VaultState, block: int, sender: str, action: Action) -> tuple[VaultState, ActionOutcome]:
        """Apply ``action``'s effects without its guards. Raises VaultError if the effect is impossible."""
        if state.destroyed:
            raise VaultError(ErrorCode.DESTROYED, "vault is destroyed")
        _, effect = self._steps[action.kind]
        post, effects = effect(state, block, sender, action, False)
        return post, ActionOutcome(effects=effects)

    # ---- Rules ----

    def may_request(self, tier: Tier) -> bool:
        return tier is Tier.T2

    def may_cancel_self(self, tier: Tier) -> bool:
        return tier is Tier.T2

    def may_cancel(self, tier: Tier) -> bool:
        return tier is Tier.T1

    def may_lock(self, tier: Tier) -> bool:
        return tier is Tier.T1

    def may_add_t1(self, tier: Tier) -> bool:
        return tier is Tier.T1

    def may_add_t2(self, tier: Tier) -> bool:
        return tier is Tier.T1

    def may_remove_t2(self, tier: Tier) -> bool:
        return tier is Tier.T1

    def may_destroy(self, tier: Tier) -> bool:
        return tier is Tier.T1

    def withdraw_matured(self, block: int, request: Request, delay: int) -> bool:
        return block > request.creation + delay

    def unlocked(self, block: int, unlock: int) -> bool:
        return block > unlock

    def cancel_allowed(self, state: VaultState, block: int, request: Request) -> bool:
        return True

    def owns_request(self, sender: str, request: Request) -> bool:
        return request.initiator == sender

    def unlock_increases(self, state: VaultState, new_unlock: int) -> bool:
        return new_unlock > state.unlock

    def next_delay(self, state: VaultState) -> int:
        return state.delay

    def t1_candidate_ok(self, state: VaultState, address: str) -> bool:
        return address not in state.t1 and address not in state.t2

    def t2_candidate_ok(self, state: VaultState, address: str) -> bool:
        return address not in state.t1 and address not in state.t2

    def remove_t2_target_ok(self, state: VaultState, address: str) -> bool:
        return address in state.t2

    def destroyable(self, state: VaultState) -> bool:
        return state.funds == 0

    def admission_funds(self, state: VaultState) -> int | None:
        return state.funds

    def recipient_is_self(self, state: VaultState, recipient: str) -> bool:
        return recipient == state.self_address

    def recipient_is_zero(self, recipient: str) -> bool:
        return recipient == ZERO_ADDRESS

    def purge_initiator(self, ledger: Ledger, address: str) -> list[Request]:
        return ledger.extract_by_initiator(address)

    # ---- Guards ----

    def _authorize(self, allowed: bool, sender: str, kind: str):
        if not allowed:
            raise VaultError(ErrorCode.UNAUTHORIZED, f"{sender} may not {kind}")

    def _guard_deposit(self, state, block, sender, action):
        pass

    def _guard_request(self, state, block, sender, action):
        self._authorize(self.may_request(vault_tier_of(state, sender)), sender, "request")
        if action.amount == 0:
            raise VaultError(ErrorCode.ZERO_AMOUNT, "request amount must be positive")
        if self.recipient_is_zero(action.recipient):
            raise VaultError(ErrorCode.ZERO_ADDRESS, "recipient is the zero address")
        if self.recipient_is_self(state, action.recipient):
            raise VaultError(ErrorCode.SELF_RECIPIENT, "recipient is the vault itself")

    def _guard_withdraw(self, state, block, sender, action):
        request = state.ledger.get(action.id)
        if not self.withdraw_matured(block, request, state.delay):
            raise VaultError(ErrorCode.TOO_EARLY, f"block {block} <= {request.creation} + {state.delay}")
        if not self.unlocked(block, state.unlock):
            raise VaultError(ErrorCode.LOCKED, f"block {block} <= unlock {state.unlock}")

    def _guard_cancel_request(self, state, block, sender, action):
        self._authorize(self.may_cancel(vault_tier_of(state, sender)), sender, "cancel requests")
        request = state.ledger.get(action.id)
        if not self.cancel_allowed(state, block, request):
            raise VaultError(ErrorCode.TOO_EARLY, f"request {request.id} can no longer be cancelled")

    def _guard_cancel_all(self, state, block, sender, action):
        self._authorize(self.may_cancel(vault_tier_of(state, sender)), sender, "cancel all requests")

    def _guard_cancel_self(self, state, block, sender, action):
        self._authorize(self.may_cancel_self(vault_tier_of(state, sender)), sender, "cancel own requests")
        request = state.ledger.get(action.id)
        if not self.owns_request(sender, request):
            raise VaultError(ErrorCode.NOT_INITIATOR, f"request {request.id} was initiated by {request.initiator}")

    def _guard_lock(self, state, block, sender, action):
        self._authorize(self.may_lock(vault_tier_of(state, sender)), sender, "lock")
        if not self.unlock_increases(state, action.new_unlock):
            raise VaultError(ErrorCode.UNLOCK_NOT_INCREASED, f"{action.new_unlock} <= unlock {state.unlock}")

    def _check_candidate(self, ok: bool, address: str):
        if address == ZERO_ADDRESS:
            raise VaultError(ErrorCode.ZERO_ADDRESS, "the zero address cannot hold a tier")
        if not ok:
            raise VaultError(ErrorCode.ALREADY_PRIVILEGED, f"{address} already holds a tier")

    def _guard_add_t1(self, state, block, sender, action):
        self._authorize(self.may_add_t1(vault_tier_of(state, sender)), sender, "add tier-one addresses")
        self._check_candidate(self.t1_candidate_ok(state, action.address), action.address)

    def _guard_add_t2(self, state, block, sender, action):
        self._authorize(self.may_add_t2(vault_tier_of(state, sender)), sender, "add tier-two addresses")
        self._check_candidate(self.t2_candidate_ok(state, action.address), action.address)

    def _guard_remove_t2(self, state, block, sender, action):
        self._authorize(self.may_remove_t2(vault_tier_of(state, sender)), sender, "remove tier-two addresses")
        if not self.remove_t2_target_ok(state, action.address):
            raise VaultError(ErrorCode.NOT_FOUND, f"{action.address} is not a tier-two address")

    def _guard_destroy(self, state, block, sender, action):
        self._authorize(self.may_destroy(vault_tier_of(state, sender)), sender, "destroy the vault")
        if not self.destroyable(state):
            raise VaultError(ErrorCode.NON_EMPTY_DESTROY, f"vault still holds {state.funds}")

    # ---- Effects ----

    def _effect_deposit(self, state, block, sender, action, enforce):
        if action.amount == 0:
            return state, Effects()
        if not is_uint256(state.funds + action.amount):
            raise VaultError(ErrorCode.OVERFLOW, "deposit would push funds past uint256")
        return replace(state, funds=state.funds + action.amount), Effects(funds_delta=action.amount)

    def _effect_request(self, state, block, sender, action, enforce):
        ledger = state.ledger.copy()
        funds = self.admission_funds(state) if enforce else None
        request_id = ledger.insert(action.amount, action.recipient, block, sender, funds)
        return replace(state, ledger=ledger), Effects(created_id=request_id)

    def _effect_withdraw(self, state, block, sender, action, enforce):
        request = state.ledger.get(action.id)
        if request.amount > state.funds:
            raise VaultError(ErrorCode.INSUFFICIENT_FUNDS, f"transfer of {request.amount} exceeds funds {state.funds}")
        ledger = state.ledger.copy()
        ledger.remove(request.id)
        post = replace(state, funds=state.funds - request.amount, ledger=ledger)
        return post, Effects(funds_delta=-request.amount, credited=(request.recipient, request.amount),
                             removed_ids=(request.id,))

    def _effect_cancel_request(self, state, block, sender, action, enforce):
        ledger = state.ledger.copy()
        request = ledger.remove(action.id)
        return replace(state, ledger=ledger), Effects(removed_ids=(request.id,))

    def _effect_cancel_all(self, state, block, sender, action, enforce):
        ledger = state.ledger.copy()
        count = ledger.cancel_all()
        return replace(state, ledger=ledger), Effects(cancelled=count)

    def _effect_lock(self, state, block, sender, action, enforce):
        post = replace(state, unlock=action.new_unlock, delay=self.next_delay(state))
        return post, Effects(unlock_change=(state.unlock, action.new_unlock))

    def _effect_add_t1(self, state, block, sender, action, enforce):
        post = replace(state, t1=state.t1 | {action.address})
        return post, Effects(tier_changes=(f"+T1:{action.address}",))

    def _effect_add_t2(self, state, block, sender, action, enforce):
        post = replace(state, t2=state.t2 | {action.address})
        return post, Effects(tier_changes=(f"+T2:{action.address}",))

    def _effect_remove_t2(self, state, block, sender, action, enforce):
        # Strips whatever tier the address holds; the guard restricts this to tier two.
        address = action.address
        ledger = state.ledger.copy()
        purged = self.purge_initiator(ledger, address)
        changes = tuple(f"-{tier}:{address}" for tier, members in (("T1", state.t1), ("T2", state.t2))
                        if address in members)
        post = replace(state, t1=state.t1 - {address}, t2=state.t2 - {address}, ledger=ledger)
        return post, Effects(removed_ids=tuple(r.id for r in purged), tier_changes=changes)

    def _effect_destroy(self, state, block, sender, action, enforce):
        # Whatever is left goes to the beneficiary; the guard makes that nothing.
        post = replace(state, destroyed=True, funds=0)
        credited = (action.beneficiary, state.funds) if state.funds else None
        return post, Effects(funds_delta=-state.funds, credited=credited, destroyed=True,
                             beneficiary=action.beneficiary)


vault_engine = VaultEngine()


def vault_apply(state: VaultState, block: int, sender: str, action: Action,
                engine: VaultEngine | None = None) -> tuple[VaultState, ActionOutcome]:
    return (engine or vault_engine).apply(state, block, sender, action)


def tier_capabilities(engine: VaultEngine | None = None) -> list[dict]:
    """Which tiers may take each privileged step, read off the engine's rules."""
    engine = engine or vault_engine
    rows = [
        ("request a withdrawal", engine.may_request),
        ("cancel any request", engine.may_cancel),
        ("cancel own request", engine.may_cancel_self),
        ("cancel all requests", engine.may_cancel),
        ("lock the vault", engine.may_lock),
        ("add tier-one address", engine.may_add_t1),
        ("add tier-two address", engine.may_add_t2),
        ("remove tier-two address", engine.may_remove_t2),
        ("destroy an empty vault", engine.may_destroy),
    ]
    return [
        {"capability": name, **{tier.value: rule(tier) for tier in Tier}}
        for name, rule in rows
    ]
