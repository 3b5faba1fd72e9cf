# core/properties.py
"""
The vault's eighteen safety properties as executable checks.

State properties look at one vault state, transition properties at a single
(pre, action, post) step, and trace properties at a whole run; the temporal ones
(delay constant, tier one only grows, unlock only moves later, no outflow while
locked) are checked step by step, which is equivalent because each is a
monotonicity over consecutive states.
"""
import logging
from dataclasses import dataclass
from enum import Enum

from ..models.actions import ZERO_ADDRESS
from ..models.schemas import VaultConfig
from .chain import Trace, TraceRecord, vault_from_config
from .errors import ParseError, VaultError
from .uint256 import mode_sum
from .vault import ActionOutcome, Tier, VaultEngine, VaultState, vault_engine, vault_tier_of

logger = logging.getLogger(__name__)


class Layer(str, Enum):
    BASE = "base"
    KEY_SEPARATION = "key_separation"
    RECOVERY = "recovery"
    TIER1_MINIMIZATION = "tier1_minimization"


@dataclass(frozen=True, slots=True)
class PropertyId:
    layer: Layer
    number: str
    description: str

    def __str__(self) -> str:
        return self.number


PROPERTIES = (
    PropertyId(Layer.BASE, "1.1", "Requests cannot be withdrawn before the delay has passed"),
    PropertyId(Layer.BASE, "1.2", "A tier-one address can cancel any request at any time"),
    PropertyId(Layer.BASE, "1.3", "The delay never changes"),
    PropertyId(Layer.BASE, "1.4", "A tier-one address can never be removed"),
    PropertyId(Layer.BASE, "1.5", "The vault cannot be destroyed unless it is empty"),
    PropertyId(Layer.KEY_SEPARATION, "2.1", "No address holds both tiers"),
    PropertyId(Layer.KEY_SEPARATION, "2.2", "Only tier-one addresses add tier-one addresses"),
    PropertyId(Layer.KEY_SEPARATION, "2.3", "Only tier-two addresses request withdrawals"),
    PropertyId(Layer.KEY_SEPARATION, "2.4", "A tier-two address only removes requests it initiated"),
    PropertyId(Layer.RECOVERY, "3.1", "Money cannot leave while the vault is locked"),
    PropertyId(Layer.RECOVERY, "3.2", "The unlock block can only be postponed"),
    PropertyId(Layer.RECOVERY, "3.3", "Only tier-one addresses lock the vault"),
    PropertyId(Layer.RECOVERY, "3.4", "Only tier-one addresses remove tier-two addresses"),
    PropertyId(Layer.RECOVERY, "3.5", "Only tier-one addresses add tier-two addresses"),
    PropertyId(Layer.TIER1_MINIMIZATION, "4.1", "Funds always cover every pending request"),
    PropertyId(Layer.TIER1_MINIMIZATION, "4.2", "The vault never pays itself"),
    PropertyId(Layer.TIER1_MINIMIZATION, "4.3", "The vault never pays the zero address"),
    PropertyId(Layer.TIER1_MINIMIZATION, "4.4", "Every pending request was initiated by a current tier-two address"),
)

PROPERTY_BY_NUMBER = {p.number: p for p in PROPERTIES}

_TIER1_ONLY = {
    "lock": "3.3",
    "add_t1": "2.2",
    "add_t2": "3.5",
    "remove_t2": "3.4",
    "destroy": "1.5",
    "cancel_request": "2.4",
    "cancel_all_requests": "2.4",
}


@dataclass(frozen=True, slots=True)
class Violation:
    property: PropertyId
    detail: str
    block: int = 0
    state_digest: str = ""
    witness: tuple[TraceRecord, ...] = ()

    def sort_key(self):
        return len(self.witness), self.property.number, self.block


def state_digest(state: VaultState) -> str:
    requests = ",".join(f"{r.id}:{r.amount}->{r.recipient[-4:]}@{r.creation}/{r.initiator[-4:]}"
                        for r in state.ledger.iterate())
    t1 = ",".join(a[-4:] for a in sorted(state.t1))
    t2 = ",".join(a[-4:] for a in sorted(state.t2))
    return (f"funds={state.funds} sum={state.ledger.amount_sum} delay={state.delay} unlock={state.unlock} "
            f"t1=[{t1}] t2=[{t2}] requests=[{requests}]" + (" destroyed" if state.destroyed else ""))


def _violation(number: str, detail: str, block: int = 0, state: VaultState | None = None) -> Violation:
    return Violation(PROPERTY_BY_NUMBER[number], detail, block, state_digest(state) if state is not None else "")


# ---- State properties ----

def check_state(state: VaultState) -> list[Violation]:
    found = []
    both = state.t1 & state.t2
    if both:
        found.append(_violation("2.1", f"{sorted(both)} hold both tiers", state=state))
    requests = list(state.ledger.iterate())
    pending = mode_sum((r.amount for r in requests), state.mode)
    if pending > state.funds:
        found.append(_violation("4.1", f"pending sum {pending} exceeds funds {state.funds}", state=state))
    for r in requests:
        if r.recipient == state.self_address:
            found.append(_violation("4.2", f"request {r.id} pays the vault itself", state=state))
        if r.recipient == ZERO_ADDRESS:
            found.append(_violation("4.3", f"request {r.id} pays the zero address", state=state))
        if r.initiator not in state.t2:
            found.append(_violation("4.4", f"request {r.id} initiated by non-tier-two {r.initiator}", state=state))
    return found


# ---- Transition properties ----

def check_transition(pre: VaultState, block: int, sender: str, action, post: VaultState,
                     outcome: ActionOutcome) -> list[Violation]:
    found = []
    tier = vault_tier_of(pre, sender)

    if not outcome.applied:
        # A tier-one cancel of a live request must never be refused.
        if (action.kind == "cancel_request" and tier is Tier.T1 and not pre.destroyed
                and pre.ledger.contains(action.id)):
            found.append(_violation("1.2", f"tier-one cancel of request {action.id} refused "
                                           f"({outcome.error.value})", block, pre))
        if post is pre:
            return found

    if post.delay != pre.delay:
        found.append(_violation("1.3", f"delay changed {pre.delay} -> {post.delay}", block, post))
    if not pre.t1 <= post.t1:
        found.append(_violation("1.4", f"tier-one lost {sorted(pre.t1 - post.t1)}", block, post))
    if post.unlock < pre.unlock:
        found.append(_violation("3.2", f"unlock moved back {pre.unlock} -> {post.unlock}", block, post))
    if post.funds < pre.funds and block <= pre.unlock:
        found.append(_violation("3.1", f"{pre.funds - post.funds} left while locked until {pre.unlock}",
                                block, post))
    if not outcome.applied:
        return found

    kind = action.kind
    if kind in _TIER1_ONLY and tier is not Tier.T1:
        found.append(_violation(_TIER1_ONLY[kind], f"{kind} applied for {tier.value} sender", block, post))
    if kind == "destroy" and pre.funds != 0:
        found.append(_violation("1.5", f"destroyed while holding {pre.funds}", block, post))
    if kind == "request" and tier is not Tier.T2:
        found.append(_violation("2.3", f"request applied for {tier.value} sender", block, post))
    if kind == "withdraw" and pre.ledger.contains(action.id):
        request = pre.ledger.get(action.id)
        if block <= request.creation + pre.delay:
            found.append(_violation("1.1", f"request {request.id} from block {request.creation} withdrawn at "
                                           f"{block} with delay {pre.delay}", block, post))
    if kind == "cancel_self_request":
        removed = outcome.effects.removed_ids
        foreign = [i for i in removed if pre.ledger.contains(i) and pre.ledger.get(i).initiator != sender]
        if foreign or tier is not Tier.T2:
            found.append(_violation("2.4", f"{tier.value} sender removed requests {list(removed)}", block, post))
    return found


# ---- Trace properties ----

def check_trace(config: VaultConfig, trace: Trace, engine: VaultEngine | None = None,
                first_only: bool = True) -> list[Violation]:
    """
    Re-execute ``trace`` taking recorded outcomes as given and check every step.

    Applied records run through the engine's effects without its guards, so a trace
    that claims an illegal step succeeded is judged on what that step did. Records
    without an outcome are applied normally. Returns the first violation of each
    property unless ``first_only`` is off.
    """
    engine = engine or vault_engine
    trace.validate()
    state = vault_from_config(config)
    prefix: list[TraceRecord] = []
    found: list[Violation] = []
    seen: set[str] = set()

    def collect(violations, block):
        for v in violations:
            if first_only and v.property.number in seen:
                continue
            seen.add(v.property.number)
            found.append(Violation(v.property, v.detail, block, v.state_digest, tuple(prefix)))

    collect(check_state(state), 0)
    for record in trace.records:
        pre = state
        if record.outcome is None:
            post, outcome = engine.apply(pre, record.block, record.sender, record.action)
        elif record.outcome.applied:
            try:
                post, outcome = engine.execute(pre, record.block, record.sender, record.action)
            except VaultError as e:
                raise ParseError(f"block {record.block}: recorded {record.action.kind} cannot have applied "
                                 f"({e.code.value}: {e.detail})") from e
        else:
            post, outcome = pre, record.outcome
        prefix.append(TraceRecord(record.block, record.sender, record.action, outcome))
        collect(check_transition(pre, record.block, record.sender, record.action, post, outcome), record.block)
        if post is not pre:
            collect(check_state(post), record.block)
        state = post

    if found:
        logger.info(f"trace check found {len(found)} violation(s): {sorted({v.property.number for v in found})}")
    return found
