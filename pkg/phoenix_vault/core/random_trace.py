# core/random_trace.py
"""Seeded random vault traces and ledger operation sequences."""
import logging
import random

from ..models.actions import (
    ZERO_ADDRESS, AddT1, AddT2, CancelAllRequests, CancelRequest, CancelSelfRequest, Deposit, Destroy, Lock,
    RemoveT2, RequestWithdrawal, Withdraw, make_address,
)
from ..models.schemas import VaultConfig
from .chain import Chain, Trace
from .uint256 import MAX_INT, ArithmeticMode
from .vault import VaultState

logger = logging.getLogger(__name__)

_KIND_WEIGHTS = {
    "deposit": 4,
    "request": 8,
    "withdraw": 5,
    "cancel_request": 2,
    "cancel_all_requests": 1,
    "cancel_self_request": 2,
    "lock": 2,
    "add_t1": 1,
    "add_t2": 2,
    "remove_t2": 1,
    "destroy": 1,
}


def _amount(rng: random.Random) -> int:
    # Mostly small amounts, now and then one right below the 256-bit ceiling.
    if rng.random() < 0.1:
        return MAX_INT - rng.randint(0, 10)
    return rng.randint(0, 12)


def _request_id(rng: random.Random, state: VaultState) -> int:
    live = [r.id for r in state.ledger.iterate()]
    if live and rng.random() < 0.85:
        return rng.choice(live)
    return rng.randint(1, state.ledger.next_id + 1)


def random_step(rng: random.Random, state: VaultState, block: int, pool: list[str]):
    """One (sender, action) pair, biased toward senders that hold the right tier."""
    kind = rng.choices(list(_KIND_WEIGHTS), weights=list(_KIND_WEIGHTS.values()))[0]
    t1 = sorted(state.t1) or pool
    t2 = sorted(state.t2) or pool
    anyone = rng.choice(pool)
    privileged = rng.choice(t1) if rng.random() < 0.8 else anyone
    operator = rng.choice(t2) if rng.random() < 0.8 else anyone
    target = rng.choice(pool + [ZERO_ADDRESS])
    recipient = rng.choice(pool[2:] + [state.self_address, ZERO_ADDRESS]) if rng.random() < 0.2 else pool[-1]

    if kind == "deposit":
        return anyone, Deposit(amount=_amount(rng))
    if kind == "request":
        return operator, RequestWithdrawal(amount=_amount(rng), recipient=recipient)
    if kind == "withdraw":
        return anyone, Withdraw(id=_request_id(rng, state))
    if kind == "cancel_request":
        return privileged, CancelRequest(id=_request_id(rng, state))
    if kind == "cancel_all_requests":
        return privileged, CancelAllRequests()
    if kind == "cancel_self_request":
        return operator, CancelSelfRequest(id=_request_id(rng, state))
    if kind == "lock":
        near = rng.choice([state.unlock + rng.randint(-1, 2), block + rng.randint(0, 2 * state.delay)])
        return privileged, Lock(new_unlock=max(0, near))
    if kind == "add_t1":
        return privileged, AddT1(address=target)
    if kind == "add_t2":
        return privileged, AddT2(address=target)
    if kind == "remove_t2":
        return privileged, RemoveT2(address=rng.choice(t2 + [target]))
    return privileged, Destroy(beneficiary=pool[-1])


def random_trace(seed: int, length: int = 50, mode: ArithmeticMode = ArithmeticMode.FIXED, delay: int = 3,
                 max_ledger_size: int = 8) -> tuple[VaultConfig, Trace]:
    """Drive a fresh chain with ``length`` random submissions and return its recorded trace."""
    rng = random.Random(seed)
    pool = [make_address(i) for i in range(1, 6)]
    config = VaultConfig(delay=delay, t1=pool[0], creator=pool[1], max_ledger_size=max_ledger_size,
                         mode=mode, initial_funds=rng.randint(0, 20))
    chain = Chain(config)
    for _ in range(length):
        if rng.random() < 0.25:
            chain.advance(rng.randint(1, delay + 1))
        sender, action = random_step(rng, chain.vault, chain.current_block + 1, pool)
        chain.submit(sender, action)
    if rng.random() < 0.3:
        chain.advance(rng.randint(1, delay + 1))
    logger.debug(f"random trace seed={seed}: {len(chain.trace)} records, ends at block {chain.trace.end_block}")
    return config, chain.trace


def random_ledger_ops(rng: random.Random, length: int, initiators: list[str], amount_max: int = 20) -> list[tuple]:
    """
    Ledger operation scripts for differential testing.

    Each entry is one of ``("insert", amount, recipient, initiator, funds)``,
    ``("remove", id)``, ``("get", id)``, ``("cancel_all",)`` or
    ``("remove_by_initiator", initiator)``. Ids are drawn from 1..(number of inserts so
    far + 1), so stale, cancelled and unknown ids all occur.
    """
    ops = []
    inserted = 0
    for _ in range(length):
        roll = rng.random()
        if roll < 0.5:
            amount = MAX_INT - rng.randint(0, amount_max) if rng.random() < 0.05 else rng.randint(0, amount_max)
            funds = None if rng.random() < 0.3 else rng.randint(0, 5 * amount_max)
            ops.append(("insert", amount, initiators[-1], rng.choice(initiators), funds))
            inserted += 1
        elif roll < 0.75:
            ops.append(("remove", rng.randint(1, inserted + 1)))
        elif roll < 0.85:
            ops.append(("get", rng.randint(1, inserted + 1)))
        elif roll < 0.9:
            ops.append(("cancel_all",))
        else:
            ops.append(("remove_by_initiator", rng.choice(initiators)))
    return ops
