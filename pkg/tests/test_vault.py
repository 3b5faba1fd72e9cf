# tests/test_vault.py
import pytest

from phoenix_vault.config.settings import settings
from phoenix_vault.core.errors import ErrorCode, InvalidConfig
from phoenix_vault.core.uint256 import MAX_INT, ArithmeticMode
from phoenix_vault.core.vault import Tier, tier_capabilities, vault_apply, vault_new, vault_tier_of
from phoenix_vault.models.actions import (
    ZERO_ADDRESS, AddT1, AddT2, CancelAllRequests, CancelRequest, CancelSelfRequest, Deposit, Destroy, Lock,
    RemoveT2, RequestWithdrawal, Withdraw,
)

from .helpers import CREATOR, OTHER_T2, OUTSIDER, PAYEE, T1


def step(state, block, sender, action):
    return vault_apply(state, block, sender, action)


def funded(state, amount, block=1):
    state, outcome = step(state, block, OUTSIDER, Deposit(amount=amount))
    assert outcome.applied
    return state


def test_vault_new(vault):
    assert vault.t1 == {T1} and vault.t2 == {CREATOR}
    assert vault.funds == 0 and vault.unlock == 0 and len(vault.ledger) == 0
    assert vault_tier_of(vault, T1) is Tier.T1
    assert vault_tier_of(vault, CREATOR) is Tier.T2
    assert vault_tier_of(vault, OUTSIDER) is Tier.UNPRIVILEGED


@pytest.mark.parametrize("args", [
    (10, T1, T1, 8),
    (0, T1, CREATOR, 8),
    (10, ZERO_ADDRESS, CREATOR, 8),
    (10, T1, settings.VAULT_ADDRESS, 8),
    (10, T1, CREATOR, 0),
])
def test_vault_new_rejects_bad_config(args):
    with pytest.raises(InvalidConfig):
        vault_new(*args, ArithmeticMode.FIXED)


@pytest.mark.parametrize("funds", [-1, MAX_INT + 1])
def test_vault_new_funds_outside_uint256(funds):
    with pytest.raises(InvalidConfig):
        vault_new(10, T1, CREATOR, 8, initial_funds=funds)


def test_withdraw_strictly_after_delay(vault):
    state = funded(vault, 5)
    state, outcome = step(state, 5, CREATOR, RequestWithdrawal(amount=5, recipient=PAYEE))
    assert outcome.applied and outcome.effects.created_id == 1
    early, outcome = step(state, 15, OUTSIDER, Withdraw(id=1))
    assert outcome.error is ErrorCode.TOO_EARLY
    assert early is state
    post, outcome = step(state, 16, OUTSIDER, Withdraw(id=1))
    assert outcome.applied
    assert outcome.effects.credited == (PAYEE, 5)
    assert post.funds == 0 and len(post.ledger) == 0


def test_withdraw_blocked_while_locked(vault):
    state = funded(vault, 5)
    state, _ = step(state, 2, CREATOR, RequestWithdrawal(amount=5, recipient=PAYEE))
    state, outcome = step(state, 3, T1, Lock(new_unlock=100))
    assert outcome.applied and state.unlock == 100
    _, outcome = step(state, 90, OUTSIDER, Withdraw(id=1))
    assert outcome.error is ErrorCode.LOCKED
    _, outcome = step(state, 100, OUTSIDER, Withdraw(id=1))
    assert outcome.error is ErrorCode.LOCKED
    _, outcome = step(state, 101, OUTSIDER, Withdraw(id=1))
    assert outcome.applied


def test_deposit_while_locked_and_zero_deposit(vault):
    state, _ = step(vault, 1, T1, Lock(new_unlock=50))
    state, outcome = step(state, 2, OUTSIDER, Deposit(amount=4))
    assert outcome.applied and state.funds == 4
    same, outcome = step(state, 3, OUTSIDER, Deposit(amount=0))
    assert outcome.applied and same is state


def test_deposit_overflow_rejected(vault):
    state = funded(vault, MAX_INT)
    _, outcome = step(state, 2, OUTSIDER, Deposit(amount=1))
    assert outcome.error is ErrorCode.OVERFLOW


def test_t2_cannot_add_t1(vault):
    _, outcome = step(vault, 1, CREATOR, AddT1(address=OUTSIDER))
    assert outcome.error is ErrorCode.UNAUTHORIZED


def test_remove_t2_purges_its_requests(vault):
    state = funded(vault, 10)
    state, _ = step(state, 2, T1, AddT2(address=OTHER_T2))
    state, _ = step(state, 3, OTHER_T2, RequestWithdrawal(amount=1, recipient=PAYEE))
    state, _ = step(state, 4, CREATOR, RequestWithdrawal(amount=1, recipient=PAYEE))
    state, _ = step(state, 5, OTHER_T2, RequestWithdrawal(amount=1, recipient=PAYEE))
    state, outcome = step(state, 6, T1, RemoveT2(address=OTHER_T2))
    assert outcome.applied
    assert sorted(outcome.effects.removed_ids) == [1, 3]
    assert [r.id for r in state.ledger.iterate()] == [2]
    assert vault_tier_of(state, OTHER_T2) is Tier.UNPRIVILEGED


def test_lock_must_increase(vault):
    state, _ = step(vault, 1, T1, Lock(new_unlock=80))
    after, outcome = step(state, 2, T1, Lock(new_unlock=50))
    assert outcome.error is ErrorCode.UNLOCK_NOT_INCREASED
    assert after is state
    _, outcome = step(state, 3, T1, Lock(new_unlock=80))
    assert outcome.error is ErrorCode.UNLOCK_NOT_INCREASED


def test_destroy_requires_empty_vault(vault):
    state = funded(vault, 3)
    _, outcome = step(state, 2, T1, Destroy(beneficiary=PAYEE))
    assert outcome.error is ErrorCode.NON_EMPTY_DESTROY
    gone, outcome = step(vault, 2, T1, Destroy(beneficiary=PAYEE))
    assert outcome.applied and outcome.effects.beneficiary == PAYEE and outcome.effects.credited is None
    _, outcome = step(gone, 3, OUTSIDER, Deposit(amount=1))
    assert outcome.error is ErrorCode.DESTROYED


@pytest.mark.parametrize("recipient, code", [
    (settings.VAULT_ADDRESS, ErrorCode.SELF_RECIPIENT),
    (ZERO_ADDRESS, ErrorCode.ZERO_ADDRESS),
])
def test_request_recipient_checks(vault, recipient, code):
    state = funded(vault, 3)
    _, outcome = step(state, 2, CREATOR, RequestWithdrawal(amount=1, recipient=recipient))
    assert outcome.error is code


def test_request_authorization_and_amounts(vault):
    state = funded(vault, 3)
    for sender in (T1, OUTSIDER):
        _, outcome = step(state, 2, sender, RequestWithdrawal(amount=1, recipient=PAYEE))
        assert outcome.error is ErrorCode.UNAUTHORIZED
    _, outcome = step(state, 2, CREATOR, RequestWithdrawal(amount=0, recipient=PAYEE))
    assert outcome.error is ErrorCode.ZERO_AMOUNT
    _, outcome = step(state, 2, CREATOR, RequestWithdrawal(amount=4, recipient=PAYEE))
    assert outcome.error is ErrorCode.INSUFFICIENT_FUNDS


def test_cancel_self_only_own_requests(vault):
    state = funded(vault, 4)
    state, _ = step(state, 2, T1, AddT2(address=OTHER_T2))
    state, _ = step(state, 3, CREATOR, RequestWithdrawal(amount=1, recipient=PAYEE))
    _, outcome = step(state, 4, OTHER_T2, CancelSelfRequest(id=1))
    assert outcome.error is ErrorCode.NOT_INITIATOR
    _, outcome = step(state, 4, T1, CancelSelfRequest(id=1))
    assert outcome.error is ErrorCode.UNAUTHORIZED
    post, outcome = step(state, 4, CREATOR, CancelSelfRequest(id=1))
    assert outcome.applied and len(post.ledger) == 0


def test_t1_cancels_at_any_time(vault):
    state = funded(vault, 4)
    state, _ = step(state, 2, CREATOR, RequestWithdrawal(amount=1, recipient=PAYEE))
    state, _ = step(state, 3, CREATOR, RequestWithdrawal(amount=1, recipient=PAYEE))
    post, outcome = step(state, 500, T1, CancelRequest(id=2))
    assert outcome.applied and [r.id for r in post.ledger.iterate()] == [1]
    post, outcome = step(state, 500, T1, CancelAllRequests())
    assert outcome.applied and outcome.effects.cancelled == 2
    _, outcome = step(post, 501, T1, CancelRequest(id=1))
    assert outcome.error is ErrorCode.NOT_FOUND


def test_tier_additions(vault):
    state, outcome = step(vault, 1, T1, AddT1(address=OUTSIDER))
    assert outcome.applied and vault_tier_of(state, OUTSIDER) is Tier.T1
    _, outcome = step(state, 2, T1, AddT2(address=OUTSIDER))
    assert outcome.error is ErrorCode.ALREADY_PRIVILEGED
    _, outcome = step(state, 2, T1, AddT2(address=ZERO_ADDRESS))
    assert outcome.error is ErrorCode.ZERO_ADDRESS
    _, outcome = step(state, 2, T1, RemoveT2(address=OUTSIDER))
    assert outcome.error is ErrorCode.NOT_FOUND
    _, outcome = step(state, 2, T1, RemoveT2(address=PAYEE))
    assert outcome.error is ErrorCode.NOT_FOUND


def test_rejection_leaves_state_untouched(vault):
    state = funded(vault, 2)
    state, _ = step(state, 2, CREATOR, RequestWithdrawal(amount=2, recipient=PAYEE))
    for sender, action in [
        (OUTSIDER, Withdraw(id=1)),
        (OUTSIDER, Withdraw(id=9)),
        (CREATOR, RequestWithdrawal(amount=1, recipient=PAYEE)),
        (CREATOR, Lock(new_unlock=5)),
        (T1, Destroy(beneficiary=PAYEE)),
    ]:
        post, outcome = step(state, 3, sender, action)
        assert not outcome.applied
        assert post is state
    assert len(state.ledger) == 1 and state.funds == 2


def test_tier_capabilities_table():
    rows = {row["capability"]: row for row in tier_capabilities()}
    assert rows["request a withdrawal"] == {"capability": "request a withdrawal", "T1": False, "T2": True,
                                            "Unprivileged": False}
    assert rows["lock the vault"]["T1"] and not rows["lock the vault"]["T2"]
    assert not any(row["Unprivileged"] for row in rows.values())
