# core/mutants.py
"""Deliberately broken engines, each changing a single rule so one property fails."""
from .vault import Tier, VaultEngine


class MatureAtDelay(VaultEngine):
    name = "mature-at-delay"

    def withdraw_matured(self, block, request, delay):
        return block >= request.creation + delay


class CancelOnlyDuringDelay(VaultEngine):
    name = "cancel-only-during-delay"

    def cancel_allowed(self, state, block, request):
        return block <= request.creation + state.delay


class LockBumpsDelay(VaultEngine):
    name = "lock-bumps-delay"

    def next_delay(self, state):
        return state.delay + 1


class RemoveAnyTier(VaultEngine):
    name = "remove-any-tier"

    def remove_t2_target_ok(self, state, address):
        return address in state.t2 or address in state.t1


class DestroyWithFunds(VaultEngine):
    name = "destroy-with-funds"

    def destroyable(self, state):
        return True


class T2IgnoresT1(VaultEngine):
    name = "t2-ignores-t1"

    def t2_candidate_ok(self, state, address):
        return address not in state.t2


class T2AddsT1(VaultEngine):
    name = "t2-adds-t1"

    def may_add_t1(self, tier):
        return tier is not Tier.UNPRIVILEGED


class AnyoneRequests(VaultEngine):
    name = "anyone-requests"

    def may_request(self, tier):
        return True


class CancelForeignRequests(VaultEngine):
    name = "cancel-foreign-requests"

    def owns_request(self, sender, request):
        return True


class WithdrawWhileLocked(VaultEngine):
    name = "withdraw-while-locked"

    def unlocked(self, block, unlock):
        return True


class LockAnyValue(VaultEngine):
    name = "lock-any-value"

    def unlock_increases(self, state, new_unlock):
        return True


class T2Locks(VaultEngine):
    name = "t2-locks"

    def may_lock(self, tier):
        return tier is not Tier.UNPRIVILEGED


class T2RemovesT2(VaultEngine):
    name = "t2-removes-t2"

    def may_remove_t2(self, tier):
        return tier is not Tier.UNPRIVILEGED


class T2AddsT2(VaultEngine):
    name = "t2-adds-t2"

    def may_add_t2(self, tier):
        return tier is not Tier.UNPRIVILEGED


class NoFundsCheck(VaultEngine):
    name = "no-funds-check"

    def admission_funds(self, state):
        return None


class SelfRecipient(VaultEngine):
    name = "self-recipient"

    def recipient_is_self(self, state, recipient):
        return False


class ZeroRecipient(VaultEngine):
    name = "zero-recipient"

    def recipient_is_zero(self, recipient):
        return False


class KeepOrphanRequests(VaultEngine):
    name = "keep-orphan-requests"

    def purge_initiator(self, ledger, address):
        return []


# Property number -> the engine built to violate it.
MUTANTS: dict[str, type[VaultEngine]] = {
    "1.1": MatureAtDelay,
    "1.2": CancelOnlyDuringDelay,
    "1.3": LockBumpsDelay,
    "1.4": RemoveAnyTier,
    "1.5": DestroyWithFunds,
    "2.1": T2IgnoresT1,
    "2.2": T2AddsT1,
    "2.3": AnyoneRequests,
    "2.4": CancelForeignRequests,
    "3.1": WithdrawWhileLocked,
    "3.2": LockAnyValue,
    "3.3": T2Locks,
    "3.4": T2RemovesT2,
    "3.5": T2AddsT2,
    "4.1": NoFundsCheck,
    "4.2": SelfRecipient,
    "4.3": ZeroRecipient,
    "4.4": KeepOrphanRequests,
}


def engine_by_name(name: str) -> VaultEngine:
    """Resolve ``phoenix``, a mutant name, or a property number to an engine instance."""
    if name in ("phoenix", "", None):
        return VaultEngine()
    if name in MUTANTS:
        return MUTANTS[name]()
    for cls in MUTANTS.values():
        if cls.name == name:
            return cls()
    raise KeyError(name)
