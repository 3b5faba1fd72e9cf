# core/errors.py
from enum import Enum


class ErrorCode(str, Enum):
    # Action rejections
    NOT_FOUND = "NotFound"
    UNAUTHORIZED = "Unauthorized"
    NOT_INITIATOR = "NotInitiator"
    TOO_EARLY = "TooEarly"
    LOCKED = "Locked"
    INSUFFICIENT_FUNDS = "InsufficientFunds"
    OVERFLOW = "Overflow"
    LEDGER_FULL = "LedgerFull"
    ALREADY_PRIVILEGED = "AlreadyPrivileged"
    UNLOCK_NOT_INCREASED = "UnlockNotIncreased"
    NON_EMPTY_DESTROY = "NonEmptyDestroy"
    DESTROYED = "Destroyed"
    ZERO_ADDRESS = "ZeroAddress"
    SELF_RECIPIENT = "SelfRecipient"
    ZERO_AMOUNT = "ZeroAmount"

    # Harness failures
    INVALID_CONFIG = "InvalidConfig"
    PARSE_ERROR = "ParseError"
    REPLAY_DIVERGENCE = "ReplayDivergence"
    BUDGET_EXCEEDED = "BudgetExceeded"
    SCENARIO_ASSERTION_FAILED = "ScenarioAssertionFailed"
    INTERNAL_OVERFLOW = "InternalOverflow"


class PhoenixError(Exception):
    """Base error: a machine-readable code plus a human-readable detail."""

    code: ErrorCode = ErrorCode.INVALID_CONFIG

    def __init__(self, detail: str = "", code: ErrorCode | None = None):
        if code is not None:
            self.code = code
        self.detail = detail or self.code.value
        super().__init__(f"{self.code.value}: {self.detail}")


class VaultError(PhoenixError):
    """An action the vault refuses. vault_apply turns these into Rejected outcomes."""

    def __init__(self, code: ErrorCode, detail: str = ""):
        super().__init__(detail, code)


class InvalidConfig(PhoenixError):
    code = ErrorCode.INVALID_CONFIG


class ParseError(PhoenixError):
    code = ErrorCode.PARSE_ERROR


class ReplayDivergence(PhoenixError):
    code = ErrorCode.REPLAY_DIVERGENCE

    def __init__(self, detail: str = "", block: int | None = None):
        self.block = block
        super().__init__(detail)


class BudgetExceeded(PhoenixError):
    code = ErrorCode.BUDGET_EXCEEDED


class ScenarioAssertionFailed(PhoenixError):
    code = ErrorCode.SCENARIO_ASSERTION_FAILED

    def __init__(self, detail: str = "", stage: str | None = None):
        self.stage = stage
        super().__init__(detail)


class InternalOverflow(PhoenixError):
    code = ErrorCode.INTERNAL_OVERFLOW
