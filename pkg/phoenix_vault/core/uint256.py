# core/uint256.py
from enum import Enum

from .errors import ErrorCode, VaultError

MAX_INT = 2**256 - 1
_MODULUS = 2**256


class ArithmeticMode(str, Enum):
    LEGACY = "legacy"  # wraps modulo 2**256, as the unpatched contract did
    FIXED = "fixed"  # detects overflow and rejects


def is_uint256(value: int) -> bool:
    return 0 <= value <= MAX_INT


def wrapping_add(a: int, b: int) -> int:
    return (a + b) % _MODULUS


def wrapping_sub(a: int, b: int) -> int:
    return (a - b) % _MODULUS


def checked_add(a: int, b: int) -> int:
    """Return a + b, raising an Overflow rejection when the sum leaves uint256."""
    c = a + b
    if c > MAX_INT:
        raise VaultError(ErrorCode.OVERFLOW, f"{a} + {b} overflows uint256")
    return c


def mode_add(a: int, b: int, mode: ArithmeticMode) -> int:
    if mode is ArithmeticMode.LEGACY:
        return wrapping_add(a, b)
    return checked_add(a, b)


def mode_sub(a: int, b: int, mode: ArithmeticMode) -> int:
    # Subtracting a previously added amount never underflows in fixed mode.
    if mode is ArithmeticMode.LEGACY:
        return wrapping_sub(a, b)
    return a - b


def mode_sum(values, mode: ArithmeticMode) -> int:
    """Sum as the contract computes it: wrapped in legacy mode, exact otherwise."""
    total = sum(values)
    return total % _MODULUS if mode is ArithmeticMode.LEGACY else total
