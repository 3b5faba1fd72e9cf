# tests/test_uint256.py
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phoenix_vault.core.errors import ErrorCode, VaultError
from phoenix_vault.core.uint256 import (
    MAX_INT, ArithmeticMode, checked_add, is_uint256, mode_add, mode_sub, mode_sum, wrapping_add,
)

uint256 = st.integers(min_value=0, max_value=MAX_INT)


def test_bounds():
    assert is_uint256(0) and is_uint256(MAX_INT)
    assert not is_uint256(-1) and not is_uint256(MAX_INT + 1)


def test_wrapping_add_at_the_edge():
    assert wrapping_add(MAX_INT, 1) == 0
    assert wrapping_add(2, MAX_INT - 1) == 0
    assert wrapping_add(MAX_INT, MAX_INT) == MAX_INT - 1


def test_checked_add_rejects_overflow():
    assert checked_add(MAX_INT - 1, 1) == MAX_INT
    with pytest.raises(VaultError) as exc:
        checked_add(MAX_INT, 1)
    assert exc.value.code is ErrorCode.OVERFLOW


@given(uint256, uint256)
def test_modes_agree_without_overflow(a, b):
    if a + b <= MAX_INT:
        assert mode_add(a, b, ArithmeticMode.FIXED) == mode_add(a, b, ArithmeticMode.LEGACY) == a + b
    else:
        assert mode_add(a, b, ArithmeticMode.LEGACY) == a + b - 2**256


@given(uint256, uint256)
def test_sub_undoes_add_in_legacy(a, b):
    assert mode_sub(mode_add(a, b, ArithmeticMode.LEGACY), b, ArithmeticMode.LEGACY) == a


def test_mode_sum():
    values = [2, MAX_INT - 1]
    assert mode_sum(values, ArithmeticMode.LEGACY) == 0
    assert mode_sum(values, ArithmeticMode.FIXED) == MAX_INT + 1
