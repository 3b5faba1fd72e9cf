# tests/conftest.py
import pytest

from phoenix_vault.core.chain import Chain
from phoenix_vault.core.uint256 import ArithmeticMode
from phoenix_vault.core.vault import vault_new
from phoenix_vault.models.schemas import VaultConfig

from .helpers import CREATOR, T1


@pytest.fixture(params=[ArithmeticMode.FIXED, ArithmeticMode.LEGACY], ids=["fixed", "legacy"])
def mode(request):
    return request.param


@pytest.fixture
def vault():
    """Delay 10, capacity 8, empty, fixed arithmetic."""
    return vault_new(10, T1, CREATOR, 8, ArithmeticMode.FIXED)


def make_config(delay=2, mode=ArithmeticMode.FIXED, funds=0, max_ledger_size=8) -> VaultConfig:
    return VaultConfig(delay=delay, t1=T1, creator=CREATOR, max_ledger_size=max_ledger_size, mode=mode,
                       initial_funds=funds)


@pytest.fixture
def chain():
    return Chain(make_config(delay=2, funds=0))
