# tests/helpers.py
from phoenix_vault.models.actions import make_address

T1 = make_address(0xA)
CREATOR = make_address(0xB)
OUTSIDER = make_address(0xC)
PAYEE = make_address(0xD)
OTHER_T2 = make_address(0xE)


def tags(outcomes) -> list[str]:
    return [o.tag() for o in outcomes]
