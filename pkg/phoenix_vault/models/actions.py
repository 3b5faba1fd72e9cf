# models/actions.py
import re
from typing import Annotated, Literal, Union

from pydantic import AfterValidator, BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, TypeAdapter

from ..core.uint256 import is_uint256

ZERO_ADDRESS = "0x" + "00" * 20
_ADDRESS_RE = re.compile(r"^0x[0-9a-fA-F]{40}$")


def normalize_address(value: str) -> str:
    if not isinstance(value, str) or not _ADDRESS_RE.match(value):
        raise ValueError(f"not a 0x-prefixed 40-hex-digit address: {value!r}")
    return value.lower()


def make_address(label: int) -> str:
    """Deterministic address for small integer labels (tests, explorer universe)."""
    return "0x" + format(label, "040x")


def _parse_uint(value):
    if isinstance(value, bool):
        raise ValueError("booleans are not amounts")
    if isinstance(value, str):
        if not value.isdigit():
            raise ValueError(f"expected a decimal string, got {value!r}")
        value = int(value)
    if not isinstance(value, int) or not is_uint256(value):
        raise ValueError(f"{value!r} is not a uint256")
    return value


Address = Annotated[str, AfterValidator(normalize_address)]
# Amounts, ids and block numbers travel as decimal strings so 256-bit values survive JSON.
Uint = Annotated[int, BeforeValidator(_parse_uint), PlainSerializer(str, return_type=str, when_used="json")]


class _Action(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class Deposit(_Action):
    kind: Literal["deposit"] = "deposit"
    amount: Uint


class RequestWithdrawal(_Action):
    kind: Literal["request"] = "request"
    amount: Uint
    recipient: Address


class Withdraw(_Action):
    kind: Literal["withdraw"] = "withdraw"
    id: Uint


class CancelRequest(_Action):
    kind: Literal["cancel_request"] = "cancel_request"
    id: Uint


class CancelAllRequests(_Action):
    kind: Literal["cancel_all_requests"] = "cancel_all_requests"


class CancelSelfRequest(_Action):
    kind: Literal["cancel_self_request"] = "cancel_self_request"
    id: Uint


class Lock(_Action):
    kind: Literal["lock"] = "lock"
    new_unlock: Uint


class AddT1(_Action):
    kind: Literal["add_t1"] = "add_t1"
    address: Address


class AddT2(_Action):
    kind: Literal["add_t2"] = "add_t2"
    address: Address


class RemoveT2(_Action):
    kind: Literal["remove_t2"] = "remove_t2"
    address: Address


class Destroy(_Action):
    kind: Literal["destroy"] = "destroy"
    beneficiary: Address


Action = Annotated[
    Union[Deposit, RequestWithdrawal, Withdraw, CancelRequest, CancelAllRequests, CancelSelfRequest,
          Lock, AddT1, AddT2, RemoveT2, Destroy],
    Field(discriminator="kind"),
]

ACTION_KINDS = ("deposit", "request", "withdraw", "cancel_request", "cancel_all_requests",
                "cancel_self_request", "lock", "add_t1", "add_t2", "remove_t2", "destroy")

action_adapter = TypeAdapter(Action)


def parse_action(payload: dict | str | bytes) -> Action:
    if isinstance(payload, (str, bytes)):
        return action_adapter.validate_json(payload)
    return action_adapter.validate_python(payload)


def dump_action(action: Action) -> dict:
    return action.model_dump(mode="json")
