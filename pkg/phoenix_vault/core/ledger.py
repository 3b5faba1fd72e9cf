# core/ledger.py
"""
Withdrawal-request registry.

A doubly-linked list whose nodes are addressed through an id map, so insertion at
the tail and removal anywhere are O(1). Ids come from an ascending counter; id 0 is
the null link. Cancelling everything is O(1) as well: the list is detached and
``lastid`` is raised to the last id handed out, which hides the stale nodes that are
still sitting in the map.
"""
import logging
from dataclasses import dataclass
from typing import Iterator, NamedTuple

from .errors import ErrorCode, InternalOverflow, InvalidConfig, VaultError
from .uint256 import MAX_INT, ArithmeticMode, checked_add, mode_sub, wrapping_add

logger = logging.getLogger(__name__)

NULL_ID = 0


@dataclass(frozen=True, slots=True)
class Request:
    id: int
    amount: int
    recipient: str
    creation: int
    initiator: str


class _Node(NamedTuple):
    request: Request
    prev: int
    next: int


class Ledger:
    __slots__ = ("head", "tail", "nodes", "next_id", "lastid", "max_size", "size", "amount_sum", "mode")

    def __init__(self, max_size: int, mode: ArithmeticMode = ArithmeticMode.FIXED):
        if max_size < 1:
            raise InvalidConfig(f"ledger max_size must be >= 1, got {max_size}")
        self.max_size = max_size
        self.mode = ArithmeticMode(mode)
        self.head = NULL_ID
        self.tail = NULL_ID
        self.nodes: dict[int, _Node] = {}
        self.next_id = 1
        self.lastid = 0
        self.size = 0
        self.amount_sum = 0

    # ---- Construction ----

    @classmethod
    def restore(cls, max_size: int, mode: ArithmeticMode, next_id: int, lastid: int,
                requests: list[Request]) -> "Ledger":
        """Rebuild a ledger from its live requests in list order (snapshot loading)."""
        ledger = cls(max_size, mode)
        if len(requests) > max_size:
            raise InvalidConfig(f"{len(requests)} requests exceed max_size {max_size}")
        previous = NULL_ID
        for request in requests:
            if not lastid < request.id < next_id or request.id in ledger.nodes:
                raise InvalidConfig(f"request id {request.id} outside ({lastid}, {next_id})")
            ledger.nodes[request.id] = _Node(request, previous, NULL_ID)
            if previous:
                ledger.nodes[previous] = ledger.nodes[previous]._replace(next=request.id)
            else:
                ledger.head = request.id
            previous = request.id
        ledger.tail = previous
        ledger.size = len(requests)
        ledger.next_id = next_id
        ledger.lastid = lastid
        ledger.amount_sum = 0
        for request in requests:
            ledger.amount_sum = (wrapping_add(ledger.amount_sum, request.amount)
                                 if ledger.mode is ArithmeticMode.LEGACY
                                 else checked_add(ledger.amount_sum, request.amount))
        return ledger

    def copy(self) -> "Ledger":
        clone = Ledger.__new__(Ledger)
        clone.max_size = self.max_size
        clone.mode = self.mode
        clone.head = self.head
        clone.tail = self.tail
        clone.nodes = dict(self.nodes)
        clone.next_id = self.next_id
        clone.lastid = self.lastid
        clone.size = self.size
        clone.amount_sum = self.amount_sum
        return clone

    # ---- Operations ----

    def insert(self, amount: int, recipient: str, creation: int, initiator: str,
               funds: int | None) -> int:
        """
        Append a request and return its id.

        Admission compares the running sum plus ``amount`` against ``funds``. In fixed
        mode an overflowing sum is rejected outright; in legacy mode the sum wraps and
        only the wrapped value is compared. ``funds=None`` skips the funds comparison.
        """
        if amount <= 0:
            raise VaultError(ErrorCode.ZERO_AMOUNT, "request amount must be positive")
        if self.size >= self.max_size:
            raise VaultError(ErrorCode.LEDGER_FULL, f"ledger holds {self.size}/{self.max_size} requests")

        if self.mode is ArithmeticMode.LEGACY:
            new_sum = wrapping_add(self.amount_sum, amount)
        else:
            new_sum = checked_add(self.amount_sum, amount)
        if funds is not None and new_sum > funds:
            raise VaultError(ErrorCode.INSUFFICIENT_FUNDS, f"pending sum {new_sum} exceeds funds {funds}")

        if self.next_id >= MAX_INT:
            raise InternalOverflow("request id counter exhausted")

        request_id = self.next_id
        self.nodes[request_id] = _Node(Request(request_id, amount, recipient, creation, initiator),
                                       self.tail, NULL_ID)
        if self.tail:
            self.nodes[self.tail] = self.nodes[self.tail]._replace(next=request_id)
        else:
            self.head = request_id
        self.tail = request_id
        self.next_id += 1
        self.size += 1
        self.amount_sum = new_sum
        logger.debug(f"ledger insert id={request_id} amount={amount} sum={new_sum}")
        return request_id

    def get(self, request_id: int) -> Request:
        node = self._resolve(request_id)
        return node.request

    def contains(self, request_id: int) -> bool:
        return request_id > self.lastid and request_id in self.nodes

    def remove(self, request_id: int) -> Request:
        node = self._resolve(request_id)
        if node.prev:
            self.nodes[node.prev] = self.nodes[node.prev]._replace(next=node.next)
        else:
            self.head = node.next
        if node.next:
            self.nodes[node.next] = self.nodes[node.next]._replace(prev=node.prev)
        else:
            self.tail = node.prev
        del self.nodes[request_id]
        self.size -= 1
        self.amount_sum = mode_sub(self.amount_sum, node.request.amount, self.mode)
        return node.request

    def cancel_all(self) -> int:
        count = self.size
        self.head = NULL_ID
        self.tail = NULL_ID
        self.size = 0
        self.amount_sum = 0
        self.lastid = self.next_id - 1
        return count

    def extract_by_initiator(self, initiator: str) -> list[Request]:
        """Remove every live request made by ``initiator`` in one traversal."""
        removed = []
        current = self.head
        while current:
            node = self.nodes[current]
            if node.request.initiator == initiator:
                removed.append(self.remove(current))
            current = node.next
        return removed

    def remove_by_initiator(self, initiator: str) -> int:
        return len(self.extract_by_initiator(initiator))

    def iterate(self) -> Iterator[Request]:
        current = self.head
        while current:
            node = self.nodes[current]
            yield node.request
            current = node.next

    # ---- Introspection ----

    def requests(self) -> list[Request]:
        return list(self.iterate())

    def structural_errors(self) -> list[str]:
        """Heap-shape invariants checked dynamically: link symmetry, no cycles, size and id bounds."""
        errors = []
        seen = set()
        previous = NULL_ID
        current = self.head
        while current:
            if current in seen:
                errors.append(f"cycle through id {current}")
                break
            seen.add(current)
            node = self.nodes.get(current)
            if node is None:
                errors.append(f"dangling link to id {current}")
                break
            if node.prev != previous:
                errors.append(f"id {current} has prev {node.prev}, expected {previous}")
            if not self.lastid < current < self.next_id:
                errors.append(f"live id {current} outside ({self.lastid}, {self.next_id})")
            previous = current
            current = node.next
        if previous != self.tail:
            errors.append(f"tail is {self.tail}, walk ended at {previous}")
        if len(seen) != self.size:
            errors.append(f"walk visited {len(seen)} nodes, size is {self.size}")
        if self.size > self.max_size:
            errors.append(f"size {self.size} exceeds max_size {self.max_size}")
        return errors

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[Request]:
        return self.iterate()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ledger):
            return NotImplemented
        return (self.max_size, self.mode, self.next_id, self.lastid, self.amount_sum, self.requests()) == (
            other.max_size, other.mode, other.next_id, other.lastid, other.amount_sum, other.requests())

    __hash__ = None

    def __repr__(self) -> str:
        ids = [r.id for r in self.iterate()]
        return f"<Ledger ids={ids} sum={self.amount_sum} lastid={self.lastid} next_id={self.next_id}>"

    # ---- Internals ----

    def _resolve(self, request_id: int) -> _Node:
        if request_id <= self.lastid:
            raise VaultError(ErrorCode.NOT_FOUND, f"request {request_id} was cancelled")
        node = self.nodes.get(request_id)
        if node is None:
            raise VaultError(ErrorCode.NOT_FOUND, f"no request {request_id}")
        return node


def ledger_new(max_size: int, mode: ArithmeticMode) -> Ledger:
    return Ledger(max_size, mode)
