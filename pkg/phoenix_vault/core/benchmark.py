# core/benchmark.py
"""Per-operation ledger timings at different sizes, for checking the constant-time claims."""
import logging
import time
from dataclasses import dataclass

import numpy as np

from ..models.actions import make_address
from .ledger import Ledger
from .uint256 import ArithmeticMode

logger = logging.getLogger(__name__)

OPERATIONS = ("insert", "remove", "cancel_all", "remove_by_initiator")

_RECIPIENT = make_address(0xC1)
_BULK = make_address(0xB1)
_TARGET = make_address(0xB2)


@dataclass(frozen=True, slots=True)
class Timing:
    operation: str
    size: int
    median_ns: float
    p90_ns: float
    repetitions: int


def _filled(size: int) -> Ledger:
    ledger = Ledger(size + 1, ArithmeticMode.FIXED)
    for block in range(size):
        ledger.insert(1, _RECIPIENT, block, _BULK, None)
    return ledger


def _sample(operation: str, ledger: Ledger) -> int:
    """Time one call of ``operation`` on a private copy of ``ledger``."""
    ledger = ledger.copy()
    if operation == "insert":
        ledger.remove(ledger.tail)
        start = time.perf_counter_ns()
        ledger.insert(1, _RECIPIENT, 0, _BULK, None)
        return time.perf_counter_ns() - start
    if operation == "remove":
        middle = ledger.lastid + 1 + ledger.size // 2
        start = time.perf_counter_ns()
        ledger.remove(middle)
        return time.perf_counter_ns() - start
    if operation == "cancel_all":
        start = time.perf_counter_ns()
        ledger.cancel_all()
        return time.perf_counter_ns() - start
    if operation == "remove_by_initiator":
        # One matching request at the tail: the walk has to visit every node.
        ledger.remove(ledger.tail)
        ledger.insert(1, _RECIPIENT, 0, _TARGET, None)
        start = time.perf_counter_ns()
        ledger.remove_by_initiator(_TARGET)
        return time.perf_counter_ns() - start
    raise ValueError(f"unknown ledger operation {operation!r}")


def time_operation(operation: str, size: int, repetitions: int = 100) -> Timing:
    ledger = _filled(size)
    samples = np.array([_sample(operation, ledger) for _ in range(repetitions)], dtype=np.float64)
    timing = Timing(operation, size, float(np.median(samples)), float(np.percentile(samples, 90)), repetitions)
    logger.debug(f"{operation} at size {size}: median {timing.median_ns:.0f} ns")
    return timing


def run_benchmark(sizes: tuple[int, ...] = (100, 10_000), repetitions: int = 100,
                  operations: tuple[str, ...] = OPERATIONS) -> list[Timing]:
    timings = [time_operation(op, size, repetitions) for op in operations for size in sizes]
    logger.info(f"benchmarked {len(operations)} operations at sizes {list(sizes)}")
    return timings


def growth_ratios(timings: list[Timing]) -> dict[str, float]:
    """Median cost at the largest size over the smallest, per operation."""
    ratios = {}
    for op in dict.fromkeys(t.operation for t in timings):
        rows = sorted((t for t in timings if t.operation == op), key=lambda t: t.size)
        ratios[op] = rows[-1].median_ns / max(rows[0].median_ns, 1.0)
    return ratios
