"""Process-wide operation counters used by tests and the bench command."""

from __future__ import annotations

from collections import Counter
from contextlib import contextmanager
from typing import Iterator

COUNTERS: Counter = Counter()


def bump(name: str, amount: int = 1) -> None:
    COUNTERS[name] += amount


def snapshot() -> dict:
    return dict(COUNTERS)


def reset() -> None:
    COUNTERS.clear()


@contextmanager
def measure() -> Iterator[Counter]:
    """Collect the counter increments that happen inside the block."""
    before = Counter(COUNTERS)
    delta: Counter = Counter()
    try:
        yield delta
    finally:
        after = Counter(COUNTERS)
        after.subtract(before)
        delta.update({k: v for k, v in after.items() if v})
