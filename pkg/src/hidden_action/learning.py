"""Bounded memory of inferred environment realizations and window-mean beliefs."""

from __future__ import annotations

import math
from collections import deque
from typing import Iterable


def infer_theta_principal(outcome: float, incited_effort: float) -> float:
    """Environment estimate of a principal who only knows the incited effort."""
    return outcome - incited_effort


def infer_theta_agent(outcome: float, exerted_effort: float) -> float:
    return outcome - exerted_effort


def _grow_partials(partials: list[float], x: float) -> None:
    # Shewchuk's exact summation: partials hold non-overlapping components of the sum
    i = 0
    for y in partials:
        if abs(x) < abs(y):
            x, y = y, x
        hi = x + y
        lo = y - (hi - x)
        if lo:
            partials[i] = lo
            i += 1
        x = hi
    partials[i:] = [x]


def parse_capacity(value) -> int | None:
    """Map 'inf', None, math.inf or a positive integer to a capacity."""
    if value is None:
        return None
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "unbounded", "none"):
            return None
        value = int(value)
    if isinstance(value, float):
        if math.isinf(value):
            return None
        if not value.is_integer():
            raise ValueError(f"memory capacity must be an integer, got {value}")
        value = int(value)
    if value < 1:
        raise ValueError(f"memory capacity must be >= 1, got {value}")
    return int(value)


def format_capacity(capacity: int | None) -> str | int:
    return "inf" if capacity is None else capacity


class BoundedMemory:
    """FIFO store of environment estimates; ``capacity=None`` is unbounded.

    The unbounded case keeps an exact running sum, so its belief is the
    correctly rounded mean of everything pushed.
    """

    def __init__(self, capacity: int | None = None, prior: float = 0.0):
        self.capacity = parse_capacity(capacity)
        self.prior = prior
        self.count_seen = 0
        if self.capacity is None:
            self._buffer: deque[float] | list[float] = []
            self._partials: list[float] = []
        else:
            self._buffer = deque(maxlen=self.capacity)

    @property
    def buffer(self) -> list[float]:
        return list(self._buffer)

    def __len__(self) -> int:
        return len(self._buffer)

    def push(self, estimate: float) -> "BoundedMemory":
        self._buffer.append(estimate)
        if self.capacity is None:
            _grow_partials(self._partials, estimate)
        self.count_seen += 1
        return self

    def extend(self, estimates: Iterable[float]) -> "BoundedMemory":
        for e in estimates:
            self.push(e)
        return self

    def belief(self) -> float:
        n = len(self._buffer)
        if n == 0:
            return self.prior
        if self.capacity is None:
            return math.fsum(self._partials) / n
        return math.fsum(self._buffer) / n

    def __repr__(self) -> str:
        return f"BoundedMemory(capacity={format_capacity(self.capacity)}, n={len(self)}, seen={self.count_seen})"
