"""Signal kinds and typed traces for the function-block simulator.

External SUT channels are BOOL, U16 or S16. The wider U32/S32 kinds exist
only for internal block ports (e.g. a U16*U16 product); they never appear
on a diagram's external interface.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class SignalKind(enum.Enum):
    BOOL = ("BOOL", 0, 1)
    U16 = ("U16", 0, 65535)
    S16 = ("S16", -32768, 32767)
    U32 = ("U32", 0, 4294967295)
    S32 = ("S32", -2147483648, 2147483647)

    def __init__(self, label: str, lo: int, hi: int):
        self.label = label
        self.lo = lo
        self.hi = hi

    @property
    def is_bool(self) -> bool:
        return self is SignalKind.BOOL

    @property
    def is_numeric(self) -> bool:
        return not self.is_bool

    def saturate(self, value: int) -> int:
        """Clamp an exact integer into this kind's range (never wraps)."""
        if value < self.lo:
            return self.lo
        if value > self.hi:
            return self.hi
        return int(value)

    def contains(self, value: int) -> bool:
        return self.lo <= value <= self.hi

    @classmethod
    def from_label(cls, label: str) -> "SignalKind":
        for kind in cls:
            if kind.label == label:
                return kind
        raise ValueError(f"unknown signal kind {label!r}")


# Channels that may appear on a SUT boundary (Table-1-style interface).
EXTERNAL_KINDS = (SignalKind.BOOL, SignalKind.U16, SignalKind.S16)


class TraceTypeError(TypeError):
    """An input trace does not match the declared channel type or length."""


@dataclass(frozen=True)
class SignalTrace:
    """A fixed-length time series for one SUT channel."""

    channel_id: int
    kind: SignalKind
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.int64)
        if arr.ndim != 1:
            raise TraceTypeError("trace samples must be one-dimensional")
        if arr.size and (arr.min() < self.kind.lo or arr.max() > self.kind.hi):
            raise TraceTypeError(
                f"channel {self.channel_id}: sample out of {self.kind.label} range"
            )
        object.__setattr__(self, "samples", arr)
        arr.setflags(write=False)

    def __len__(self) -> int:
        return int(self.samples.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SignalTrace):
            return NotImplemented
        return (
            self.channel_id == other.channel_id
            and self.kind is other.kind
            and np.array_equal(self.samples, other.samples)
        )

    def __hash__(self):
        return hash((self.channel_id, self.kind, self.samples.tobytes()))

    @classmethod
    def from_values(cls, channel_id: int, kind: SignalKind, values: Sequence[int]) -> "SignalTrace":
        return cls(channel_id, kind, np.asarray(list(values), dtype=np.int64))

    @classmethod
    def constant(cls, channel_id: int, kind: SignalKind, value: int, length: int) -> "SignalTrace":
        return cls(channel_id, kind, np.full(length, int(value), dtype=np.int64))


def random_trace(channel_id: int, kind: SignalKind, length: int, rng: np.random.Generator,
                 reset_bias: float | None = None) -> SignalTrace:
    """Uniform random trace over the kind's full range.

    For BOOL channels an optional bias gives the per-tick probability of
    TRUE (default 0.5).
    """
    if kind.is_bool:
        p = 0.5 if reset_bias is None else reset_bias
        samples = (rng.random(length) < p).astype(np.int64)
    else:
        samples = rng.integers(kind.lo, kind.hi + 1, size=length, dtype=np.int64)
    return SignalTrace(channel_id, kind, samples)
