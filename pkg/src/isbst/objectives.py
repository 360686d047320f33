"""Search objectives over Output_9 and the weighted global-ratio fitness.

Each objective produces one raw scalar per candidate. Raw scores are
normalized into [0, 1] against the running per-objective bounds seen so
far in the session ("global ratios"), oriented so that 1 is always best,
then combined as a weighted sum. Weight 0 deselects an objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

MAXIMIZE = "maximize"
MINIMIZE = "minimize"

OBJECTIVE_TAGS = (
    "minimum.min",
    "maximum.max",
    "amplitude",
    "max.increase",
    "max.derivative",
    "min.mean",
    "max.decrease",
)


def _out9(outputs) -> np.ndarray:
    """Accept either a sequence of SignalTraces or a raw [3, T] array."""
    if isinstance(outputs, np.ndarray):
        return np.asarray(outputs[2], dtype=np.float64)
    return np.asarray(outputs[2].samples, dtype=np.float64)


def _diffs(sig: np.ndarray) -> np.ndarray:
    return sig[1:] - sig[:-1] if sig.size >= 2 else np.zeros(0)


def _score_min(outputs, inputs, loop_tm):
    return float(_out9(outputs).min())


def _score_max(outputs, inputs, loop_tm):
    return float(_out9(outputs).max())


def _score_amplitude(outputs, inputs, loop_tm):
    sig = _out9(outputs)
    return float(sig.max() - sig.min())


def _score_increase(outputs, inputs, loop_tm):
    d = _diffs(_out9(outputs))
    return float(d.max()) if d.size else 0.0


def _score_decrease(outputs, inputs, loop_tm):
    d = _diffs(_out9(outputs))
    return float((-d).max()) if d.size else 0.0


def _score_derivative(outputs, inputs, loop_tm):
    d = _diffs(_out9(outputs))
    if not d.size:
        return 0.0
    return float(d.max()) / max(float(loop_tm), 1.0)


def _score_mean(outputs, inputs, loop_tm):
    return float(_out9(outputs).mean())


@dataclass(frozen=True)
class ObjectiveDef:
    tag: str
    direction: str
    scorer: Callable[[object, object, float], float]


OBJECTIVES: dict[str, ObjectiveDef] = {
    "minimum.min": ObjectiveDef("minimum.min", MINIMIZE, _score_min),
    "maximum.max": ObjectiveDef("maximum.max", MAXIMIZE, _score_max),
    "amplitude": ObjectiveDef("amplitude", MAXIMIZE, _score_amplitude),
    "max.increase": ObjectiveDef("max.increase", MAXIMIZE, _score_increase),
    "max.derivative": ObjectiveDef("max.derivative", MAXIMIZE, _score_derivative),
    "min.mean": ObjectiveDef("min.mean", MINIMIZE, _score_mean),
    "max.decrease": ObjectiveDef("max.decrease", MAXIMIZE, _score_decrease),
}

DIRECTIONS = np.array([1 if OBJECTIVES[t].direction == MAXIMIZE else -1 for t in OBJECTIVE_TAGS])


def score_all(defs: Mapping[str, ObjectiveDef] | None, inputs, outputs, loop_tm: float) -> np.ndarray:
    """Raw score vector in OBJECTIVE_TAGS order."""
    defs = defs or OBJECTIVES
    return np.array(
        [defs[tag].scorer(outputs, inputs, loop_tm) for tag in OBJECTIVE_TAGS], dtype=np.float64
    )


def score_batch(outputs: np.ndarray, loop_tm: np.ndarray) -> np.ndarray:
    """Vectorized scoring: outputs[B, 3, T], loop_tm[B] -> raw[B, 7]."""
    sig = outputs[:, 2, :].astype(np.float64)
    batch, ticks = sig.shape
    mn = sig.min(axis=1)
    mx = sig.max(axis=1)
    if ticks >= 2:
        d = sig[:, 1:] - sig[:, :-1]
        inc = d.max(axis=1)
        dec = (-d).max(axis=1)
    else:
        inc = np.zeros(batch)
        dec = np.zeros(batch)
    deriv = inc / np.maximum(np.asarray(loop_tm, dtype=np.float64), 1.0)
    mean = sig.mean(axis=1)
    return np.column_stack([mn, mx, mx - mn, inc, deriv, mean, dec])


@dataclass
class ObjectiveWeights:
    """User-set non-negative weight per objective tag."""

    values: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        merged = {tag: 0.0 for tag in OBJECTIVE_TAGS}
        for tag, w in self.values.items():
            if tag not in OBJECTIVES:
                raise KeyError(f"unknown objective tag {tag!r}")
            w = float(w)
            if w < 0:
                raise ValueError(f"weight for {tag} must be >= 0")
            merged[tag] = w
        self.values = merged

    @classmethod
    def equal(cls, weight: float = 1.0) -> "ObjectiveWeights":
        return cls({tag: weight for tag in OBJECTIVE_TAGS})

    def vector(self) -> np.ndarray:
        return np.array([self.values[tag] for tag in OBJECTIVE_TAGS], dtype=np.float64)

    def to_dict(self) -> dict[str, float]:
        return dict(self.values)


class NormalizationBounds:
    """Running per-objective (min_raw, max_raw) over a whole session.

    Widens monotonically while unfrozen; freezing pins the bounds so the
    oriented ratios (and hence DFF comparisons) become stable.
    """

    def __init__(self, frozen: bool = False):
        self.min_raw: dict[str, float] = {}
        self.max_raw: dict[str, float] = {}
        self.frozen = bool(frozen)

    def update(self, tag: str, raw: float) -> None:
        if self.frozen:
            return
        raw = float(raw)
        if tag not in self.min_raw:
            self.min_raw[tag] = raw
            self.max_raw[tag] = raw
        else:
            if raw < self.min_raw[tag]:
                self.min_raw[tag] = raw
            if raw > self.max_raw[tag]:
                self.max_raw[tag] = raw

    def update_vector(self, raw: Sequence[float]) -> None:
        for tag, value in zip(OBJECTIVE_TAGS, raw):
            self.update(tag, value)

    def span(self, tag: str) -> tuple[float, float]:
        if tag not in self.min_raw:
            return (0.0, 0.0)
        return (self.min_raw[tag], self.max_raw[tag])

    def snapshot(self) -> dict[str, tuple[float, float]]:
        return {tag: self.span(tag) for tag in OBJECTIVE_TAGS if tag in self.min_raw}

    def copy(self) -> "NormalizationBounds":
        dup = NormalizationBounds(frozen=self.frozen)
        dup.min_raw = dict(self.min_raw)
        dup.max_raw = dict(self.max_raw)
        return dup


def oriented_ratio(raw: float, obj: ObjectiveDef, bounds: NormalizationBounds) -> float:
    """Normalize a raw score into [0, 1], 1 being best for the objective."""
    lo, hi = bounds.span(obj.tag)
    if hi == lo:
        return 0.5
    r = (float(raw) - lo) / (hi - lo)
    r = min(1.0, max(0.0, r))  # frozen bounds may be narrower than raw
    return r if obj.direction == MAXIMIZE else 1.0 - r


def ratio_vector(raw: Sequence[float], bounds: NormalizationBounds) -> np.ndarray:
    return np.array(
        [oriented_ratio(r, OBJECTIVES[tag], bounds) for tag, r in zip(OBJECTIVE_TAGS, raw)],
        dtype=np.float64,
    )


def dff(ratios: Sequence[float], weights: ObjectiveWeights | Sequence[float]) -> float:
    """Weighted sum of oriented ratios; higher is better."""
    w = weights.vector() if isinstance(weights, ObjectiveWeights) else np.asarray(weights, float)
    return float(np.dot(np.asarray(ratios, dtype=np.float64), w))
