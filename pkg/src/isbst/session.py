"""Outer cycle: search sessions, interaction events, exports and replay.

A session owns the population, the running normalization bounds and the
RNG. It advances in segments of n_steps generations; between segments it
is paused and accepts weight changes. The session log captures the config
and the full weight schedule, which is sufficient to replay the search to
a bit-identical final population.
"""

from __future__ import annotations

import csv
import itertools
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
import numpy as np

from . import engine
from .engine import Candidate, DeParams
from .fbd.ramp import RAMP_INPUT_NAMES, RAMP_OUTPUT_NAMES
from .mutation import SutVersion
from .objectives import OBJECTIVE_TAGS, NormalizationBounds, ObjectiveWeights


class SessionError(RuntimeError):
    pass


@dataclass(frozen=True)
class SessionConfig:
    version_id: int = 1
    de: DeParams = field(default_factory=DeParams)
    weights: dict[str, float] | None = None
    n_steps: int = 50
    max_events: int | None = None
    freeze_bounds: bool = False

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")

    @property
    def seed(self) -> int:
        return self.de.seed

    def to_dict(self) -> dict:
        return {
            "version_id": self.version_id,
            "de": {
                "f": self.de.f,
                "cr": self.de.cr,
                "pop_size": self.de.pop_size,
                "trace_len": self.de.trace_len,
                "control_points": self.de.control_points,
                "seed": self.de.seed,
            },
            "weights": dict(self.weights) if self.weights else None,
            "n_steps": self.n_steps,
            "max_events": self.max_events,
            "freeze_bounds": self.freeze_bounds,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SessionConfig":
        de_data = dict(data.get("de", {}))
        if "seed" in data:  # accept a top-level seed alias
            de_data["seed"] = data["seed"]
        return cls(
            version_id=data.get("version_id", 1),
            de=DeParams(**de_data),
            weights=data.get("weights"),
            n_steps=data.get("n_steps", 50),
            max_events=data.get("max_events"),
            freeze_bounds=data.get("freeze_bounds", False),
        )


def _candidate_summary(c: Candidate) -> dict:
    return {
        "cid": c.cid,
        "raw_scores": {tag: float(v) for tag, v in zip(OBJECTIVE_TAGS, c.raw_scores)},
        "ratios": {tag: float(v) for tag, v in zip(OBJECTIVE_TAGS, c.ratios)},
        "dff": float(c.dff),
        "generation": int(c.generation),
        "error": bool(c.error),
    }


@dataclass
class InteractionEvent:
    index: int
    current: list[Candidate]
    previous: list[Candidate]
    bounds: dict[str, tuple[float, float]]
    iterations: int
    evaluations: int
    weights: dict[str, float]

    def payload(self) -> dict:
        best = max((c.dff for c in self.current), default=0.0)
        return {
            "index": self.index,
            "current": [_candidate_summary(c) for c in self.current],
            "previous": [_candidate_summary(c) for c in self.previous],
            "bounds": {tag: list(span) for tag, span in self.bounds.items()},
            "counters": {"iterations": self.iterations, "evaluations": self.evaluations},
            "weights": dict(self.weights),
            "best_dff": float(best),
        }


class Session:
    """One steerable search over one SUT version."""

    def __init__(self, session_id: str, config: SessionConfig, sut: SutVersion):
        if sut.version_id != config.version_id:
            raise SessionError("config/version mismatch")
        self.session_id = session_id
        self.config = config
        self.sut = sut
        self.weights = ObjectiveWeights(config.weights or {tag: 1.0 for tag in OBJECTIVE_TAGS})
        self.bounds = NormalizationBounds(frozen=config.freeze_bounds)
        self.rng = np.random.default_rng(config.seed)
        self._ids = itertools.count()
        self.iterations = 0
        self.evaluations = 0
        self.events: list[InteractionEvent] = []
        self.weight_log: list[dict] = []
        self.stopped = False
        self._busy = False
        self._lock = threading.Lock()

        self.population = engine.init_population(
            config.de, self.rng, sut, self.weights, self.bounds, self._ids, generation=0
        )
        self.evaluations += config.de.pop_size
        self._emit_event(previous=[])

    # -- bookkeeping -----------------------------------------------------

    def _emit_event(self, previous: list[Candidate]) -> InteractionEvent:
        event = InteractionEvent(
            index=len(self.events),
            current=list(self.population),
            previous=previous,
            bounds=self.bounds.snapshot(),
            iterations=self.iterations,
            evaluations=self.evaluations,
            weights=self.weights.to_dict(),
        )
        self.events.append(event)
        return event

    @property
    def last_event(self) -> InteractionEvent:
        return self.events[-1]

    def _require_paused(self, action: str) -> None:
        if self.stopped:
            raise SessionError(f"{action}: session already stopped")
        if self._busy:
            raise SessionError(f"{action}: rejected while a segment is running")

    # -- commands ----------------------------------------------------------

    def set_weights(self, weights: dict[str, float]) -> dict:
        with self._lock:
            self._require_paused("set_weights")
            parsed = ObjectiveWeights(dict(weights))
            self.weights = parsed
            entry = {
                "event_index": self.last_event.index,
                "weights": parsed.to_dict(),
                "timestamp": time.time(),
            }
            self.weight_log.append(entry)
            return parsed.to_dict()

    def run_segment(self) -> InteractionEvent:
        with self._lock:
            self._require_paused("run_segment")
            if self.config.max_events is not None and len(self.events) > self.config.max_events:
                raise SessionError("run_segment: event budget exhausted")
            self._busy = True
        try:
            previous = list(self.population)
            for _ in range(self.config.n_steps):
                self.population, evals = engine.step(
                    self.population, self.weights, self.bounds, self.sut,
                    self.config.de, self.rng, self._ids,
                    generation=self.iterations + 1,
                )
                self.iterations += 1
                self.evaluations += evals
            with self._lock:
                event = self._emit_event(previous=previous)
                return event
        finally:
            self._busy = False

    def _find_candidate(self, cid: int) -> Candidate:
        event = self.last_event
        for c in event.current + event.previous:
            if c.cid == cid:
                return c
        raise SessionError(f"candidate {cid} not in the current or previous snapshot")

    def candidate_detail(self, cid: int) -> dict:
        c = self._find_candidate(cid)
        return {
            "cid": c.cid,
            "inputs": {
                f"Input_{i}": c.inputs[i].tolist() for i in range(7)
            },
            "outputs": {
                f"Output_{7 + j}": c.outputs[j].tolist() for j in range(3)
            },
            "raw_scores": {tag: float(v) for tag, v in zip(OBJECTIVE_TAGS, c.raw_scores)},
            "dff": float(c.dff),
            "generation": int(c.generation),
        }

    def export_candidate(self, cid: int, path: str | Path) -> Path:
        c = self._find_candidate(cid)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                [f"Input_{i}" for i in range(7)] + [f"Output_{7 + j}" for j in range(3)]
            )
            ticks = c.inputs.shape[1]
            for t in range(ticks):
                writer.writerow(
                    [int(c.inputs[i, t]) for i in range(7)]
                    + [int(c.outputs[j, t]) for j in range(3)]
                )
        sidecar = path.with_suffix(path.suffix + ".meta.json")
        sidecar.write_text(json.dumps({
            "session_id": self.session_id,
            "version_id": self.sut.version_id,
            "version_label": self.sut.label,
            "seed": self.config.seed,
            "event_index": self.last_event.index,
            "cid": c.cid,
            "generation": c.generation,
            "raw_scores": {tag: float(v) for tag, v in zip(OBJECTIVE_TAGS, c.raw_scores)},
            "dff": float(c.dff),
            "config": self.config.to_dict(),
            "channel_names": {
                "inputs": list(RAMP_INPUT_NAMES),
                "outputs": list(RAMP_OUTPUT_NAMES),
            },
        }, indent=2))
        return path

    def status(self) -> dict:
        return {
            "session_id": self.session_id,
            "version_id": self.sut.version_id,
            "running": self._busy,
            "stopped": self.stopped,
            "events": len(self.events),
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "weights": self.weights.to_dict(),
            # lets a reloaded UI re-attach and redraw from the last pause
            "last_event": self.last_event.payload(),
        }

    def stop(self) -> dict:
        with self._lock:
            if self._busy:
                raise SessionError("stop: rejected while a segment is running")
            self.stopped = True
            return self.log()

    def log(self) -> dict:
        return {
            "session_id": self.session_id,
            "config": self.config.to_dict(),
            "version_label": self.sut.label,
            "weight_changes": list(self.weight_log),
            "events": [e.payload() for e in self.events],
            "counters": {"iterations": self.iterations, "evaluations": self.evaluations},
            "final_genomes": [c.genome.tolist() for c in self.population],
        }


def replay(log: dict, sut: SutVersion) -> Session:
    """Re-run a session from its log; deterministic given the same SUT."""
    config = SessionConfig.from_dict(log["config"])
    session = Session(log["session_id"] + ".replay", config, sut)
    changes: dict[int, dict[str, float]] = {}
    for entry in log["weight_changes"]:
        changes[entry["event_index"]] = entry["weights"]
    n_segments = len(log["events"]) - 1
    for k in range(n_segments):
        if k in changes:
            session.set_weights(changes[k])
        session.run_segment()
    if n_segments in changes:
        session.set_weights(changes[n_segments])
    return session


def load_config(path: str | Path) -> SessionConfig:
    """Read a session config file (JSON with the SessionConfig fields)."""
    return SessionConfig.from_dict(json.loads(Path(path).read_text()))


def load_exported_csv(path: str | Path) -> tuple[list[list[int]], list[list[int]]]:
    """Read an exported test case back: (input columns, output columns)."""
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))
    body = rows[1:]
    inputs = [[int(r[i]) for r in body] for i in range(7)]
    outputs = [[int(r[7 + j]) for r in body] for j in range(3)]
    return inputs, outputs
