"""Differential evolution inner cycle: rand/1/bin over [0,1] genomes.

A genome is 5 configuration genes (LoopTm, Range, DecTm, IncTm, ResetVal)
followed by two blocks of C control points (Reset, Input) that expand to
trace length T by zero-order hold. All operators clamp genes to [0,1].
Selection, bounds updates and RNG draws happen in a fixed candidate order,
so results do not depend on how the SUT executions are batched.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .fbd import SignalKind, SignalTrace, execute_batch
from .fbd.ramp import RAMP_INPUT_KINDS
from .objectives import (
    NormalizationBounds,
    ObjectiveWeights,
    dff,
    ratio_vector,
    score_batch,
)

_U16_MAX = 65535
_S16_MIN = -32768


@dataclass(frozen=True)
class DeParams:
    f: float = 0.7
    cr: float = 0.5
    pop_size: int = 50
    trace_len: int = 50
    control_points: int = 10
    seed: int = 1

    def __post_init__(self):
        if not 0.0 < self.f <= 2.0:
            raise ValueError("F must be in (0, 2]")
        if not 0.0 <= self.cr <= 1.0:
            raise ValueError("cr must be in [0, 1]")
        if self.pop_size < 4:
            raise ValueError("pop_size must be >= 4")
        if self.trace_len < 1 or self.control_points < 1:
            raise ValueError("trace_len and control_points must be >= 1")

    @property
    def genome_dim(self) -> int:
        return 5 + 2 * self.control_points


@dataclass
class Candidate:
    cid: int
    genome: np.ndarray
    inputs: np.ndarray  # int64[7, T]
    outputs: np.ndarray  # int64[3, T]
    raw_scores: np.ndarray  # float64[7]
    ratios: np.ndarray  # oriented ratios under the recorded bounds
    dff: float
    generation: int
    error: bool = False

    def input_traces(self) -> tuple[SignalTrace, ...]:
        return tuple(
            SignalTrace(i, kind, self.inputs[i]) for i, kind in enumerate(RAMP_INPUT_KINDS)
        )

    def output_traces(self) -> tuple[SignalTrace, ...]:
        kinds = (SignalKind.BOOL, SignalKind.BOOL, SignalKind.S16)
        return tuple(SignalTrace(7 + j, kind, self.outputs[j]) for j, kind in enumerate(kinds))


def decode_batch(genomes: np.ndarray, params: DeParams) -> np.ndarray:
    """Genomes[B, D] in [0,1] -> input traces int64[B, 7, T]."""
    genomes = np.asarray(genomes, dtype=np.float64)
    batch = genomes.shape[0]
    ticks, points = params.trace_len, params.control_points
    arr = np.empty((batch, 7, ticks), dtype=np.int64)

    u16 = lambda g: np.rint(g * _U16_MAX).astype(np.int64)
    s16 = lambda g: np.rint(_S16_MIN + g * _U16_MAX).astype(np.int64)

    arr[:, 0, :] = np.maximum(u16(genomes[:, 0]), 1)[:, None]  # LoopTm >= 1
    arr[:, 2, :] = s16(genomes[:, 4])[:, None]  # ResetVal
    arr[:, 3, :] = u16(genomes[:, 1])[:, None]  # Range
    arr[:, 4, :] = u16(genomes[:, 2])[:, None]  # DecTm
    arr[:, 5, :] = u16(genomes[:, 3])[:, None]  # IncTm

    seg = math.ceil(ticks / points)
    hold = np.minimum(np.arange(ticks) // seg, points - 1)
    reset_pts = (genomes[:, 5:5 + points] >= 0.5).astype(np.int64)
    input_pts = s16(genomes[:, 5 + points:5 + 2 * points])
    arr[:, 1, :] = reset_pts[:, hold]
    arr[:, 6, :] = input_pts[:, hold]
    return arr


def decode(genome: np.ndarray, params: DeParams) -> tuple[SignalTrace, ...]:
    """Decode one genome to the 7 typed input traces."""
    arr = decode_batch(np.asarray(genome, dtype=np.float64)[None, :], params)[0]
    return tuple(SignalTrace(i, kind, arr[i]) for i, kind in enumerate(RAMP_INPUT_KINDS))


def mutate(genomes: np.ndarray, j: int, f: float, rng: np.random.Generator) -> np.ndarray:
    """rand/1 donor: x_r1 + F*(x_r2 - x_r3), clamped to [0,1]."""
    pop = genomes.shape[0]
    picks: list[int] = []
    while len(picks) < 3:
        r = int(rng.integers(0, pop))
        if r != j and r not in picks:
            picks.append(r)
    r1, r2, r3 = picks
    v = genomes[r1] + f * (genomes[r2] - genomes[r3])
    return np.clip(v, 0.0, 1.0)


def crossover(target: np.ndarray, mutant: np.ndarray, cr: float,
              rng: np.random.Generator) -> np.ndarray:
    """Binomial crossover; the forced gene guarantees >= 1 donor gene."""
    dim = target.shape[0]
    u = rng.random(dim)
    j_rand = int(rng.integers(0, dim))
    take = u < cr
    take[j_rand] = True
    return np.where(take, mutant, target)


def _evaluate(genomes: np.ndarray, diagram, params: DeParams):
    """Decode + execute + score a batch; per-candidate error isolation."""
    batch = genomes.shape[0]
    inputs = decode_batch(genomes, params)
    try:
        outputs = execute_batch(diagram, inputs)
        raws = score_batch(outputs, inputs[:, 0, 0])
        errors = np.zeros(batch, dtype=bool)
    except Exception:
        outputs = np.zeros((batch, 3, params.trace_len), dtype=np.int64)
        raws = np.zeros((batch, 7))
        errors = np.ones(batch, dtype=bool)
        for b in range(batch):
            try:
                outputs[b] = execute_batch(diagram, inputs[b:b + 1])[0]
                raws[b] = score_batch(outputs[b:b + 1], inputs[b:b + 1, 0, 0])[0]
                errors[b] = False
            except Exception:
                pass
    return inputs, outputs, raws, errors


def _sut_diagram(sut):
    return getattr(sut, "diagram", sut)


def init_population(params: DeParams, rng: np.random.Generator, sut,
                    weights: ObjectiveWeights, bounds: NormalizationBounds,
                    ids: Iterator[int] | None = None,
                    generation: int = 0) -> list[Candidate]:
    """Uniform random population, evaluated; counts pop_size evaluations."""
    ids = ids if ids is not None else itertools.count()
    genomes = rng.random((params.pop_size, params.genome_dim))
    inputs, outputs, raws, errors = _evaluate(genomes, _sut_diagram(sut), params)
    population = []
    for j in range(params.pop_size):
        if not errors[j]:
            bounds.update_vector(raws[j])
    for j in range(params.pop_size):
        if errors[j]:
            ratios = np.zeros(7)
            value = 0.0
        else:
            ratios = ratio_vector(raws[j], bounds)
            value = dff(ratios, weights)
        population.append(
            Candidate(next(ids), genomes[j].copy(), inputs[j], outputs[j], raws[j],
                      ratios, value, generation, bool(errors[j]))
        )
    return population


def step_single(population: list[Candidate], j: int, weights: ObjectiveWeights,
                bounds: NormalizationBounds, sut, params: DeParams,
                rng: np.random.Generator, ids: Iterator[int] | None = None,
                generation: int = 0) -> int:
    """Steady-state update: one trial against target j (one evaluation).

    Used by the low-effort lab mode where an optimization step costs a
    single fitness evaluation; mutates `population` in place.
    """
    ids = ids if ids is not None else itertools.count(start=max(c.cid for c in population) + 1)
    genomes = np.stack([c.genome for c in population])
    donor = mutate(genomes, j, params.f, rng)
    trial = crossover(genomes[j], donor, params.cr, rng)
    inputs, outputs, raws, errors = _evaluate(trial[None, :], _sut_diagram(sut), params)
    target = population[j]
    if errors[0]:
        trial_ratios = np.zeros(7)
        trial_dff = 0.0
    else:
        bounds.update_vector(raws[0])
        trial_ratios = ratio_vector(raws[0], bounds)
        trial_dff = dff(trial_ratios, weights)
    if target.error:
        target_dff = 0.0
    else:
        target.ratios = ratio_vector(target.raw_scores, bounds)
        target.dff = dff(target.ratios, weights)
        target_dff = target.dff
    if trial_dff >= target_dff:
        population[j] = Candidate(next(ids), trial.copy(), inputs[0], outputs[0], raws[0],
                                  trial_ratios, trial_dff, generation, bool(errors[0]))
    return 1


def step(population: list[Candidate], weights: ObjectiveWeights,
         bounds: NormalizationBounds, sut, params: DeParams,
         rng: np.random.Generator, ids: Iterator[int] | None = None,
         generation: int = 0) -> tuple[list[Candidate], int]:
    """One DE generation; returns (new population, evaluations spent).

    Trials replace their targets on ties so the search can drift across
    plateaus; with frozen bounds and fixed weights the best DFF is
    therefore non-decreasing.
    """
    ids = ids if ids is not None else itertools.count(start=max(c.cid for c in population) + 1)
    pop = len(population)
    genomes = np.stack([c.genome for c in population])
    trials = np.empty_like(genomes)
    for j in range(pop):
        donor = mutate(genomes, j, params.f, rng)
        trials[j] = crossover(genomes[j], donor, params.cr, rng)

    inputs, outputs, raws, errors = _evaluate(trials, _sut_diagram(sut), params)

    survivors: list[Candidate] = []
    for j in range(pop):
        target = population[j]
        if errors[j]:
            trial_ratios = np.zeros(7)
            trial_dff = 0.0
        else:
            bounds.update_vector(raws[j])
            trial_ratios = ratio_vector(raws[j], bounds)
            trial_dff = dff(trial_ratios, weights)
        if target.error:
            target_dff = 0.0
        else:
            target.ratios = ratio_vector(target.raw_scores, bounds)
            target.dff = dff(target.ratios, weights)
            target_dff = target.dff
        if trial_dff >= target_dff:
            survivors.append(
                Candidate(next(ids), trials[j].copy(), inputs[j], outputs[j], raws[j],
                          trial_ratios, trial_dff, generation, bool(errors[j]))
            )
        else:
            survivors.append(target)
    return survivors, pop
