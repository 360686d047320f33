"""DE operator contracts, decoding and search-loop invariants."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isbst import engine
from isbst.engine import DeParams, crossover, decode, decode_batch, mutate
from isbst.mutation import SutVersion
from isbst.objectives import NormalizationBounds, ObjectiveWeights


@pytest.fixture(scope="module")
def reference(shipped_study):
    return shipped_study[0]


class TestDecode:
    def test_all_zero_genes(self):
        params = DeParams()
        traces = decode(np.zeros(params.genome_dim), params)
        assert traces[6].samples.tolist() == [-32768] * 50  # Input
        assert traces[1].samples.tolist() == [0] * 50  # Reset FALSE
        assert traces[0].samples.tolist() == [1] * 50  # LoopTm clamped to 1

    def test_all_one_genes(self):
        params = DeParams()
        traces = decode(np.ones(params.genome_dim), params)
        assert traces[6].samples.tolist() == [32767] * 50
        assert traces[1].samples.tolist() == [1] * 50
        assert traces[0].samples.tolist() == [65535] * 50

    def test_reset_threshold_inclusive(self):
        params = DeParams()
        g = np.zeros(params.genome_dim)
        g[5:15] = 0.5
        traces = decode(g, params)
        assert traces[1].samples.tolist() == [1] * 50

    def test_zero_order_hold_segments(self):
        params = DeParams(trace_len=50, control_points=10)
        g = np.zeros(params.genome_dim)
        g[15] = 1.0  # first Input control point
        traces = decode(g, params)
        sig = traces[6].samples
        assert (sig[:5] == 32767).all() and (sig[5:] == -32768).all()

    def test_truncated_last_segment(self):
        params = DeParams(trace_len=53, control_points=10)
        arr = decode_batch(np.linspace(0, 1, params.genome_dim)[None, :], params)
        assert arr.shape == (1, 7, 53)

    def test_config_genes_constant_across_trace(self, rng):
        params = DeParams()
        arr = decode_batch(rng.random((20, params.genome_dim)), params)
        for ch in (0, 2, 3, 4, 5):
            assert (arr[:, ch, :] == arr[:, ch, :1]).all()


class TestMutate:
    def test_zero_difference_vector(self):
        # every non-target row is identical, so x_r2 == x_r3 and v == x_r1
        c = np.array([0.3, 0.6, 0.9])
        genomes = np.stack([c, np.array([0.1, 0.1, 0.1]), c, c])
        rng = np.random.default_rng(0)
        for _ in range(50):
            assert np.array_equal(mutate(genomes, 1, 0.7, rng), c)

    def test_amplification_and_clamp(self):
        # x_r1=(0,0), x_r2=(1,0), x_r3=(0,1), F=0.7 -> (0.7, -0.7) -> clamp (0.7, 0)
        v = np.clip(np.array([0.0, 0.0]) + 0.7 * (np.array([1.0, 0.0]) - np.array([0.0, 1.0])), 0, 1)
        assert np.allclose(v, [0.7, 0.0])
        genomes = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
        rng = np.random.default_rng(3)
        for _ in range(200):
            out = mutate(genomes, 4, 0.7, rng)
            assert (out >= 0).all() and (out <= 1).all()

    def test_indices_distinct_over_many_draws(self):
        class SpyRng:
            """Records index draws so the accepted picks can be recovered."""

            def __init__(self, inner):
                self.inner = inner
                self.picks = []

            def integers(self, lo, hi):
                v = self.inner.integers(lo, hi)
                self.picks.append(int(v))
                return v

            def random(self, *a, **k):
                return self.inner.random(*a, **k)

        genomes = np.random.default_rng(9).random((10, 3))
        for j in range(10):
            spy = SpyRng(np.random.default_rng(j))
            for _ in range(1000):
                spy.picks.clear()
                mutate(genomes, j, 0.7, spy)
                kept = []
                for p in spy.picks:  # replay the rejection rule
                    if p != j and p not in kept:
                        kept.append(p)
                assert len({*kept[:3], j}) == 4


class TestCrossover:
    def test_cr_one_copies_mutant(self, rng):
        t = rng.random(25)
        m = rng.random(25)
        trial = crossover(t, m, 1.0, np.random.default_rng(0))
        assert np.array_equal(trial, m)

    def test_cr_zero_forces_exactly_one_gene(self, rng):
        t = rng.random(25)
        m = rng.random(25)
        for seed in range(50):
            trial = crossover(t, m, 0.0, np.random.default_rng(seed))
            assert (trial != t).sum() == 1

    def test_identical_parents_forward_target(self, rng):
        t = rng.random(25)
        trial = crossover(t, t.copy(), 0.5, np.random.default_rng(4))
        assert np.array_equal(trial, t)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 2.0), st.floats(0.0, 1.0))
def test_operators_keep_genomes_feasible(seed, f, cr):
    rng = np.random.default_rng(seed)
    genomes = rng.random((8, 12)) * 1.0
    j = int(rng.integers(0, 8))
    donor = mutate(genomes, j, f, rng)
    trial = crossover(genomes[j], donor, cr, rng)
    assert (trial >= 0.0).all() and (trial <= 1.0).all()


class TestSearchLoop:
    def test_init_population_seeded(self, reference):
        params = DeParams(pop_size=10, trace_len=20, seed=5)
        out = []
        for _ in range(2):
            rng = np.random.default_rng(5)
            pop = engine.init_population(
                params, rng, reference, ObjectiveWeights.equal(), NormalizationBounds(),
                itertools.count(),
            )
            out.append(np.stack([c.genome for c in pop]))
        assert np.array_equal(out[0], out[1])
        assert (out[0] >= 0).all() and (out[0] <= 1).all()

    def test_different_seeds_differ(self, reference):
        pops = []
        for seed in (1, 2):
            rng = np.random.default_rng(seed)
            pop = engine.init_population(
                DeParams(pop_size=10, trace_len=20), rng, reference,
                ObjectiveWeights.equal(), NormalizationBounds(), itertools.count(),
            )
            pops.append(np.stack([c.genome for c in pop]))
        assert not np.array_equal(pops[0], pops[1])

    def test_all_zero_weights_full_replacement(self, reference):
        params = DeParams(pop_size=8, trace_len=10)
        rng = np.random.default_rng(0)
        weights = ObjectiveWeights({})
        bounds = NormalizationBounds()
        pop = engine.init_population(params, rng, reference, weights, bounds, itertools.count())
        before = {c.cid for c in pop}
        pop2, evals = engine.step(pop, weights, bounds, reference, params, rng,
                                  itertools.count(start=1000))
        assert evals == 8
        assert all(c.cid not in before for c in pop2)  # ties replace

    def test_frozen_bounds_monotone_best_dff(self, reference):
        params = DeParams(pop_size=10, trace_len=20, seed=3)
        rng = np.random.default_rng(3)
        weights = ObjectiveWeights.equal()
        bounds = NormalizationBounds(frozen=False)
        ids = itertools.count()
        pop = engine.init_population(params, rng, reference, weights, bounds, ids)
        bounds.frozen = True
        best = max(c.dff for c in pop)
        for _ in range(40):
            pop, _ = engine.step(pop, weights, bounds, reference, params, rng, ids)
            new_best = max(c.dff for c in pop)
            assert new_best >= best - 1e-12
            best = new_best

    def test_population_size_preserved(self, reference):
        params = DeParams(pop_size=6, trace_len=10)
        rng = np.random.default_rng(8)
        weights = ObjectiveWeights.equal()
        bounds = NormalizationBounds()
        ids = itertools.count()
        pop = engine.init_population(params, rng, reference, weights, bounds, ids)
        for _ in range(100):
            pop, _ = engine.step(pop, weights, bounds, reference, params, rng, ids)
            assert len(pop) == 6

    def test_evaluation_accounting(self, reference):
        params = DeParams(pop_size=7, trace_len=10)
        rng = np.random.default_rng(2)
        weights = ObjectiveWeights.equal()
        bounds = NormalizationBounds()
        ids = itertools.count()
        pop = engine.init_population(params, rng, reference, weights, bounds, ids)
        total = params.pop_size
        for k in range(25):
            pop, evals = engine.step(pop, weights, bounds, reference, params, rng, ids)
            total += evals
        assert total == params.pop_size * (25 + 1)

    def test_candidate_traces_reproduce(self, reference):
        from isbst.fbd import execute_batch

        params = DeParams(pop_size=5, trace_len=15)
        rng = np.random.default_rng(4)
        pop = engine.init_population(
            params, rng, reference, ObjectiveWeights.equal(), NormalizationBounds(),
            itertools.count(),
        )
        for c in pop:
            again = execute_batch(reference.diagram, c.inputs[None, :, :])[0]
            assert np.array_equal(again, c.outputs)


def test_de_params_validation():
    with pytest.raises(ValueError):
        DeParams(f=0.0)
    with pytest.raises(ValueError):
        DeParams(f=2.5)
    with pytest.raises(ValueError):
        DeParams(cr=1.2)
    with pytest.raises(ValueError):
        DeParams(pop_size=3)
