"""Time Ramp semantics, diagram execution and kernel agreement."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isbst.fbd import (
    Block,
    BlockDiagram,
    DiagramError,
    Edge,
    OpKind,
    OutputDecl,
    PortDecl,
    RampState,
    SignalKind,
    SignalTrace,
    TraceTypeError,
    build_ramp_diagram,
    execute,
    execute_batch,
    ramp_tick,
    random_ramp_inputs,
    run_reference,
)
from isbst.fbd.executor import BACKEND


class TestRampTick:
    def test_reset_forces_reset_val(self):
        dec, pasv, out, state = ramp_tick(
            RampState(123, False), loop_tm=10, reset=True, reset_val=5,
            span=100, dec_tm=10, inc_tm=10, signal=-400,
        )
        assert (out, pasv, dec) == (5, True, False)
        assert state.prev_output == 5

    def test_linear_step_toward_target(self):
        # step = 100 * 100 / 1000 = 10
        dec, pasv, out, _ = ramp_tick(
            RampState(0, True), loop_tm=100, reset=False, reset_val=0,
            span=100, dec_tm=1000, inc_tm=1000, signal=100,
        )
        assert (out, pasv, dec) == (10, False, False)

    def test_already_at_target_is_passive(self):
        dec, pasv, out, _ = ramp_tick(
            RampState(10, False), loop_tm=1, reset=False, reset_val=0,
            span=50, dec_tm=100, inc_tm=100, signal=10,
        )
        assert (out, pasv) == (10, True)

    def test_zero_inc_tm_jumps(self):
        _, _, out, _ = ramp_tick(
            RampState(0, True), loop_tm=1, reset=False, reset_val=0,
            span=10, dec_tm=55, inc_tm=0, signal=77,
        )
        assert out == 77

    def test_dec_reports_magnitude_shrink(self):
        dec, _, out, _ = ramp_tick(
            RampState(100, False), loop_tm=10, reset=False, reset_val=0,
            span=1000, dec_tm=100, inc_tm=100, signal=0,
        )
        assert out < 100 and dec is True

    def test_loop_tm_floor_applies(self):
        # 0 < inc_tm < loop_tm: loop_tm replaces inc_tm, step = span
        _, _, out, _ = ramp_tick(
            RampState(0, True), loop_tm=100, reset=False, reset_val=0,
            span=30, dec_tm=0, inc_tm=7, signal=100,
        )
        assert out == 30


class TestRampDiagram:
    def test_reset_trace_holds_reset_val(self, ramp):
        traces = [
            SignalTrace.constant(0, SignalKind.U16, 10, 6),
            SignalTrace.constant(1, SignalKind.BOOL, 1, 6),
            SignalTrace.constant(2, SignalKind.S16, 5, 6),
            SignalTrace.constant(3, SignalKind.U16, 100, 6),
            SignalTrace.constant(4, SignalKind.U16, 10, 6),
            SignalTrace.constant(5, SignalKind.U16, 10, 6),
            SignalTrace.constant(6, SignalKind.S16, -300, 6),
        ]
        dec, pasv, out = execute(ramp, traces)
        assert out.samples.tolist() == [5] * 6
        assert pasv.samples.tolist() == [1] * 6
        assert dec.samples.tolist() == [0] * 6

    def test_all_zero_inputs_fixed_point(self, ramp):
        x = np.zeros((1, 7, 8), dtype=np.int64)
        got = execute_batch(ramp, x)[0]
        assert not got[2].any()  # output stays zero
        assert got[1].all()  # passive everywhere

    def test_matches_reference_fold_on_random_traces(self, ramp, rng):
        x = random_ramp_inputs(rng, ticks=50, batch=500)
        got = execute_batch(ramp, x)
        for b in range(x.shape[0]):
            assert np.array_equal(got[b], run_reference(x[b]))

    def test_backends_agree(self, ramp, rng):
        x = random_ramp_inputs(rng, ticks=37, batch=64)
        compiled = execute_batch(ramp, x, backend=BACKEND)
        python = execute_batch(ramp, x, backend="python")
        assert np.array_equal(compiled, python)

    def test_deterministic(self, ramp, rng):
        x = random_ramp_inputs(rng, ticks=50, batch=10)
        a = execute_batch(ramp, x)
        b = execute_batch(ramp, x)
        assert np.array_equal(a, b)

    def test_outputs_within_declared_ranges(self, ramp, rng):
        x = random_ramp_inputs(rng, ticks=50, batch=300)
        got = execute_batch(ramp, x)
        assert got[:, 0].min() >= 0 and got[:, 0].max() <= 1
        assert got[:, 1].min() >= 0 and got[:, 1].max() <= 1
        assert got[:, 2].min() >= -32768 and got[:, 2].max() <= 32767

    def test_pasv_iff_unchanged_or_reset(self, ramp, rng):
        x = random_ramp_inputs(rng, ticks=50, batch=200)
        got = execute_batch(ramp, x)
        for b in range(x.shape[0]):
            prev = 0
            for t in range(50):
                expected = (got[b, 2, t] == prev) or bool(x[b, 1, t])
                assert bool(got[b, 1, t]) == expected
                prev = got[b, 2, t]

    def test_no_overshoot_under_constant_input(self, ramp, rng):
        for _ in range(50):
            target = int(rng.integers(-32768, 32768))
            x = np.zeros((1, 7, 50), dtype=np.int64)
            x[0, 0, :] = int(rng.integers(1, 2000))  # LoopTm
            x[0, 3, :] = int(rng.integers(0, 65536))  # Range
            x[0, 4, :] = int(rng.integers(1, 65536))  # DecTm
            x[0, 5, :] = int(rng.integers(1, 65536))  # IncTm
            x[0, 6, :] = target
            out = execute_batch(ramp, x)[0, 2]
            gaps = np.abs(out - target)
            assert (np.diff(gaps) <= 0).all()


@settings(max_examples=200, deadline=None)
@given(
    prev=st.integers(-32768, 32767),
    loop_tm=st.integers(0, 65535),
    reset=st.booleans(),
    reset_val=st.integers(-32768, 32767),
    span=st.integers(0, 65535),
    dec_tm=st.integers(0, 65535),
    inc_tm=st.integers(0, 65535),
    signal=st.integers(-32768, 32767),
)
def test_tick_stays_in_range_and_never_overshoots(prev, loop_tm, reset, reset_val,
                                                  span, dec_tm, inc_tm, signal):
    dec, pasv, out, state = ramp_tick(
        RampState(prev, True), loop_tm, reset, reset_val, span, dec_tm, inc_tm, signal
    )
    assert -32768 <= out <= 32767
    if not reset:
        lo, hi = min(prev, signal), max(prev, signal)
        assert lo <= out <= hi
        assert pasv == (out == prev)
        assert dec == (abs(out) < abs(prev))


class TestExecutor:
    def test_const_block_diagram(self):
        d = BlockDiagram(
            name="const3",
            inputs=(PortDecl("Input_0", SignalKind.U16),),
            outputs=(OutputDecl("Output_9", "c"),),
            blocks=(Block("c", OpKind.CONST, SignalKind.S16, value=3),),
            edges=(),
        )
        (out,) = execute(d, [SignalTrace.constant(0, SignalKind.U16, 0, 4)])
        assert out.samples.tolist() == [3, 3, 3, 3]

    def test_unit_delay_emits_previous_tick(self):
        d = BlockDiagram(
            name="delay1",
            inputs=(PortDecl("Input_0", SignalKind.U16),),
            outputs=(OutputDecl("Output_9", "dly"),),
            blocks=(
                Block("one", OpKind.CONST, SignalKind.S16, value=1),
                Block("dly", OpKind.UNIT_DELAY, SignalKind.S16, init=0),
            ),
            edges=(Edge("one", "dly", 0),),
        )
        (out,) = execute(d, [SignalTrace.constant(0, SignalKind.U16, 0, 3)])
        assert out.samples.tolist() == [0, 1, 1]

    def test_type_mismatched_trace_rejected(self, ramp):
        traces = [SignalTrace.constant(i, SignalKind.U16, 0, 5) for i in range(7)]
        with pytest.raises(TraceTypeError):
            execute(ramp, traces)  # Input_1 must be BOOL, Input_2/6 S16

    def test_length_mismatch_rejected(self, ramp):
        traces = [
            SignalTrace.constant(0, SignalKind.U16, 0, 5),
            SignalTrace.constant(1, SignalKind.BOOL, 0, 5),
            SignalTrace.constant(2, SignalKind.S16, 0, 5),
            SignalTrace.constant(3, SignalKind.U16, 0, 5),
            SignalTrace.constant(4, SignalKind.U16, 0, 5),
            SignalTrace.constant(5, SignalKind.U16, 0, 4),
            SignalTrace.constant(6, SignalKind.S16, 0, 5),
        ]
        with pytest.raises(TraceTypeError):
            execute(ramp, traces)

    def test_delay_free_cycle_rejected(self):
        with pytest.raises(DiagramError):
            BlockDiagram(
                name="bad",
                inputs=(PortDecl("Input_0", SignalKind.S16),),
                outputs=(OutputDecl("Output_9", "a"),),
                blocks=(
                    Block("a", OpKind.ADD, SignalKind.S16),
                    Block("b", OpKind.ADD, SignalKind.S16),
                ),
                edges=(
                    Edge("Input_0", "a", 0), Edge("b", "a", 1),
                    Edge("Input_0", "b", 0), Edge("a", "b", 1),
                ),
            )


def test_diagram_json_round_trip(ramp, rng):
    clone = BlockDiagram.from_json(ramp.to_json())
    assert clone == ramp
    x = random_ramp_inputs(rng, ticks=20, batch=5)
    assert np.array_equal(execute_batch(clone, x), execute_batch(ramp, x))


def test_saturating_arithmetic_in_mutant_paths(rng):
    # an ADD with S16 output saturates instead of wrapping
    d = BlockDiagram(
        name="sat",
        inputs=(PortDecl("Input_0", SignalKind.S16), PortDecl("Input_1", SignalKind.S16)),
        outputs=(OutputDecl("Output_9", "sum"),),
        blocks=(Block("sum", OpKind.ADD, SignalKind.S16),),
        edges=(Edge("Input_0", "sum", 0), Edge("Input_1", "sum", 1)),
    )
    x = np.array([[[32767], [32767]]], dtype=np.int64)
    assert execute_batch(d, x)[0, 0, 0] == 32767
    x = np.array([[[-32768], [-32768]]], dtype=np.int64)
    assert execute_batch(d, x)[0, 0, 0] == -32768
