"""The Time Ramp SUT: reference tick semantics and the shipped diagram.

Channel layout (seven inputs, three outputs):

    Input_0  LoopTm   U16   processing time of one loop, ms
    Input_1  Reset    BOOL  forces the output to ResetVal
    Input_2  ResetVal S16   value emitted while Reset is TRUE
    Input_3  Range    U16   ramp span used by the per-tick step
    Input_4  DecTm    U16   ms for the output to fall in magnitude Range->0
    Input_5  IncTm    U16   ms for the output to rise in magnitude 0->Range
    Input_6  Input    S16   the signal being ramped
    Output_7 Dec      BOOL  magnitude decreased this tick
    Output_8 Pasv     BOOL  output unchanged or reset active
    Output_9 Output   S16   ramped signal

Per tick the output moves from its previous value toward Input by at most
`Range * LoopTm // max(tm, LoopTm)` where tm is IncTm when the move grows
the magnitude and DecTm when it shrinks it; tm == 0 disables that limit
(the output jumps). The output never overshoots Input. A whole move is
classified by its initial direction relative to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .blocks import Block, BlockDiagram, Edge, OpKind, OutputDecl, PortDecl
from .types import SignalKind, SignalTrace

RAMP_INPUT_DECLS = (
    PortDecl("Input_0", SignalKind.U16),
    PortDecl("Input_1", SignalKind.BOOL),
    PortDecl("Input_2", SignalKind.S16),
    PortDecl("Input_3", SignalKind.U16),
    PortDecl("Input_4", SignalKind.U16),
    PortDecl("Input_5", SignalKind.U16),
    PortDecl("Input_6", SignalKind.S16),
)
RAMP_INPUT_KINDS = tuple(d.kind for d in RAMP_INPUT_DECLS)
RAMP_OUTPUT_KINDS = (SignalKind.BOOL, SignalKind.BOOL, SignalKind.S16)
RAMP_INPUT_NAMES = ("LoopTm", "Reset", "ResetVal", "Range", "DecTm", "IncTm", "Input")
RAMP_OUTPUT_NAMES = ("Dec", "Pasv", "Output")


@dataclass(frozen=True)
class RampState:
    """Cross-tick state: previous output value and previous passive flag."""

    prev_output: int = 0
    prev_pasv: bool = True


def ramp_tick(state: RampState, loop_tm: int, reset: bool, reset_val: int,
              span: int, dec_tm: int, inc_tm: int, signal: int):
    """One reference tick. Returns (dec, pasv, output, next_state)."""
    prev = state.prev_output
    if reset:
        out = int(reset_val)
        pasv = True
        dec = False
    else:
        delta = signal - prev
        if delta == 0:
            out = prev
        else:
            away = prev == 0 or ((delta > 0) == (prev > 0))
            tm = inc_tm if away else dec_tm
            if tm == 0:
                out = int(signal)
            else:
                step = (span * loop_tm) // max(tm, loop_tm)
                if delta > 0:
                    out = min(signal, prev + step)
                else:
                    out = max(signal, prev - step)
        pasv = out == prev
        dec = abs(out) < abs(prev)
    return dec, pasv, out, RampState(out, pasv)


def run_reference(input_traces: Sequence[SignalTrace] | np.ndarray) -> np.ndarray:
    """Fold ramp_tick over input traces -> int64[3, T] (Dec, Pasv, Output)."""
    if isinstance(input_traces, np.ndarray):
        arr = np.asarray(input_traces, dtype=np.int64)
    else:
        arr = np.stack([t.samples for t in input_traces])
    ticks = arr.shape[1]
    out = np.empty((3, ticks), dtype=np.int64)
    state = RampState()
    for t in range(ticks):
        loop_tm, reset, reset_val, span, dec_tm, inc_tm, signal = (int(v) for v in arr[:, t])
        dec, pasv, value, state = ramp_tick(
            state, loop_tm, bool(reset), reset_val, span, dec_tm, inc_tm, signal
        )
        out[0, t] = dec
        out[1, t] = pasv
        out[2, t] = value
    return out


def build_ramp_diagram() -> BlockDiagram:
    """The shipped Time Ramp diagram; extensionally equal to ramp_tick."""
    B = SignalKind.BOOL
    U16, S16 = SignalKind.U16, SignalKind.S16
    U32, S32 = SignalKind.U32, SignalKind.S32

    blocks = [
        Block("zero_s16", OpKind.CONST, S16, value=0),
        Block("zero_u16", OpKind.CONST, U16, value=0),
        Block("prev", OpKind.UNIT_DELAY, S16, init=0),
        Block("delta", OpKind.SUB, S16),
        Block("delta_pos", OpKind.GT, B),
        Block("prev_pos", OpKind.GT, B),
        Block("prev_zero", OpKind.EQ, B),
        Block("dir_diff", OpKind.XOR, B),
        Block("dir_same", OpKind.NOT, B),
        Block("away", OpKind.OR, B),
        Block("limit_tm", OpKind.MUX, U16),
        Block("no_limit", OpKind.EQ, B),
        Block("eff_tm", OpKind.MAX, U16),
        Block("span_ms", OpKind.MUL, U32),
        Block("step", OpKind.DIV, U32),
        Block("raised", OpKind.ADD, S32),
        Block("lowered", OpKind.SUB, S32),
        Block("rise_cap", OpKind.MIN, S16),
        Block("fall_cap", OpKind.MAX, S16),
        Block("moved", OpKind.MUX, S16),
        Block("slewed", OpKind.MUX, S16),
        Block("out", OpKind.MUX, S16),
        Block("same_out", OpKind.EQ, B),
        Block("pasv", OpKind.OR, B),
        Block("mag_now", OpKind.ABS, U16),
        Block("mag_prev", OpKind.ABS, U16),
        Block("shrinking", OpKind.LT, B),
        Block("run_mode", OpKind.NOT, B),
        Block("dec", OpKind.AND, B),
    ]

    def wire(pairs):
        return [Edge(src, dst, port) for src, dst, port in pairs]

    edges = wire([
        ("out", "prev", 0),
        ("Input_6", "delta", 0), ("prev", "delta", 1),
        ("delta", "delta_pos", 0), ("zero_s16", "delta_pos", 1),
        ("prev", "prev_pos", 0), ("zero_s16", "prev_pos", 1),
        ("prev", "prev_zero", 0), ("zero_s16", "prev_zero", 1),
        ("delta_pos", "dir_diff", 0), ("prev_pos", "dir_diff", 1),
        ("dir_diff", "dir_same", 0),
        ("prev_zero", "away", 0), ("dir_same", "away", 1),
        ("away", "limit_tm", 0), ("Input_5", "limit_tm", 1), ("Input_4", "limit_tm", 2),
        ("limit_tm", "no_limit", 0), ("zero_u16", "no_limit", 1),
        ("limit_tm", "eff_tm", 0), ("Input_0", "eff_tm", 1),
        ("Input_3", "span_ms", 0), ("Input_0", "span_ms", 1),
        ("span_ms", "step", 0), ("eff_tm", "step", 1),
        ("prev", "raised", 0), ("step", "raised", 1),
        ("prev", "lowered", 0), ("step", "lowered", 1),
        ("raised", "rise_cap", 0), ("Input_6", "rise_cap", 1),
        ("lowered", "fall_cap", 0), ("Input_6", "fall_cap", 1),
        ("delta_pos", "moved", 0), ("rise_cap", "moved", 1), ("fall_cap", "moved", 2),
        ("no_limit", "slewed", 0), ("Input_6", "slewed", 1), ("moved", "slewed", 2),
        ("Input_1", "out", 0), ("Input_2", "out", 1), ("slewed", "out", 2),
        ("out", "same_out", 0), ("prev", "same_out", 1),
        ("Input_1", "pasv", 0), ("same_out", "pasv", 1),
        ("out", "mag_now", 0),
        ("prev", "mag_prev", 0),
        ("mag_now", "shrinking", 0), ("mag_prev", "shrinking", 1),
        ("Input_1", "run_mode", 0),
        ("run_mode", "dec", 0), ("shrinking", "dec", 1),
    ])

    return BlockDiagram(
        name="time_ramp",
        inputs=RAMP_INPUT_DECLS,
        outputs=(
            OutputDecl("Output_7", "dec"),
            OutputDecl("Output_8", "pasv"),
            OutputDecl("Output_9", "out"),
        ),
        blocks=tuple(blocks),
        edges=tuple(edges),
    )


def random_ramp_inputs(rng: np.random.Generator, ticks: int, batch: int = 1,
                       reset_bias: float = 0.3) -> np.ndarray:
    """Random valid input batch [batch, 7, ticks] over the full Table ranges."""
    arr = np.empty((batch, 7, ticks), dtype=np.int64)
    for j, kind in enumerate(RAMP_INPUT_KINDS):
        if kind.is_bool:
            arr[:, j, :] = rng.random((batch, ticks)) < reset_bias
        else:
            arr[:, j, :] = rng.integers(kind.lo, kind.hi + 1, size=(batch, ticks), dtype=np.int64)
    return arr
