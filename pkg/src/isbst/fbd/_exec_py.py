"""NumPy fallback kernel: executes a compiled Program over a batch of traces.

Vectorized across the batch dimension, tick by tick. Semantics must match
the compiled kernel bit for bit: exact int64 arithmetic, per-block
saturation to the declared kind, floor division with divide-by-zero -> 0.
"""

from __future__ import annotations

import numpy as np

from .blocks import OpKind, Program

_CONST = OpKind.CONST.value
_ADD = OpKind.ADD.value
_SUB = OpKind.SUB.value
_MUL = OpKind.MUL.value
_DIV = OpKind.DIV.value
_MIN = OpKind.MIN.value
_MAX = OpKind.MAX.value
_ABS = OpKind.ABS.value
_NEG = OpKind.NEG.value
_LT = OpKind.LT.value
_LE = OpKind.LE.value
_GT = OpKind.GT.value
_GE = OpKind.GE.value
_EQ = OpKind.EQ.value
_NE = OpKind.NE.value
_AND = OpKind.AND.value
_OR = OpKind.OR.value
_XOR = OpKind.XOR.value
_NOT = OpKind.NOT.value
_MUX = OpKind.MUX.value
_SAT = OpKind.SATURATE.value


def _apply(op: int, a, b, c, cval: int):
    if op == _CONST:
        return cval
    if op == _ADD:
        return a + b
    if op == _SUB:
        return a - b
    if op == _MUL:
        return a * b
    if op == _DIV:
        zero = b == 0
        q = np.floor_divide(a, np.where(zero, 1, b))
        return np.where(zero, 0, q)
    if op == _MIN:
        return np.minimum(a, b)
    if op == _MAX:
        return np.maximum(a, b)
    if op == _ABS:
        return np.abs(a)
    if op == _NEG:
        return -a
    if op == _LT:
        return (a < b).astype(np.int64)
    if op == _LE:
        return (a <= b).astype(np.int64)
    if op == _GT:
        return (a > b).astype(np.int64)
    if op == _GE:
        return (a >= b).astype(np.int64)
    if op == _EQ:
        return (a == b).astype(np.int64)
    if op == _NE:
        return (a != b).astype(np.int64)
    if op == _AND:
        return a & b
    if op == _OR:
        return a | b
    if op == _XOR:
        return a ^ b
    if op == _NOT:
        return 1 - a
    if op == _MUX:
        return np.where(a != 0, b, c)
    if op == _SAT:
        return a
    raise AssertionError(f"unhandled opcode {op}")


def run_program_batch(program: Program, inputs: np.ndarray) -> np.ndarray:
    """Run the program on inputs[B, n_inputs, T] -> outputs[B, n_out, T]."""
    batch, n_in, ticks = inputs.shape
    assert n_in == program.n_inputs
    n_out = program.out_slots.size
    outputs = np.empty((batch, n_out, ticks), dtype=np.int64)

    slots = np.zeros((program.n_slots, batch), dtype=np.int64)
    n_delays = program.delay_slot.size
    state = np.repeat(program.delay_init[:, None], batch, axis=1)

    ops = program.ops
    in0, in1, in2 = program.in0, program.in1, program.in2
    out, lo, hi, cval = program.out, program.lo, program.hi, program.cval

    for t in range(ticks):
        slots[:n_in] = inputs[:, :, t].T
        for d in range(n_delays):
            slots[program.delay_slot[d]] = state[d]
        for k in range(ops.size):
            a = slots[in0[k]] if in0[k] >= 0 else None
            b = slots[in1[k]] if in1[k] >= 0 else None
            c = slots[in2[k]] if in2[k] >= 0 else None
            v = _apply(int(ops[k]), a, b, c, int(cval[k]))
            slots[out[k]] = np.clip(v, lo[k], hi[k])
        for j in range(n_out):
            outputs[:, j, t] = slots[program.out_slots[j]]
        for d in range(n_delays):
            state[d] = np.clip(slots[program.delay_src[d]], program.delay_lo[d], program.delay_hi[d])

    return outputs


def lcs_length(a, b) -> int:
    """Longest common subsequence length via the classic row-rolling DP."""
    a = [int(v) for v in a]
    b = [int(v) for v in b]
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return 0
    prev = [0] * (m + 1)
    for i in range(n):
        cur = [0] * (m + 1)
        ai = a[i]
        for j in range(1, m + 1):
            if b[j - 1] == ai:
                cur[j] = prev[j - 1] + 1
            else:
                left, up = cur[j - 1], prev[j]
                cur[j] = left if left >= up else up
        prev = cur
    return prev[m]
