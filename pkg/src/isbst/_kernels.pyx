# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: block-program execution and LCS length.

Must stay bit-identical to the NumPy fallbacks in fbd/_exec_py.py and
metrics.py; the test suite cross-checks both backends.
"""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc

cnp.import_array()

DEF OP_CONST = 0
DEF OP_ADD = 1
DEF OP_SUB = 2
DEF OP_MUL = 3
DEF OP_DIV = 4
DEF OP_MIN = 5
DEF OP_MAX = 6
DEF OP_ABS = 7
DEF OP_NEG = 8
DEF OP_LT = 9
DEF OP_LE = 10
DEF OP_GT = 11
DEF OP_GE = 12
DEF OP_EQ = 13
DEF OP_NE = 14
DEF OP_AND = 15
DEF OP_OR = 16
DEF OP_XOR = 17
DEF OP_NOT = 18
DEF OP_MUX = 19
DEF OP_SAT = 21


cdef inline long long _floordiv(long long a, long long b) nogil:
    cdef long long q
    if b == 0:
        return 0
    q = a // b  # cdivision: truncates toward zero
    if (a % b != 0) and ((a < 0) != (b < 0)):
        q -= 1
    return q


def run_program_batch(cnp.int32_t[::1] ops,
                      cnp.int32_t[::1] in0,
                      cnp.int32_t[::1] in1,
                      cnp.int32_t[::1] in2,
                      cnp.int32_t[::1] out,
                      cnp.int64_t[::1] lo,
                      cnp.int64_t[::1] hi,
                      cnp.int64_t[::1] cval,
                      cnp.int32_t[::1] delay_slot,
                      cnp.int32_t[::1] delay_src,
                      cnp.int64_t[::1] delay_init,
                      cnp.int64_t[::1] delay_lo,
                      cnp.int64_t[::1] delay_hi,
                      cnp.int32_t[::1] out_slots,
                      int n_slots,
                      cnp.int64_t[:, :, ::1] inputs):
    """Run one compiled program over inputs[B, n_in, T] -> int64[B, n_out, T]."""
    cdef Py_ssize_t batch = inputs.shape[0]
    cdef Py_ssize_t n_in = inputs.shape[1]
    cdef Py_ssize_t ticks = inputs.shape[2]
    cdef Py_ssize_t n_instr = ops.shape[0]
    cdef Py_ssize_t n_delays = delay_slot.shape[0]
    cdef Py_ssize_t n_out = out_slots.shape[0]

    result = np.empty((batch, n_out, ticks), dtype=np.int64)
    cdef cnp.int64_t[:, :, ::1] res = result

    cdef long long *slots = <long long *> malloc(n_slots * sizeof(long long))
    cdef long long *state = <long long *> malloc((n_delays if n_delays else 1) * sizeof(long long))
    if slots == NULL or state == NULL:
        free(slots)
        free(state)
        raise MemoryError()

    cdef Py_ssize_t b, t, k, d, j
    cdef int op
    cdef long long a, bb, cc, v

    with nogil:
        for b in range(batch):
            for d in range(n_delays):
                state[d] = delay_init[d]
            for t in range(ticks):
                for j in range(n_in):
                    slots[j] = inputs[b, j, t]
                for d in range(n_delays):
                    slots[delay_slot[d]] = state[d]
                for k in range(n_instr):
                    op = ops[k]
                    a = slots[in0[k]] if in0[k] >= 0 else 0
                    bb = slots[in1[k]] if in1[k] >= 0 else 0
                    cc = slots[in2[k]] if in2[k] >= 0 else 0
                    if op == OP_CONST:
                        v = cval[k]
                    elif op == OP_ADD:
                        v = a + bb
                    elif op == OP_SUB:
                        v = a - bb
                    elif op == OP_MUL:
                        v = a * bb
                    elif op == OP_DIV:
                        v = _floordiv(a, bb)
                    elif op == OP_MIN:
                        v = a if a < bb else bb
                    elif op == OP_MAX:
                        v = a if a > bb else bb
                    elif op == OP_ABS:
                        v = -a if a < 0 else a
                    elif op == OP_NEG:
                        v = -a
                    elif op == OP_LT:
                        v = 1 if a < bb else 0
                    elif op == OP_LE:
                        v = 1 if a <= bb else 0
                    elif op == OP_GT:
                        v = 1 if a > bb else 0
                    elif op == OP_GE:
                        v = 1 if a >= bb else 0
                    elif op == OP_EQ:
                        v = 1 if a == bb else 0
                    elif op == OP_NE:
                        v = 1 if a != bb else 0
                    elif op == OP_AND:
                        v = a & bb
                    elif op == OP_OR:
                        v = a | bb
                    elif op == OP_XOR:
                        v = a ^ bb
                    elif op == OP_NOT:
                        v = 1 - a
                    elif op == OP_MUX:
                        v = bb if a != 0 else cc
                    else:  # OP_SAT
                        v = a
                    if v < lo[k]:
                        v = lo[k]
                    elif v > hi[k]:
                        v = hi[k]
                    slots[out[k]] = v
                for j in range(n_out):
                    res[b, j, t] = slots[out_slots[j]]
                for d in range(n_delays):
                    v = slots[delay_src[d]]
                    if v < delay_lo[d]:
                        v = delay_lo[d]
                    elif v > delay_hi[d]:
                        v = delay_hi[d]
                    state[d] = v

    free(slots)
    free(state)
    return result


def lcs_length(cnp.int64_t[::1] a, cnp.int64_t[::1] b):
    """Longest common subsequence length (row-rolling DP)."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    if n == 0 or m == 0:
        return 0
    prev_arr = np.zeros(m + 1, dtype=np.int64)
    cur_arr = np.zeros(m + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] prev = prev_arr
    cdef cnp.int64_t[::1] cur = cur_arr
    cdef cnp.int64_t[::1] tmp
    cdef Py_ssize_t i, j
    cdef long long ai, left, up
    with nogil:
        for i in range(n):
            ai = a[i]
            cur[0] = 0
            for j in range(1, m + 1):
                if b[j - 1] == ai:
                    cur[j] = prev[j - 1] + 1
                else:
                    left = cur[j - 1]
                    up = prev[j]
                    cur[j] = left if left >= up else up
            tmp = prev
            prev = cur
            cur = tmp
    return int(prev[m])
