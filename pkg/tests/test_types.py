import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isbst.fbd import SignalKind, SignalTrace, TraceTypeError


def test_kind_ranges():
    assert SignalKind.U16.lo == 0 and SignalKind.U16.hi == 65535
    assert SignalKind.S16.lo == -32768 and SignalKind.S16.hi == 32767
    assert SignalKind.BOOL.lo == 0 and SignalKind.BOOL.hi == 1


@given(st.integers(min_value=-(2**40), max_value=2**40))
def test_saturate_never_wraps(value):
    for kind in SignalKind:
        sat = kind.saturate(value)
        assert kind.lo <= sat <= kind.hi
        if kind.contains(value):
            assert sat == value


def test_trace_rejects_out_of_range():
    with pytest.raises(TraceTypeError):
        SignalTrace.from_values(0, SignalKind.U16, [0, 70000])
    with pytest.raises(TraceTypeError):
        SignalTrace.from_values(1, SignalKind.BOOL, [0, 2])


def test_trace_equality_and_immutability():
    a = SignalTrace.from_values(6, SignalKind.S16, [1, -2, 3])
    b = SignalTrace.from_values(6, SignalKind.S16, [1, -2, 3])
    assert a == b and hash(a) == hash(b)
    with pytest.raises(ValueError):
        a.samples[0] = 9


def test_constant_trace():
    t = SignalTrace.constant(2, SignalKind.S16, -7, 4)
    assert t.samples.tolist() == [-7, -7, -7, -7]
