from .blocks import (
    Block,
    BlockDiagram,
    DiagramError,
    Edge,
    OpKind,
    OutputDecl,
    PortDecl,
    Program,
    compile_diagram,
    structural_diff,
)
from .executor import BACKEND, execute, execute_batch, program_for
from .ramp import (
    RAMP_INPUT_DECLS,
    RAMP_INPUT_KINDS,
    RAMP_INPUT_NAMES,
    RAMP_OUTPUT_KINDS,
    RAMP_OUTPUT_NAMES,
    RampState,
    build_ramp_diagram,
    ramp_tick,
    random_ramp_inputs,
    run_reference,
)
from .types import EXTERNAL_KINDS, SignalKind, SignalTrace, TraceTypeError, random_trace

__all__ = [
    "BACKEND",
    "Block",
    "BlockDiagram",
    "DiagramError",
    "Edge",
    "EXTERNAL_KINDS",
    "OpKind",
    "OutputDecl",
    "PortDecl",
    "Program",
    "RAMP_INPUT_DECLS",
    "RAMP_INPUT_KINDS",
    "RAMP_INPUT_NAMES",
    "RAMP_OUTPUT_KINDS",
    "RAMP_OUTPUT_NAMES",
    "RampState",
    "SignalKind",
    "SignalTrace",
    "TraceTypeError",
    "build_ramp_diagram",
    "compile_diagram",
    "execute",
    "execute_batch",
    "program_for",
    "ramp_tick",
    "random_ramp_inputs",
    "random_trace",
    "run_reference",
    "structural_diff",
]
