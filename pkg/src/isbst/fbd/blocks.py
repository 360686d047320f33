"""Block-diagram graph model, JSON serialization and program compilation.

A diagram is a dataflow graph of typed blocks. Every cycle must pass
through a UNIT_DELAY, so per tick the non-delay blocks evaluate in a fixed
topological order while delays emit their previous-tick value. Diagrams
compile to a flat instruction program consumed by the execution kernels.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .types import EXTERNAL_KINDS, SignalKind


class DiagramError(ValueError):
    """The diagram violates a structural invariant."""


class OpKind(enum.Enum):
    CONST = 0
    ADD = 1
    SUB = 2
    MUL = 3
    DIV = 4
    MIN = 5
    MAX = 6
    ABS = 7
    NEG = 8
    LT = 9
    LE = 10
    GT = 11
    GE = 12
    EQ = 13
    NE = 14
    AND = 15
    OR = 16
    XOR = 17
    NOT = 18
    MUX = 19
    UNIT_DELAY = 20
    SATURATE = 21


# Input port signature per op: 'n' numeric, 'b' boolean, 's' same class as
# the block's declared output kind (MUX branches).
_PORT_SIGNATURES: Mapping[OpKind, str] = {
    OpKind.CONST: "",
    OpKind.ADD: "nn",
    OpKind.SUB: "nn",
    OpKind.MUL: "nn",
    OpKind.DIV: "nn",
    OpKind.MIN: "nn",
    OpKind.MAX: "nn",
    OpKind.ABS: "n",
    OpKind.NEG: "n",
    OpKind.LT: "nn",
    OpKind.LE: "nn",
    OpKind.GT: "nn",
    OpKind.GE: "nn",
    OpKind.EQ: "nn",
    OpKind.NE: "nn",
    OpKind.AND: "bb",
    OpKind.OR: "bb",
    OpKind.XOR: "bb",
    OpKind.NOT: "b",
    OpKind.MUX: "bss",
    OpKind.UNIT_DELAY: "s",
    OpKind.SATURATE: "n",
}

COMPARISON_OPS = frozenset({OpKind.LT, OpKind.LE, OpKind.GT, OpKind.GE, OpKind.EQ, OpKind.NE})
LOGIC_OPS = frozenset({OpKind.AND, OpKind.OR, OpKind.XOR, OpKind.NOT})
ARITH_OPS = frozenset(
    {OpKind.ADD, OpKind.SUB, OpKind.MUL, OpKind.DIV, OpKind.MIN, OpKind.MAX, OpKind.ABS,
     OpKind.NEG, OpKind.SATURATE}
)


def arity(op: OpKind) -> int:
    return len(_PORT_SIGNATURES[op])


@dataclass(frozen=True)
class Block:
    """One typed block: an operation, its output kind and optional payload."""

    block_id: str
    op: OpKind
    kind: SignalKind
    value: int | None = None  # CONST payload
    init: int | None = None  # UNIT_DELAY initial state

    def __post_init__(self):
        if self.op is OpKind.CONST:
            if self.value is None:
                raise DiagramError(f"{self.block_id}: CONST requires a value")
            if not self.kind.contains(self.value):
                raise DiagramError(f"{self.block_id}: CONST value outside {self.kind.label}")
        elif self.value is not None:
            raise DiagramError(f"{self.block_id}: only CONST carries a value")
        if self.op is OpKind.UNIT_DELAY:
            init = 0 if self.init is None else self.init
            if not self.kind.contains(init):
                raise DiagramError(f"{self.block_id}: delay init outside {self.kind.label}")
            object.__setattr__(self, "init", int(init))
        elif self.init is not None:
            raise DiagramError(f"{self.block_id}: only UNIT_DELAY carries an initial state")
        out_bool = self.kind.is_bool
        if self.op in COMPARISON_OPS or self.op in LOGIC_OPS:
            if not out_bool:
                raise DiagramError(f"{self.block_id}: {self.op.name} output must be BOOL")
        elif self.op in ARITH_OPS:
            if out_bool:
                raise DiagramError(f"{self.block_id}: {self.op.name} output must be numeric")


@dataclass(frozen=True)
class Edge:
    """Wire from a producer (block id or external input id) to a block port."""

    src: str
    dst: str
    port: int

    def key(self) -> str:
        return f"{self.src}->{self.dst}:{self.port}"


@dataclass(frozen=True)
class PortDecl:
    name: str
    kind: SignalKind


@dataclass(frozen=True)
class OutputDecl:
    name: str
    source: str  # block id whose output feeds this external output


@dataclass(frozen=True)
class BlockDiagram:
    name: str
    inputs: tuple[PortDecl, ...]
    outputs: tuple[OutputDecl, ...]
    blocks: tuple[Block, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "edges", tuple(self.edges))
        self._validate()

    # -- structure -----------------------------------------------------

    def block_map(self) -> dict[str, Block]:
        return {b.block_id: b for b in self.blocks}

    def producer_kind(self, name: str) -> SignalKind:
        for decl in self.inputs:
            if decl.name == name:
                return decl.kind
        blk = self.block_map().get(name)
        if blk is None:
            raise DiagramError(f"unknown producer {name!r}")
        return blk.kind

    def _validate(self) -> None:
        blocks = self.block_map()
        if len(blocks) != len(self.blocks):
            raise DiagramError("duplicate block ids")
        producers = {d.name for d in self.inputs} | set(blocks)
        for decl in self.inputs:
            if decl.kind not in EXTERNAL_KINDS:
                raise DiagramError(f"external input {decl.name} must be BOOL/U16/S16")

        wired: dict[tuple[str, int], str] = {}
        for e in self.edges:
            if e.src not in producers:
                raise DiagramError(f"edge from unknown producer {e.src!r}")
            blk = blocks.get(e.dst)
            if blk is None:
                raise DiagramError(f"edge into unknown block {e.dst!r}")
            if not 0 <= e.port < arity(blk.op):
                raise DiagramError(f"{blk.block_id}: port {e.port} out of range for {blk.op.name}")
            if (e.dst, e.port) in wired:
                raise DiagramError(f"{blk.block_id}: port {e.port} wired twice")
            wired[(e.dst, e.port)] = e.src

        for blk in self.blocks:
            sig = _PORT_SIGNATURES[blk.op]
            for port, want in enumerate(sig):
                src = wired.get((blk.block_id, port))
                if src is None:
                    raise DiagramError(f"{blk.block_id}: port {port} unconnected")
                src_kind = self.producer_kind(src)
                if want == "n" and not src_kind.is_numeric:
                    raise DiagramError(f"{blk.block_id}: port {port} needs a numeric source")
                if want == "b" and not src_kind.is_bool:
                    raise DiagramError(f"{blk.block_id}: port {port} needs a BOOL source")
                if want == "s" and src_kind.is_bool != blk.kind.is_bool:
                    raise DiagramError(
                        f"{blk.block_id}: port {port} class must match the output kind"
                    )

        for out in self.outputs:
            if out.source not in blocks:
                raise DiagramError(f"output {out.name} bound to unknown block {out.source!r}")

        self._toposort(blocks, wired)  # raises on a delay-free cycle

    def _toposort(self, blocks: dict[str, Block], wired: dict[tuple[str, int], str]) -> list[str]:
        """Order the non-delay blocks; delays act as tick-start sources."""
        input_names = {d.name for d in self.inputs}
        deps: dict[str, set[str]] = {}
        for blk in self.blocks:
            if blk.op is OpKind.UNIT_DELAY:
                continue
            ds = set()
            for port in range(arity(blk.op)):
                src = wired[(blk.block_id, port)]
                if src in input_names:
                    continue
                if blocks[src].op is OpKind.UNIT_DELAY:
                    continue
                ds.add(src)
            deps[blk.block_id] = ds
        order: list[str] = []
        ready = sorted(b for b, ds in deps.items() if not ds)
        pending = {b: set(ds) for b, ds in deps.items() if ds}
        while ready:
            b = ready.pop()
            order.append(b)
            newly = []
            for other, ds in pending.items():
                ds.discard(b)
                if not ds:
                    newly.append(other)
            for other in newly:
                del pending[other]
            ready.extend(sorted(newly))
        if pending:
            raise DiagramError(f"cycle without UNIT_DELAY through {sorted(pending)}")
        return order

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        blocks = []
        for b in self.blocks:
            entry: dict = {"id": b.block_id, "op": b.op.name, "kind": b.kind.label}
            if b.value is not None:
                entry["value"] = b.value
            if b.op is OpKind.UNIT_DELAY:
                entry["init"] = b.init
            blocks.append(entry)
        return {
            "name": self.name,
            "inputs": [{"id": d.name, "kind": d.kind.label} for d in self.inputs],
            "outputs": [{"id": o.name, "source": o.source} for o in self.outputs],
            "blocks": blocks,
            "edges": [{"src": e.src, "dst": e.dst, "port": e.port} for e in self.edges],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> "BlockDiagram":
        blocks = tuple(
            Block(
                block_id=b["id"],
                op=OpKind[b["op"]],
                kind=SignalKind.from_label(b["kind"]),
                value=b.get("value"),
                init=b.get("init"),
            )
            for b in data["blocks"]
        )
        return cls(
            name=data["name"],
            inputs=tuple(PortDecl(d["id"], SignalKind.from_label(d["kind"])) for d in data["inputs"]),
            outputs=tuple(OutputDecl(o["id"], o["source"]) for o in data["outputs"]),
            blocks=blocks,
            edges=tuple(Edge(e["src"], e["dst"], e["port"]) for e in data["edges"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "BlockDiagram":
        return cls.from_dict(json.loads(text))

    # -- mutation support ----------------------------------------------

    def with_block(self, new_block: Block) -> "BlockDiagram":
        blocks = tuple(new_block if b.block_id == new_block.block_id else b for b in self.blocks)
        if all(b is not new_block for b in blocks):
            raise DiagramError(f"no block {new_block.block_id!r} to replace")
        return replace(self, blocks=blocks)


@dataclass(frozen=True)
class Program:
    """Flat instruction form of a diagram, shared by both kernels.

    Slots hold int64 values: one per external input, then one per block.
    Instructions run in topological order each tick; delay slots are
    loaded from state at tick start and the state is refreshed from the
    delay's source slot at tick end. Exactness envelope: a single op's
    unsaturated result must fit in int64 (true for any diagram whose MUL
    operands don't both exceed 32 bits).
    """

    n_inputs: int
    n_slots: int
    ops: np.ndarray
    in0: np.ndarray
    in1: np.ndarray
    in2: np.ndarray
    out: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    cval: np.ndarray
    delay_slot: np.ndarray
    delay_src: np.ndarray
    delay_init: np.ndarray
    delay_lo: np.ndarray
    delay_hi: np.ndarray
    out_slots: np.ndarray
    input_kinds: tuple[SignalKind, ...]
    output_names: tuple[str, ...]


def compile_diagram(diagram: BlockDiagram) -> Program:
    blocks = diagram.block_map()
    wired: dict[tuple[str, int], str] = {}
    for e in diagram.edges:
        wired[(e.dst, e.port)] = e.src

    slot_of: dict[str, int] = {}
    for i, decl in enumerate(diagram.inputs):
        slot_of[decl.name] = i
    for j, blk in enumerate(diagram.blocks):
        slot_of[blk.block_id] = len(diagram.inputs) + j

    order = diagram._toposort(blocks, wired)

    ops, in0, in1, in2, outs, lo, hi, cval = [], [], [], [], [], [], [], []
    for bid in order:
        blk = blocks[bid]
        srcs = [slot_of[wired[(bid, p)]] for p in range(arity(blk.op))]
        srcs += [-1] * (3 - len(srcs))
        ops.append(blk.op.value)
        in0.append(srcs[0])
        in1.append(srcs[1])
        in2.append(srcs[2])
        outs.append(slot_of[bid])
        lo.append(blk.kind.lo)
        hi.append(blk.kind.hi)
        cval.append(blk.value if blk.value is not None else 0)

    d_slot, d_src, d_init, d_lo, d_hi = [], [], [], [], []
    for blk in diagram.blocks:
        if blk.op is OpKind.UNIT_DELAY:
            d_slot.append(slot_of[blk.block_id])
            d_src.append(slot_of[wired[(blk.block_id, 0)]])
            d_init.append(blk.init)
            d_lo.append(blk.kind.lo)
            d_hi.append(blk.kind.hi)

    i32 = np.int32
    i64 = np.int64
    return Program(
        n_inputs=len(diagram.inputs),
        n_slots=len(diagram.inputs) + len(diagram.blocks),
        ops=np.asarray(ops, dtype=i32),
        in0=np.asarray(in0, dtype=i32),
        in1=np.asarray(in1, dtype=i32),
        in2=np.asarray(in2, dtype=i32),
        out=np.asarray(outs, dtype=i32),
        lo=np.asarray(lo, dtype=i64),
        hi=np.asarray(hi, dtype=i64),
        cval=np.asarray(cval, dtype=i64),
        delay_slot=np.asarray(d_slot, dtype=i32),
        delay_src=np.asarray(d_src, dtype=i32),
        delay_init=np.asarray(d_init, dtype=i64),
        delay_lo=np.asarray(d_lo, dtype=i64),
        delay_hi=np.asarray(d_hi, dtype=i64),
        out_slots=np.asarray([slot_of[o.source] for o in diagram.outputs], dtype=i32),
        input_kinds=tuple(d.kind for d in diagram.inputs),
        output_names=tuple(o.name for o in diagram.outputs),
    )


def structural_diff(a: BlockDiagram, b: BlockDiagram) -> list[str]:
    """Names of blocks/edges that differ between two diagrams."""
    diffs: list[str] = []
    amap, bmap = a.block_map(), b.block_map()
    for bid in sorted(set(amap) | set(bmap)):
        if amap.get(bid) != bmap.get(bid):
            diffs.append(f"block:{bid}")
    aedges = {e.key() for e in a.edges}
    bedges = {e.key() for e in b.edges}
    for key in sorted(aedges ^ bedges):
        diffs.append(f"edge:{key}")
    return diffs
