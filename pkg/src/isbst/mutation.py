"""Mutant generation for the five fault categories.

CVR replaces constant payloads, IID inserts or deletes boolean inverters,
ABR/CBR/LBR swap arithmetic/comparison/logic block operations. A fixed
smoke set filters out mutants that are behaviorally equivalent to the
reference on all three outputs.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .fbd import Block, BlockDiagram, Edge, OpKind, SignalKind, execute_batch
from .fbd.ramp import build_ramp_diagram, random_ramp_inputs

CATEGORIES = ("CVR", "IID", "ABR", "CBR", "LBR")

# Fixed inputs for the equivalent-mutant filter.
SMOKE_SEED = 24117
SMOKE_TRACES = 100
SMOKE_TICKS = 50

# Shipped default: seeds the sampling of the 15-mutant study set.
DEFAULT_STUDY_SEED = 15523

_ABR_SWAP = {
    OpKind.ADD: (OpKind.SUB,),
    OpKind.SUB: (OpKind.ADD,),
    OpKind.MUL: (OpKind.DIV,),
    OpKind.DIV: (OpKind.MUL,),
    OpKind.MIN: (OpKind.MAX,),
    OpKind.MAX: (OpKind.MIN,),
}
_CBR_SWAP = {
    OpKind.LT: (OpKind.LE, OpKind.GT),
    OpKind.LE: (OpKind.LT,),
    OpKind.GT: (OpKind.GE, OpKind.LT),
    OpKind.GE: (OpKind.GT,),
    OpKind.EQ: (OpKind.NE,),
    OpKind.NE: (OpKind.EQ,),
}
_LBR_SWAP = {
    OpKind.AND: (OpKind.OR, OpKind.XOR),
    OpKind.OR: (OpKind.AND, OpKind.XOR),
    OpKind.XOR: (OpKind.AND, OpKind.OR),
}


class StaleSiteError(ValueError):
    """The mutation site does not exist (or no longer applies) in the diagram."""


@dataclass(frozen=True)
class MutationOp:
    category: str
    site: str  # block id, or "src->dst:port" for an edge site
    payload: str  # replacement op name, constant value, or insert/delete

    def describe(self) -> str:
        return f"{self.category} {self.site} {self.payload}"

    def to_dict(self) -> dict:
        return {"category": self.category, "site": self.site, "payload": self.payload}

    @classmethod
    def from_dict(cls, data: dict) -> "MutationOp":
        return cls(data["category"], data["site"], data["payload"])


@dataclass(frozen=True)
class SutVersion:
    version_id: int
    label: str
    diagram: BlockDiagram
    mutation: MutationOp | None = None

    def __post_init__(self):
        if self.version_id == 1 and self.mutation is not None:
            raise ValueError("version 1 is the unmutated reference")

    @property
    def category(self) -> str | None:
        return self.mutation.category if self.mutation else None


def _const_payloads(block: Block) -> list[int]:
    kind = block.kind
    current = block.value
    candidates = [0, 1, kind.hi, kind.lo, -current]
    out: list[int] = []
    for v in candidates:
        if v == current or not kind.contains(v) or v in out:
            continue
        out.append(v)
    return out


def enumerate_sites(diagram: BlockDiagram, category: str) -> list[MutationOp]:
    """All applicable mutations of one category, in a stable order."""
    ops: list[MutationOp] = []
    if category == "CVR":
        for blk in diagram.blocks:
            if blk.op is OpKind.CONST:
                for v in _const_payloads(blk):
                    ops.append(MutationOp("CVR", blk.block_id, str(v)))
    elif category == "IID":
        kinds = {d.name: d.kind for d in diagram.inputs}
        kinds.update({b.block_id: b.kind for b in diagram.blocks})
        for e in diagram.edges:
            if kinds[e.src].is_bool:
                ops.append(MutationOp("IID", e.key(), "insert"))
        for blk in diagram.blocks:
            if blk.op is OpKind.NOT:
                ops.append(MutationOp("IID", blk.block_id, "delete"))
    elif category in ("ABR", "CBR", "LBR"):
        table = {"ABR": _ABR_SWAP, "CBR": _CBR_SWAP, "LBR": _LBR_SWAP}[category]
        for blk in diagram.blocks:
            for new_op in table.get(blk.op, ()):
                ops.append(MutationOp(category, blk.block_id, new_op.name))
    else:
        raise ValueError(f"unknown fault category {category!r}")
    return ops


def _parse_edge_site(site: str) -> Edge:
    src, rest = site.split("->", 1)
    dst, port = rest.rsplit(":", 1)
    return Edge(src, dst, int(port))


def apply(diagram: BlockDiagram, op: MutationOp) -> BlockDiagram:
    """Return a new diagram with exactly one site changed."""
    blocks = diagram.block_map()
    if op.category == "CVR":
        blk = blocks.get(op.site)
        if blk is None or blk.op is not OpKind.CONST:
            raise StaleSiteError(f"no CONST block {op.site!r}")
        value = int(op.payload)
        if not blk.kind.contains(value) or value == blk.value:
            raise StaleSiteError(f"payload {value} not applicable at {op.site}")
        return diagram.with_block(replace(blk, value=value))

    if op.category == "IID":
        if op.payload == "insert":
            edge = _parse_edge_site(op.site)
            if edge not in diagram.edges:
                raise StaleSiteError(f"no edge {op.site!r}")
            if not diagram.producer_kind(edge.src).is_bool:
                raise StaleSiteError(f"edge {op.site!r} is not BOOL")
            inv_id = f"inv_{edge.src}_{edge.dst}_{edge.port}"
            if inv_id in blocks:
                raise StaleSiteError(f"inverter {inv_id} already present")
            new_blocks = diagram.blocks + (Block(inv_id, OpKind.NOT, SignalKind.BOOL),)
            new_edges = tuple(e for e in diagram.edges if e != edge) + (
                Edge(edge.src, inv_id, 0),
                Edge(inv_id, edge.dst, edge.port),
            )
            return replace(diagram, blocks=new_blocks, edges=new_edges)
        if op.payload == "delete":
            blk = blocks.get(op.site)
            if blk is None or blk.op is not OpKind.NOT:
                raise StaleSiteError(f"no NOT block {op.site!r}")
            feeder = next(e.src for e in diagram.edges if e.dst == op.site)
            new_blocks = tuple(b for b in diagram.blocks if b.block_id != op.site)
            new_edges = []
            for e in diagram.edges:
                if e.dst == op.site:
                    continue
                if e.src == op.site:
                    new_edges.append(Edge(feeder, e.dst, e.port))
                else:
                    new_edges.append(e)
            return replace(diagram, blocks=new_blocks, edges=tuple(new_edges))
        raise StaleSiteError(f"unknown IID payload {op.payload!r}")

    if op.category in ("ABR", "CBR", "LBR"):
        blk = blocks.get(op.site)
        table = {"ABR": _ABR_SWAP, "CBR": _CBR_SWAP, "LBR": _LBR_SWAP}[op.category]
        new_op = OpKind[op.payload]
        if blk is None or new_op not in table.get(blk.op, ()):
            raise StaleSiteError(f"{op.payload} not applicable at {op.site!r}")
        return diagram.with_block(replace(blk, op=new_op))

    raise ValueError(f"unknown fault category {op.category!r}")


def smoke_inputs() -> np.ndarray:
    rng = np.random.default_rng(SMOKE_SEED)
    return random_ramp_inputs(rng, SMOKE_TICKS, SMOKE_TRACES)


def is_smoke_equivalent(mutant: BlockDiagram, reference_outputs: np.ndarray,
                        smoke: np.ndarray) -> bool:
    return bool(np.array_equal(execute_batch(mutant, smoke), reference_outputs))


def study_set(seed: int = DEFAULT_STUDY_SEED, per_category: int = 3) -> list[SutVersion]:
    """Version 1 (reference) plus 3 seeded, non-equivalent mutants per category."""
    reference = build_ramp_diagram()
    smoke = smoke_inputs()
    ref_out = execute_batch(reference, smoke)
    rng = np.random.default_rng(seed)

    picked: list[tuple[str, MutationOp, BlockDiagram]] = []
    spares: list[tuple[str, MutationOp, BlockDiagram]] = []
    shortfall = 0
    for cat in CATEGORIES:
        ops = enumerate_sites(reference, cat)
        order = rng.permutation(len(ops))
        kept = 0
        for idx in order:
            op = ops[int(idx)]
            mutant = apply(reference, op)
            if is_smoke_equivalent(mutant, ref_out, smoke):
                continue
            if kept < per_category:
                picked.append((cat, op, mutant))
                kept += 1
            else:
                spares.append((cat, op, mutant))
        if kept < per_category:
            shortfall += per_category - kept
            warnings.warn(
                f"category {cat}: only {kept} detectable sites; filling from another category"
            )
    for _ in range(shortfall):
        if not spares:
            raise RuntimeError("not enough detectable mutants to fill the study set")
        picked.append(spares.pop(0))

    versions = [SutVersion(1, "v1", reference, None)]
    for i, (cat, op, mutant) in enumerate(picked, start=2):
        versions.append(SutVersion(i, f"v{i}", mutant, op))
    return versions


def save_study(versions: list[SutVersion], out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for v in versions:
        fname = f"v{v.version_id:02d}.json"
        (out / fname).write_text(v.diagram.to_json())
        entry = {"version_id": v.version_id, "label": v.label, "file": fname}
        if v.mutation:
            entry.update(v.mutation.to_dict())
        manifest.append(entry)
    (out / "manifest.json").write_text(json.dumps({"versions": manifest}, indent=2))
    return out


def load_study(path: str | Path) -> list[SutVersion]:
    root = Path(path)
    data = json.loads((root / "manifest.json").read_text())
    versions = []
    for entry in data["versions"]:
        diagram = BlockDiagram.from_json((root / entry["file"]).read_text())
        mut = None
        if "category" in entry:
            mut = MutationOp(entry["category"], entry["site"], entry["payload"])
        versions.append(SutVersion(entry["version_id"], entry["label"], diagram, mut))
    return versions
