"""Cell and genome data model for the NASNet-like search space.

A cell is an ordered list of B hidden nodes over two input states (indices
0 and 1). Hidden node j (1-indexed) produces state j+1 and combines two
(source-state, operation) pairs; each source must reference a strictly
earlier state, so cells are feed-forward by construction. Hidden states
consumed by no later node are "unused" and form the cell output.

A genome pairs one normal cell with one reduction cell; the two may have
different B. All types are immutable and safe to share across workers.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from random import Random
from typing import Any

from .errors import BoundsError, ParseError

B_MIN_DEFAULT = 2
B_MAX_DEFAULT = 6


class OpKind(enum.Enum):
    """The six operations a hidden node may apply to an input state."""

    IDENTITY = "identity"
    CONV3X3 = "conv3x3"
    CONV5X5 = "conv5x5"
    CONV7X7 = "conv7x7"
    MAXPOOL3X3 = "maxpool3x3"
    AVGPOOL3X3 = "avgpool3x3"


# Canonical draw order for uniform sampling.
OPS: tuple[OpKind, ...] = tuple(OpKind)
_OP_BY_NAME = {op.value: op for op in OPS}


def op_from_name(name: str) -> OpKind:
    """Map a canonical op name to its OpKind; unknown names are an error."""
    try:
        return _OP_BY_NAME[name]
    except KeyError:
        raise ParseError(f"unknown op {name!r}") from None


class CellKind(enum.Enum):
    NORMAL = "normal"
    REDUCTION = "reduction"


@dataclass(frozen=True, slots=True)
class NodeInput:
    """One (source state, operation) half of a hidden node."""

    src: int
    op: OpKind


@dataclass(frozen=True, slots=True)
class HiddenNode:
    """A pairwise combination: two inputs whose op outputs are concatenated."""

    left: NodeInput
    right: NodeInput

    def inputs(self) -> tuple[NodeInput, NodeInput]:
        return (self.left, self.right)


@dataclass(frozen=True, slots=True)
class Cell:
    kind: CellKind
    nodes: tuple[HiddenNode, ...]

    @property
    def b(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True, slots=True)
class Genome:
    """A normal cell plus a reduction cell; the unit of evolution.

    ``id`` is a creation counter assigned by the engine; equality is
    structural and ignores it.
    """

    normal: Cell
    reduction: Cell
    id: int = field(default=-1, compare=False)


@dataclass(frozen=True, slots=True)
class Individual:
    """An evaluated genome. Fitness, once set, is never rewritten."""

    genome: Genome
    fitness: float | None
    creation_index: int


@dataclass(frozen=True, slots=True)
class Violation:
    """First structural rule a cell breaks; ``node`` is 1-indexed or None."""

    rule: str
    node: int | None
    message: str

    def __str__(self) -> str:
        return self.message


def random_cell(
    kind: CellKind,
    b: int,
    rng: Random,
    b_min: int = B_MIN_DEFAULT,
    b_max: int = B_MAX_DEFAULT,
) -> Cell:
    """Draw a uniformly random valid cell with exactly ``b`` hidden nodes.

    Node j draws, in order: left src (uniform over the j+1 prior states),
    left op, right src, right op. Identical seeds yield identical cells.
    """
    if not b_min <= b <= b_max:
        raise BoundsError(f"b={b} outside [{b_min}, {b_max}]")
    nodes = []
    for j in range(1, b + 1):
        left = NodeInput(rng.randrange(j + 1), OPS[rng.randrange(len(OPS))])
        right = NodeInput(rng.randrange(j + 1), OPS[rng.randrange(len(OPS))])
        nodes.append(HiddenNode(left, right))
    return Cell(kind, tuple(nodes))


def initial_b_range(b_min: int, b_max: int) -> tuple[int, int]:
    """Inclusive range initial cells draw B from: [b_min, floor(b_max/2)].

    The upper bound never drops below b_min, so the range stays non-empty
    for configs where floor(b_max/2) < b_min.
    """
    return b_min, max(b_min, b_max // 2)


def random_genome(config: Any, rng: Random) -> Genome:
    """Draw a random genome; each cell's initial B is sampled independently.

    ``config`` needs only ``b_min`` and ``b_max`` attributes.
    """
    lo, hi = initial_b_range(config.b_min, config.b_max)
    b_normal = rng.randint(lo, hi)
    normal = random_cell(CellKind.NORMAL, b_normal, rng, config.b_min, config.b_max)
    b_reduction = rng.randint(lo, hi)
    reduction = random_cell(CellKind.REDUCTION, b_reduction, rng, config.b_min, config.b_max)
    return Genome(normal, reduction)


def validate_cell(
    cell: Cell, b_min: int = B_MIN_DEFAULT, b_max: int = B_MAX_DEFAULT
) -> Violation | None:
    """Return None if the cell is valid, else the first violated rule."""
    if not b_min <= cell.b <= b_max:
        return Violation(
            "b_bounds", None, f"B={cell.b} outside [{b_min}, {b_max}]"
        )
    for j, node in enumerate(cell.nodes, start=1):
        for side, pair in (("left", node.left), ("right", node.right)):
            if pair.src < 0:
                return Violation(
                    "negative_src", j, f"negative source {pair.src} at node {j} ({side})"
                )
            if pair.src > j:
                return Violation(
                    "forward_reference",
                    j,
                    f"forward reference at node {j}: {side} src {pair.src} >= {j + 1}",
                )
            if not isinstance(pair.op, OpKind):
                return Violation("bad_op", j, f"non-op value at node {j} ({side})")
    return None


def validate_genome(
    genome: Genome, b_min: int = B_MIN_DEFAULT, b_max: int = B_MAX_DEFAULT
) -> Violation | None:
    """Validate both cells plus the kind labels; first violation wins."""
    if genome.normal.kind is not CellKind.NORMAL:
        return Violation("cell_kind", None, "normal slot holds a non-normal cell")
    if genome.reduction.kind is not CellKind.REDUCTION:
        return Violation("cell_kind", None, "reduction slot holds a non-reduction cell")
    for cell in (genome.normal, genome.reduction):
        violation = validate_cell(cell, b_min, b_max)
        if violation is not None:
            return Violation(
                violation.rule, violation.node, f"{cell.kind.value} cell: {violation.message}"
            )
    return None


def unused_states(cell: Cell) -> frozenset[int]:
    """Hidden-state indices (2..B+1) consumed by no node.

    Cell inputs 0/1 never appear here; only unused hidden states are
    concatenated into the cell output. The last node's state is always
    present because nothing can reference it.
    """
    used = {pair.src for node in cell.nodes for pair in node.inputs()}
    return frozenset(i for i in range(2, cell.b + 2) if i not in used)


# --- canonical serialization ------------------------------------------------
#
# Schema (field order is part of the format so output is byte-stable):
# {"version":1,"normal":{"kind":"normal","nodes":[{"left":{"src":0,"op":"conv3x3"},
#  "right":{"src":1,"op":"maxpool3x3"}},...]},"reduction":{...}}

SCHEMA_VERSION = 1


def _cell_doc(cell: Cell) -> dict:
    return {
        "kind": cell.kind.value,
        "nodes": [
            {
                "left": {"src": node.left.src, "op": node.left.op.value},
                "right": {"src": node.right.src, "op": node.right.op.value},
            }
            for node in cell.nodes
        ],
    }


def serialize(genome: Genome) -> str:
    """Canonical single-line JSON; equal genomes serialize byte-identically."""
    doc = {
        "version": SCHEMA_VERSION,
        "normal": _cell_doc(genome.normal),
        "reduction": _cell_doc(genome.reduction),
    }
    return json.dumps(doc, separators=(",", ":"))


def genome_hash(genome: Genome) -> str:
    """SHA-256 of the canonical serialization; stable id for caching/logs."""
    return hashlib.sha256(serialize(genome).encode("utf-8")).hexdigest()


def _expect_keys(obj: dict, keys: tuple[str, ...], path: str) -> None:
    for key in keys:
        if key not in obj:
            raise ParseError(f"{path}: missing field {key!r}")
    for key in obj:
        if key not in keys:
            raise ParseError(f"{path}: unknown field {key!r}")


def _parse_pair(doc: Any, j: int, path: str) -> NodeInput:
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected object")
    _expect_keys(doc, ("src", "op"), path)
    src = doc["src"]
    if not isinstance(src, int) or isinstance(src, bool):
        raise ParseError(f"{path}.src: expected integer, got {src!r}")
    if src < 0 or src > j:
        raise ParseError(f"{path}.src: {src} breaks feed-forward order (node {j} allows 0..{j})")
    op_name = doc["op"]
    if not isinstance(op_name, str) or op_name not in _OP_BY_NAME:
        raise ParseError(f"{path}.op: unknown op {op_name!r}")
    return NodeInput(src, _OP_BY_NAME[op_name])


def _parse_cell(doc: Any, kind: CellKind, b_min: int, b_max: int, path: str) -> Cell:
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected object")
    _expect_keys(doc, ("kind", "nodes"), path)
    if doc["kind"] != kind.value:
        raise ParseError(f"{path}.kind: expected {kind.value!r}, got {doc['kind']!r}")
    nodes_doc = doc["nodes"]
    if not isinstance(nodes_doc, list):
        raise ParseError(f"{path}.nodes: expected array")
    if not b_min <= len(nodes_doc) <= b_max:
        raise ParseError(f"{path}.nodes: B={len(nodes_doc)} outside [{b_min}, {b_max}]")
    nodes = []
    for idx, node_doc in enumerate(nodes_doc):
        node_path = f"{path}.nodes[{idx}]"
        if not isinstance(node_doc, dict):
            raise ParseError(f"{node_path}: expected object")
        _expect_keys(node_doc, ("left", "right"), node_path)
        j = idx + 1
        left = _parse_pair(node_doc["left"], j, f"{node_path}.left")
        right = _parse_pair(node_doc["right"], j, f"{node_path}.right")
        nodes.append(HiddenNode(left, right))
    return Cell(kind, tuple(nodes))


def parse(text: str, b_min: int = B_MIN_DEFAULT, b_max: int = B_MAX_DEFAULT) -> Genome:
    """Parse a canonical genome document; inverse of :func:`serialize`.

    Rejects unknown ops, forward references, out-of-bounds B and schema
    drift, naming the offending JSON path.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level: expected object")
    _expect_keys(doc, ("version", "normal", "reduction"), "top level")
    if doc["version"] != SCHEMA_VERSION:
        raise ParseError(f"version: expected {SCHEMA_VERSION}, got {doc['version']!r}")
    normal = _parse_cell(doc["normal"], CellKind.NORMAL, b_min, b_max, "normal")
    reduction = _parse_cell(doc["reduction"], CellKind.REDUCTION, b_min, b_max, "reduction")
    return Genome(normal, reduction)
