"""Crossover and the three mutation operators that breed offspring genomes.

All operators are pure functions over immutable genomes plus an explicit
random stream, and they map valid genomes to valid genomes. Probability
gates use a fresh uniform draw compared with ``<``, so a rate of 0.0 is
exactly never and 1.0 is exactly always.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from random import Random
from typing import Any

from .errors import ConfigError, KindMismatchError
from .genome import OPS, Cell, Genome, HiddenNode, NodeInput


def _check_probability(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name}={value} outside [0, 1]")


@dataclass(frozen=True, slots=True)
class VariationParams:
    """Per-offspring probabilities for crossover and the three mutations."""

    tau_cross: float = 0.6
    tau_m_op: float = 0.4
    tau_m_edge: float = 0.4
    tau_b: float = 0.2

    def __post_init__(self) -> None:
        for name in ("tau_cross", "tau_m_op", "tau_m_edge", "tau_b"):
            _check_probability(name, getattr(self, name))


def crossover_cell(c1: Cell, c2: Cell, tau_cross: float, rng: Random) -> Cell:
    """Merge two same-kind cells node by node.

    The offspring has max(B1, B2) nodes. For each shared position a fresh
    coin picks the winner parent's node (probability ``tau_cross``, c1)
    or the random parent's (c2); tail positions come verbatim from the
    larger parent. Nodes are copied without modification, so feed-forward
    validity is preserved.
    """
    if c1.kind is not c2.kind:
        raise KindMismatchError(f"cannot cross {c1.kind.value} cell with {c2.kind.value} cell")
    shared = min(c1.b, c2.b)
    nodes = [
        c1.nodes[j] if rng.random() < tau_cross else c2.nodes[j] for j in range(shared)
    ]
    tail_parent = c1 if c1.b >= c2.b else c2
    nodes.extend(tail_parent.nodes[shared:])
    return Cell(c1.kind, tuple(nodes))


def crossover(p1: Genome, p2: Genome, params: VariationParams, rng: Random) -> Genome:
    """Apply crossover_cell to the normal pair, then the reduction pair.

    The two cells use independent coin flips; p1 must be the tournament
    winner for the exploit/explore reading of tau_cross to hold.
    """
    normal = crossover_cell(p1.normal, p2.normal, params.tau_cross, rng)
    reduction = crossover_cell(p1.reduction, p2.reduction, params.tau_cross, rng)
    return Genome(normal, reduction)


def _replace_node(genome: Genome, in_normal: bool, idx: int, node: HiddenNode) -> Genome:
    cell = genome.normal if in_normal else genome.reduction
    nodes = cell.nodes[:idx] + (node,) + cell.nodes[idx + 1 :]
    new_cell = Cell(cell.kind, nodes)
    if in_normal:
        return replace(genome, normal=new_cell)
    return replace(genome, reduction=new_cell)


def mutate_op(genome: Genome, params: VariationParams, rng: Random) -> Genome:
    """With probability tau_m_op, swap one uniformly chosen op for another.

    Cell, node and side are uniform; the replacement is uniform over the
    five ops other than the current one. At most one op field changes.
    """
    if rng.random() >= params.tau_m_op:
        return genome
    in_normal = rng.randrange(2) == 0
    cell = genome.normal if in_normal else genome.reduction
    idx = rng.randrange(cell.b)
    node = cell.nodes[idx]
    left_side = rng.randrange(2) == 0
    pair = node.left if left_side else node.right
    alternatives = [op for op in OPS if op is not pair.op]
    new_pair = NodeInput(pair.src, alternatives[rng.randrange(len(alternatives))])
    new_node = HiddenNode(new_pair, node.right) if left_side else HiddenNode(node.left, new_pair)
    return _replace_node(genome, in_normal, idx, new_node)


def mutate_hidden_state(genome: Genome, params: VariationParams, rng: Random) -> Genome:
    """With probability tau_m_edge, rewire one input to a different prior state.

    Node j's side keeps feed-forward validity by drawing uniformly from
    states 0..j excluding the current source; even node 1 always has one
    alternative per side.
    """
    if rng.random() >= params.tau_m_edge:
        return genome
    in_normal = rng.randrange(2) == 0
    cell = genome.normal if in_normal else genome.reduction
    idx = rng.randrange(cell.b)
    node = cell.nodes[idx]
    left_side = rng.randrange(2) == 0
    pair = node.left if left_side else node.right
    j = idx + 1
    alternatives = [s for s in range(j + 1) if s != pair.src]
    new_pair = NodeInput(alternatives[rng.randrange(len(alternatives))], pair.op)
    new_node = HiddenNode(new_pair, node.right) if left_side else HiddenNode(node.left, new_pair)
    return _replace_node(genome, in_normal, idx, new_node)


def mutate_b(genome: Genome, config: Any, params: VariationParams, rng: Random) -> Genome:
    """With probability tau_b, append one random hidden node to one cell.

    The chosen cell grows from B to B+1 unless it already sits at b_max,
    in which case nothing happens (the coin is still consumed). B never
    decreases. ``config`` needs only a ``b_max`` attribute.
    """
    if rng.random() >= params.tau_b:
        return genome
    in_normal = rng.randrange(2) == 0
    cell = genome.normal if in_normal else genome.reduction
    if cell.b >= config.b_max:
        return genome
    j = cell.b + 1  # new node position; states 0..B+1 are all fair game
    left = NodeInput(rng.randrange(j + 1), OPS[rng.randrange(len(OPS))])
    right = NodeInput(rng.randrange(j + 1), OPS[rng.randrange(len(OPS))])
    new_cell = Cell(cell.kind, cell.nodes + (HiddenNode(left, right),))
    if in_normal:
        return replace(genome, normal=new_cell)
    return replace(genome, reduction=new_cell)


def make_offspring(
    p1: Genome, p2: Genome, config: Any, params: VariationParams, rng: Random
) -> Genome:
    """Breed one offspring: crossover, then op, edge and B mutations in order.

    Each stage flips its own coin, so zero, one or all of the mutations may
    fire on a single offspring.
    """
    child = crossover(p1, p2, params, rng)
    child = mutate_op(child, params, rng)
    child = mutate_hidden_state(child, params, rng)
    child = mutate_b(child, config, params, rng)
    return child
