"""Build a torch classifier from a genome document.

The genome JSON (see the engine's schema) lists, per cell, B hidden nodes
of two (source-state, op) pairs. The network stacks normal and reduction
cells alternately, projects each cell's input to its width F with a 1x1
convolution (both logical inputs 0 and 1 are that tensor), applies 2x2
stride-2 average pooling after each reduction cell, and ends with global
average pooling, dropout and a linear classifier. F doubles after each
reduction (more generally, times the channel multiplier).

Channel widths are executable: convolutions project to F, while identity
and pooling keep their input width (a parameter-free op cannot change
channel count). Wiring is otherwise exactly the engine's convention.
"""

from __future__ import annotations

import torch
from torch import nn

from .settings import TrainerSettings

OP_NAMES = ("identity", "conv3x3", "conv5x5", "conv7x7", "maxpool3x3", "avgpool3x3")
_CONV_KERNEL = {"conv3x3": 3, "conv5x5": 5, "conv7x7": 7}


class GenomeError(ValueError):
    """The genome document is malformed or unbuildable."""


def parse_genome(doc) -> dict:
    """Validate a genome document; returns {.kind.: [((src, op), (src, op)), ...]}."""
    if not isinstance(doc, dict):
        raise GenomeError("genome: expected object")
    if doc.get("version") != 1:
        raise GenomeError(f"genome.version: expected 1, got {doc.get('version')!r}")
    cells = {}
    for kind in ("normal", "reduction"):
        cell_doc = doc.get(kind)
        if not isinstance(cell_doc, dict) or cell_doc.get("kind") != kind:
            raise GenomeError(f"genome.{kind}: missing or mislabeled cell")
        nodes_doc = cell_doc.get("nodes")
        if not isinstance(nodes_doc, list) or not nodes_doc:
            raise GenomeError(f"genome.{kind}.nodes: expected non-empty array")
        nodes = []
        for idx, node_doc in enumerate(nodes_doc):
            pairs = []
            for side in ("left", "right"):
                pair = node_doc.get(side) if isinstance(node_doc, dict) else None
                if not isinstance(pair, dict):
                    raise GenomeError(f"genome.{kind}.nodes[{idx}].{side}: expected object")
                src, op = pair.get("src"), pair.get("op")
                if not isinstance(src, int) or not 0 <= src <= idx + 1:
                    raise GenomeError(
                        f"genome.{kind}.nodes[{idx}].{side}.src: {src!r} breaks feed-forward order"
                    )
                if op not in OP_NAMES:
                    raise GenomeError(f"genome.{kind}.nodes[{idx}].{side}.op: unknown op {op!r}")
                pairs.append((src, op))
            nodes.append(tuple(pairs))
        cells[kind] = nodes
    return cells


def cell_sequence(num_normal: int, num_reductions: int) -> list[str]:
    """Normal cells split as evenly as possible around the reductions,
    extras to the deeper groups; 3 normals + 2 reductions -> N R N R N."""
    groups = num_reductions + 1
    base, extra = divmod(num_normal, groups)
    sizes = [base] * groups
    for i in range(extra):
        sizes[groups - 1 - i] += 1
    sequence: list[str] = []
    for gi, size in enumerate(sizes):
        sequence.extend(["normal"] * size)
        if gi < num_reductions:
            sequence.append("reduction")
    return sequence


def _make_op(name: str, in_channels: int, filters: int, bn_momentum: float):
    """Returns (module, out_channels) for one op applied to a state."""
    if name in _CONV_KERNEL:
        k = _CONV_KERNEL[name]
        module = nn.Sequential(
            nn.Conv2d(in_channels, filters, k, padding=k // 2),
            nn.BatchNorm2d(filters, momentum=bn_momentum),
            nn.ReLU(inplace=True),
        )
        return module, filters
    if name == "maxpool3x3":
        return nn.MaxPool2d(3, stride=1, padding=1), in_channels
    if name == "avgpool3x3":
        return nn.AvgPool2d(3, stride=1, padding=1), in_channels
    return nn.Identity(), in_channels


class CellModule(nn.Module):
    """One cell: input projection, B pairwise nodes, unused-state concat."""

    def __init__(self, nodes, in_channels: int, filters: int, bn_momentum: float):
        super().__init__()
        self.project = nn.Sequential(
            nn.Conv2d(in_channels, filters, 1),
            nn.BatchNorm2d(filters, momentum=bn_momentum),
            nn.ReLU(inplace=True),
        )
        self.sources = []
        self.ops = nn.ModuleList()
        state_channels = {0: filters, 1: filters}
        consumed = set()
        for j, ((ls, lo), (rs, ro)) in enumerate(nodes, start=1):
            width = 0
            for src, op_name in ((ls, lo), (rs, ro)):
                module, out = _make_op(op_name, state_channels[src], filters, bn_momentum)
                self.ops.append(module)
                self.sources.append(src)
                consumed.add(src)
                width += out
            state_channels[j + 1] = width
        self.unused = sorted(s for s in range(2, len(nodes) + 2) if s not in consumed)
        self.out_channels = sum(state_channels[s] for s in self.unused)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        projected = self.project(x)
        states = {0: projected, 1: projected}
        for j in range(len(self.sources) // 2):
            left = self.ops[2 * j](states[self.sources[2 * j]])
            right = self.ops[2 * j + 1](states[self.sources[2 * j + 1]])
            states[j + 2] = torch.cat((left, right), dim=1)
        return torch.cat([states[s] for s in self.unused], dim=1)


class GenomeNet(nn.Module):
    """The assembled classifier for one genome."""

    def __init__(self, genome_doc, settings: TrainerSettings, in_channels: int = 1):
        super().__init__()
        cells = parse_genome(genome_doc)
        spatial = settings.image_size
        stack: list[nn.Module] = []
        channels = in_channels
        reductions_done = 0
        for kind in cell_sequence(settings.num_normal, settings.num_reductions):
            filters = settings.filters * settings.channel_multiplier**reductions_done
            cell = CellModule(cells[kind], channels, filters, settings.bn_momentum)
            stack.append(cell)
            channels = cell.out_channels
            if kind == "reduction":
                if spatial < 2:
                    raise GenomeError(
                        f"input collapses to {spatial}px before reduction "
                        f"{reductions_done + 1}; too many reductions for this image size"
                    )
                stack.append(nn.AvgPool2d(2, stride=2))
                spatial //= 2
                reductions_done += 1
        self.stack = nn.Sequential(*stack)
        self.head = nn.Sequential(
            nn.AdaptiveAvgPool2d(1),
            nn.Flatten(),
            nn.Dropout(settings.dropout),
            nn.Linear(channels, settings.num_classes),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.stack(x))


def build_network(genome_doc, settings: TrainerSettings, in_channels: int = 1) -> GenomeNet:
    return GenomeNet(genome_doc, settings, in_channels)
