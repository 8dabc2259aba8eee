"""Turn a genome into the outer classifier architecture: the alternating
cell stack, channel and spatial bookkeeping, parameter counts, and DOT or
JSON descriptions of the resulting layer graph.

Channel convention: every op inside a cell outputs F = D * K^r channels,
where r counts reduction cells before the current one. A hidden node's
concatenation therefore carries 2F channels and the final concatenation of
U unused states carries 2*U*F. Each cell starts with a 1x1 convolution
mapping whatever arrives from the previous cell to its own F; both logical
cell inputs (states 0 and 1) are that same projected tensor. Convolutions
cost k*k*C_in*C_out + C_out (bias) + 2*C_out (batch norm); identity,
pooling and concatenation cost nothing; the classifier costs
features*classes + classes. Dropout appears as a zero-parameter marker.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ConfigError, SpatialUnderflowError
from .genome import Cell, CellKind, Genome, OpKind, unused_states, validate_genome

_OP_KERNEL: dict[OpKind, int | None] = {
    OpKind.IDENTITY: None,
    OpKind.CONV3X3: 3,
    OpKind.CONV5X5: 5,
    OpKind.CONV7X7: 7,
    OpKind.MAXPOOL3X3: 3,
    OpKind.AVGPOOL3X3: 3,
}
_CONV_OPS = frozenset({OpKind.CONV3X3, OpKind.CONV5X5, OpKind.CONV7X7})


@dataclass(frozen=True)
class ArchitectureConfig:
    """Outer-architecture knobs: cell counts, channel widths, input shape."""

    num_normal: int = 3
    initial_filters: int = 24
    channel_multiplier: int = 2
    num_reductions: int = 2
    input_shape: tuple[int, int, int] = (28, 28, 1)  # height, width, channels
    num_classes: int = 10

    def __post_init__(self) -> None:
        if self.num_normal < 1:
            raise ConfigError(f"num_normal={self.num_normal} must be >= 1")
        if self.initial_filters < 1:
            raise ConfigError(f"initial_filters={self.initial_filters} must be >= 1")
        if self.channel_multiplier < 1:
            raise ConfigError(f"channel_multiplier={self.channel_multiplier} must be >= 1")
        if self.num_reductions < 0:
            raise ConfigError(f"num_reductions={self.num_reductions} must be >= 0")
        if len(self.input_shape) != 3 or min(self.input_shape) < 1:
            raise ConfigError(f"input_shape={self.input_shape} must be three positive ints")
        if self.num_classes < 2:
            raise ConfigError(f"num_classes={self.num_classes} must be >= 2")


@dataclass(frozen=True)
class LayerRecord:
    """One layer of the assembled network.

    ``inputs`` holds indices of the producing records; ``height``/``width``
    are the output spatial size.
    """

    kind: str
    kernel: int | None
    in_channels: int
    out_channels: int
    height: int
    width: int
    params: int
    inputs: tuple[int, ...]
    label: str


@dataclass(frozen=True)
class NetworkGraph:
    layers: tuple[LayerRecord, ...]
    num_classes: int


def conv_params(kernel: int, c_in: int, c_out: int) -> int:
    """Weights + bias + batch-norm scale/shift for one convolution."""
    return kernel * kernel * c_in * c_out + c_out + 2 * c_out


def filter_width(config: ArchitectureConfig, reductions_done: int) -> int:
    """Channel count for cells after ``reductions_done`` reduction cells."""
    return config.initial_filters * config.channel_multiplier**reductions_done


def cell_sequence(num_normal: int, num_reductions: int) -> list[CellKind]:
    """Alternating stack layout: normal groups separated by reductions.

    The normal cells are split across num_reductions+1 groups as evenly as
    possible, extras going to the later (deeper) groups; with 3 normals and
    2 reductions this is N R N R N.
    """
    groups = num_reductions + 1
    base, extra = divmod(num_normal, groups)
    sizes = [base] * groups
    for i in range(extra):
        sizes[groups - 1 - i] += 1
    sequence: list[CellKind] = []
    for gi, size in enumerate(sizes):
        sequence.extend([CellKind.NORMAL] * size)
        if gi < num_reductions:
            sequence.append(CellKind.REDUCTION)
    return sequence


def assemble(genome: Genome, config: ArchitectureConfig | None = None) -> NetworkGraph:
    """Build the layer graph for a genome under the channel convention above.

    Raises SpatialUnderflowError when the input image cannot survive the
    configured number of 2x2 stride-2 poolings.
    """
    config = config or ArchitectureConfig()
    violation = validate_genome(
        genome, b_min=1, b_max=max(genome.normal.b, genome.reduction.b)
    )
    if violation is not None:
        raise ConfigError(f"invalid genome: {violation}")

    records: list[LayerRecord] = []

    def add(record: LayerRecord) -> int:
        records.append(record)
        return len(records) - 1

    height, width, channels = config.input_shape
    prev = add(LayerRecord("input", None, channels, channels, height, width, 0, (), "input"))
    prev_channels = channels
    reductions_done = 0

    for pos, kind in enumerate(cell_sequence(config.num_normal, config.num_reductions)):
        filters = filter_width(config, reductions_done)
        cell = genome.normal if kind is CellKind.NORMAL else genome.reduction
        name = f"c{pos + 1}.{kind.value}"

        proj = add(
            LayerRecord(
                "conv1x1", 1, prev_channels, filters, height, width,
                conv_params(1, prev_channels, filters), (prev,), f"{name}.in",
            )
        )
        state_record = {0: proj, 1: proj}
        state_channels = {0: filters, 1: filters}

        for j, node in enumerate(cell.nodes, start=1):
            halves = []
            for side, pair in (("left", node.left), ("right", node.right)):
                c_in = state_channels[pair.src]
                kernel = _OP_KERNEL[pair.op]
                params = conv_params(kernel, c_in, filters) if pair.op in _CONV_OPS else 0
                halves.append(
                    add(
                        LayerRecord(
                            pair.op.value, kernel, c_in, filters, height, width,
                            params, (state_record[pair.src],),
                            f"{name}.n{j}.{side}",
                        )
                    )
                )
            state_record[j + 1] = add(
                LayerRecord(
                    "concat", None, 2 * filters, 2 * filters, height, width,
                    0, tuple(halves), f"{name}.n{j}.concat",
                )
            )
            state_channels[j + 1] = 2 * filters

        unused = sorted(unused_states(cell))
        out_channels = sum(state_channels[s] for s in unused)
        prev = add(
            LayerRecord(
                "concat_final", None, out_channels, out_channels, height, width,
                0, tuple(state_record[s] for s in unused), f"{name}.final",
            )
        )
        prev_channels = out_channels

        if kind is CellKind.REDUCTION:
            if height < 2 or width < 2:
                raise SpatialUnderflowError(
                    f"spatial size {height}x{width} too small for 2x2 stride-2 "
                    f"pooling after {name}"
                )
            height //= 2
            width //= 2
            prev = add(
                LayerRecord(
                    "avgpool2x2", 2, prev_channels, prev_channels, height, width,
                    0, (prev,), f"{name}.reduce",
                )
            )
            reductions_done += 1

    gap = add(
        LayerRecord(
            "global_avgpool", None, prev_channels, prev_channels, 1, 1,
            0, (prev,), "head.gap",
        )
    )
    drop = add(
        LayerRecord(
            "dropout", None, prev_channels, prev_channels, 1, 1, 0, (gap,), "head.dropout"
        )
    )
    add(
        LayerRecord(
            "classifier", None, prev_channels, config.num_classes, 1, 1,
            prev_channels * config.num_classes + config.num_classes,
            (drop,), "head.classifier",
        )
    )
    return NetworkGraph(tuple(records), config.num_classes)


def count_parameters(graph: NetworkGraph) -> int:
    return sum(layer.params for layer in graph.layers)


def _cell_to_dot(cell: Cell) -> str:
    lines = [f"digraph {cell.kind.value}_cell {{", "  rankdir=TB;"]
    lines.append('  s0 [label="0" shape=box];')
    lines.append('  s1 [label="1" shape=box];')
    for j in range(1, cell.b + 1):
        lines.append(f'  s{j + 1} [label="{j + 1}"];')
    lines.append('  FINAL [label="FINAL" shape=box];')
    for j, node in enumerate(cell.nodes, start=1):
        for pair in (node.left, node.right):
            lines.append(f'  s{pair.src} -> s{j + 1} [label="{pair.op.value}"];')
    for state in sorted(unused_states(cell)):
        lines.append(f"  s{state} -> FINAL;")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _graph_to_dot(graph: NetworkGraph) -> str:
    lines = ["digraph network {", "  rankdir=TB;"]
    for idx, layer in enumerate(graph.layers):
        text = f"{layer.label}\\n{layer.kind} {layer.in_channels}->{layer.out_channels}"
        lines.append(f'  n{idx} [label="{text}"];')
    for idx, layer in enumerate(graph.layers):
        for src in layer.inputs:
            lines.append(f"  n{src} -> n{idx};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(obj: Cell | NetworkGraph) -> str:
    """Deterministic DOT text for a cell (Fig-style: inputs 0/1, output
    FINAL, op-labeled edges) or for a whole assembled network."""
    if isinstance(obj, Cell):
        return _cell_to_dot(obj)
    if isinstance(obj, NetworkGraph):
        return _graph_to_dot(obj)
    raise TypeError(f"cannot render {type(obj).__name__} as DOT")


def graph_to_json(graph: NetworkGraph) -> str:
    """Layer-list JSON mirroring the record fields, one object per layer."""
    doc = {
        "version": 1,
        "num_classes": graph.num_classes,
        "layers": [
            {
                "kind": layer.kind,
                "kernel": layer.kernel,
                "in_channels": layer.in_channels,
                "out_channels": layer.out_channels,
                "height": layer.height,
                "width": layer.width,
                "params": layer.params,
                "inputs": list(layer.inputs),
                "label": layer.label,
            }
            for layer in graph.layers
        ],
    }
    return json.dumps(doc, separators=(",", ":"))
