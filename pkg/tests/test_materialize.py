"""Architecture assembly: channel/spatial bookkeeping, params, DOT/JSON export."""

import json
from random import Random

import pytest

from evocell import (
    ArchitectureConfig,
    Cell,
    CellKind,
    ConfigError,
    EvolutionConfig,
    Genome,
    HiddenNode,
    NodeInput,
    OpKind,
    SpatialUnderflowError,
    assemble,
    cell_sequence,
    count_parameters,
    export_dot,
    filter_width,
    graph_to_json,
    parse,
    random_genome,
    serialize,
)
from evocell.materialize import conv_params
from conftest import build_evo_a


def identity_genome() -> Genome:
    def cell(kind):
        return Cell(
            kind,
            (
                HiddenNode(NodeInput(0, OpKind.IDENTITY), NodeInput(1, OpKind.IDENTITY)),
                HiddenNode(NodeInput(2, OpKind.IDENTITY), NodeInput(2, OpKind.IDENTITY)),
            ),
        )

    return Genome(cell(CellKind.NORMAL), cell(CellKind.REDUCTION))


def test_cell_sequence_layouts():
    N, R = CellKind.NORMAL, CellKind.REDUCTION
    assert cell_sequence(3, 2) == [N, R, N, R, N]
    assert cell_sequence(4, 2) == [N, R, N, R, N, N]
    assert cell_sequence(1, 0) == [N]
    assert cell_sequence(2, 1) == [N, R, N]
    assert cell_sequence(1, 2) == [R, R, N]


def test_conv_params_formula():
    # 3x3 conv, 24 -> 24 channels: weights + bias + batch norm
    assert conv_params(3, 24, 24) == 3 * 3 * 24 * 24 + 24 + 48 == 5256


def test_identity_only_genome_parameterized_layers():
    graph = assemble(identity_genome())
    parameterized = [l for l in graph.layers if l.params > 0]
    assert {l.kind for l in parameterized} == {"conv1x1", "classifier"}
    # hand-built total: five 1x1 projections along the 24/24/48/48/96 stack
    # (cell output is always 2F here) plus the classifier
    expected = (
        (1 * 1 * 24 + 24 + 48)
        + (48 * 24 + 24 + 48)
        + (48 * 48 + 48 + 96)
        + (96 * 48 + 48 + 96)
        + (96 * 96 + 96 + 192)
        + (192 * 10 + 10)
    )
    assert count_parameters(graph) == expected == 19_954


def test_spatial_trace_two_reductions():
    graph = assemble(build_evo_a())
    heights = [l.height for l in graph.layers if l.kind == "avgpool2x2"]
    assert graph.layers[0].height == 28
    assert heights == [14, 7]


def test_filter_width_trace():
    config = ArchitectureConfig()
    assert [filter_width(config, r) for r in range(3)] == [24, 48, 96]
    graph = assemble(build_evo_a(), config)
    projections = [l for l in graph.layers if l.kind == "conv1x1"]
    assert [l.out_channels for l in projections] == [24, 24, 48, 48, 96]


def test_channel_bookkeeping_consistent():
    rng = Random(3)
    config = EvolutionConfig()
    for _ in range(25):
        graph = assemble(random_genome(config, rng))
        for layer in graph.layers:
            if not layer.inputs:
                continue
            produced = sum(graph.layers[i].out_channels for i in layer.inputs)
            if layer.kind in ("concat", "concat_final"):
                assert layer.in_channels == produced
            else:
                assert len(layer.inputs) == 1
                assert layer.in_channels == graph.layers[layer.inputs[0]].out_channels


def test_params_invariant_under_reserialization():
    genome = build_evo_a()
    round_tripped = parse(serialize(genome))
    assert count_parameters(assemble(round_tripped)) == count_parameters(assemble(genome))


def test_params_increase_when_conv_node_appended():
    genome = identity_genome()
    base = count_parameters(assemble(genome))
    # append a conv node wired to the cell inputs: new unused state plus a
    # parameterized op, so the count must strictly grow
    grown_cell = Cell(
        CellKind.NORMAL,
        genome.normal.nodes
        + (HiddenNode(NodeInput(0, OpKind.CONV3X3), NodeInput(1, OpKind.MAXPOOL3X3)),),
    )
    grown = Genome(grown_cell, genome.reduction)
    assert count_parameters(assemble(grown)) > base


def test_spatial_underflow_raises():
    config = ArchitectureConfig(input_shape=(3, 3, 1))
    with pytest.raises(SpatialUnderflowError):
        assemble(build_evo_a(), config)


def test_assemble_rejects_invalid_genome():
    bad_cell = Cell(
        CellKind.NORMAL,
        (HiddenNode(NodeInput(2, OpKind.IDENTITY), NodeInput(0, OpKind.IDENTITY)),),
    )
    genome = Genome(bad_cell, identity_genome().reduction)
    with pytest.raises(ConfigError, match="forward reference"):
        assemble(genome)


def test_export_dot_deterministic():
    genome = build_evo_a()
    assert export_dot(genome.normal) == export_dot(genome.normal)
    assert export_dot(assemble(genome)) == export_dot(assemble(genome))


def test_export_dot_single_node_cell():
    cell = Cell(
        CellKind.NORMAL,
        (HiddenNode(NodeInput(0, OpKind.CONV3X3), NodeInput(1, OpKind.MAXPOOL3X3)),),
    )
    dot = export_dot(cell)
    assert 's0 [label="0"' in dot
    assert 's1 [label="1"' in dot
    assert 'FINAL [label="FINAL"' in dot
    assert 's0 -> s2 [label="conv3x3"];' in dot
    assert 's1 -> s2 [label="maxpool3x3"];' in dot
    assert "s2 -> FINAL;" in dot


def test_export_dot_evo_a_edge_set():
    # frozen edge list for the evo_a normal cell (src, dst, op)
    dot = export_dot(build_evo_a().normal)
    expected_edges = {
        (0, 2, "conv3x3"), (1, 2, "maxpool3x3"),
        (2, 3, "identity"), (0, 3, "avgpool3x3"),
        (3, 4, "maxpool3x3"), (1, 4, "identity"),
        (4, 5, "avgpool3x3"), (4, 5, "identity"),
        (0, 6, "conv3x3"), (5, 6, "identity"),
    }
    seen = set()
    for line in dot.splitlines():
        line = line.strip()
        if "->" in line and "label=" in line:
            src = int(line.split(" ->", 1)[0].lstrip("s"))
            dst = int(line.split("-> s", 1)[1].split(" ", 1)[0])
            op = line.split('label="', 1)[1].split('"', 1)[0]
            seen.add((src, dst, op))
    assert seen == expected_edges
    assert dot.count("-> FINAL") == 1  # single unused state


def test_graph_json_schema():
    graph = assemble(build_evo_a())
    doc = json.loads(graph_to_json(graph))
    assert doc["version"] == 1
    assert doc["num_classes"] == 10
    assert len(doc["layers"]) == len(graph.layers)
    first = doc["layers"][0]
    assert first["kind"] == "input"
    assert set(first) == {
        "kind", "kernel", "in_channels", "out_channels",
        "height", "width", "params", "inputs", "label",
    }
    total = sum(layer["params"] for layer in doc["layers"])
    assert total == count_parameters(graph)


def test_arch_config_validation():
    with pytest.raises(ConfigError):
        ArchitectureConfig(num_normal=0)
    with pytest.raises(ConfigError):
        ArchitectureConfig(input_shape=(0, 28, 1))
    with pytest.raises(ConfigError):
        ArchitectureConfig(num_classes=1)
