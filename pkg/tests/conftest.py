"""Shared fixtures: the frozen evo_a/evo_b genomes and small run configs."""

import sys
from pathlib import Path
from random import Random

import pytest

from evocell import (
    Cell,
    CellKind,
    EvolutionConfig,
    Genome,
    HiddenNode,
    NodeInput,
    OpKind,
    VariationParams,
)

FIXTURES = Path(__file__).parent / "fixtures"
MOCK_EVAL = Path(__file__).parent / "mock_eval.py"

O = OpKind


def _node(ls, lo, rs, ro):
    return HiddenNode(NodeInput(ls, lo), NodeInput(rs, ro))


def build_evo_a() -> Genome:
    """The evo_a reference genome: normal cell B=5, reduction cell B=6."""
    normal = Cell(
        CellKind.NORMAL,
        (
            _node(0, O.CONV3X3, 1, O.MAXPOOL3X3),
            _node(2, O.IDENTITY, 0, O.AVGPOOL3X3),
            _node(3, O.MAXPOOL3X3, 1, O.IDENTITY),
            _node(4, O.AVGPOOL3X3, 4, O.IDENTITY),
            _node(0, O.CONV3X3, 5, O.IDENTITY),
        ),
    )
    reduction = Cell(
        CellKind.REDUCTION,
        (
            _node(1, O.CONV5X5, 0, O.IDENTITY),
            _node(0, O.MAXPOOL3X3, 2, O.IDENTITY),
            _node(1, O.AVGPOOL3X3, 3, O.MAXPOOL3X3),
            _node(4, O.IDENTITY, 0, O.CONV3X3),
            _node(5, O.AVGPOOL3X3, 2, O.IDENTITY),
            _node(6, O.IDENTITY, 1, O.MAXPOOL3X3),
        ),
    )
    return Genome(normal, reduction)


def build_evo_b() -> Genome:
    """Second serialization fixture; exercises conv7x7 and duplicate sources."""
    normal = Cell(
        CellKind.NORMAL,
        (
            _node(0, O.CONV7X7, 0, O.IDENTITY),
            _node(1, O.MAXPOOL3X3, 2, O.CONV3X3),
            _node(3, O.IDENTITY, 3, O.AVGPOOL3X3),
            _node(2, O.CONV5X5, 1, O.IDENTITY),
        ),
    )
    reduction = Cell(
        CellKind.REDUCTION,
        (
            _node(1, O.AVGPOOL3X3, 0, O.CONV3X3),
            _node(2, O.CONV5X5, 1, O.MAXPOOL3X3),
            _node(0, O.IDENTITY, 3, O.IDENTITY),
            _node(4, O.MAXPOOL3X3, 2, O.CONV7X7),
            _node(1, O.CONV3X3, 5, O.AVGPOOL3X3),
        ),
    )
    return Genome(normal, reduction)


@pytest.fixture
def evo_a() -> Genome:
    return build_evo_a()


@pytest.fixture
def evo_b() -> Genome:
    return build_evo_b()


@pytest.fixture
def rng() -> Random:
    return Random(1234)


def small_config(**overrides) -> EvolutionConfig:
    """Fast engine config for unit tests (population 6, 5 generations)."""
    defaults = dict(
        population_size=6,
        offspring_per_gen=4,
        sample_size=2,
        generations=5,
        seed=7,
    )
    defaults.update(overrides)
    return EvolutionConfig(**defaults)


def mock_eval_command(mode: str) -> str:
    return f"{sys.executable} {MOCK_EVAL} {mode}"


def all_taus(value: float) -> VariationParams:
    return VariationParams(
        tau_cross=value, tau_m_op=value, tau_m_edge=value, tau_b=value
    )
