"""Evolutionary search over two-cell (normal + reduction) network genomes.

The search space is a NASNet-style cell with a variable number of hidden
nodes; the optimizer is a micro-population evolutionary algorithm with
node-level crossover, three mutations, mu+lambda elitist selection and a
two-stage (soft, then hard) stagnation-avoidance mechanism.
"""

from .engine import (
    EvolutionConfig,
    Population,
    RunResult,
    RunState,
    apply_hard_avoidance,
    apply_soft_avoidance,
    event_log_to_jsonl,
    event_to_json,
    evolve,
    initialize,
    sample_parents,
    stagnation_detected,
    survivor_selection,
)
from .errors import (
    BoundsError,
    ConfigError,
    EvaluatorError,
    EvoCellError,
    KindMismatchError,
    ParseError,
    ProtocolError,
    SpatialUnderflowError,
)
from .fitness import (
    CachedEvaluator,
    ConstantEvaluator,
    Evaluator,
    ExternalEvaluator,
    FitnessCache,
    NoisyEvaluator,
    OneMaxEvaluator,
    StructureEvaluator,
    StructureWeights,
)
from .genome import (
    Cell,
    CellKind,
    Genome,
    HiddenNode,
    Individual,
    NodeInput,
    OpKind,
    Violation,
    genome_hash,
    op_from_name,
    parse,
    random_cell,
    random_genome,
    serialize,
    unused_states,
    validate_cell,
    validate_genome,
)
from .materialize import (
    ArchitectureConfig,
    LayerRecord,
    NetworkGraph,
    assemble,
    cell_sequence,
    count_parameters,
    export_dot,
    filter_width,
    graph_to_json,
)
from .variation import (
    VariationParams,
    crossover,
    crossover_cell,
    make_offspring,
    mutate_b,
    mutate_hidden_state,
    mutate_op,
)

__version__ = "0.1.0"
