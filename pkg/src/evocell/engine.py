"""Population lifecycle: tournament parent sampling, mu+lambda survivor
selection, stagnation detection and the soft/hard avoidance mechanisms.

The generation loop is sequential; the offspring evaluations inside one
generation may run on a thread pool when the evaluator declares itself
concurrency-safe. All randomness is pre-drawn on the main thread before
dispatch, so results do not depend on evaluation completion order.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from random import Random
from typing import Callable, Sequence

from .errors import ConfigError, EvaluatorError
from .fitness import Evaluator
from .genome import Genome, Individual, genome_hash, random_genome
from .variation import (
    VariationParams,
    make_offspring,
    mutate_b,
    mutate_hidden_state,
    mutate_op,
)

log = logging.getLogger("evocell.engine")

EVENT_EVAL = "eval"
EVENT_SOFT_AVOID = "soft_avoid"
EVENT_HARD_AVOID = "hard_avoid"
EVENT_GEN_END = "gen_end"


@dataclass(frozen=True)
class EvolutionConfig:
    """Run parameters; defaults are the reference setup this library ships.

    ``crossover_enabled=False`` replaces crossover with a clone of the
    tournament winner (mutations still apply), for ablation runs.
    ``steady_state_insertion=True`` inserts each offspring into the
    population before the next parent sampling instead of breeding the
    whole batch from a generation-start snapshot.
    """

    population_size: int = 10
    offspring_per_gen: int = 10
    sample_size: int = 2
    generations: int = 200
    b_min: int = 2
    b_max: int = 6
    variation: VariationParams = field(default_factory=VariationParams)
    tau_m_op_avoid: float = 0.6
    tau_m_edge_avoid: float = 0.6
    a_stag: int = 40
    stagnation_warmup: int = 50
    seed: int = 0
    crossover_enabled: bool = True
    steady_state_insertion: bool = False

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ConfigError(f"population_size={self.population_size} must be >= 2")
        if self.offspring_per_gen < 1:
            raise ConfigError(f"offspring_per_gen={self.offspring_per_gen} must be >= 1")
        if not 1 <= self.sample_size <= self.population_size:
            raise ConfigError(
                f"sample_size={self.sample_size} outside [1, {self.population_size}]"
            )
        if self.generations < 0:
            raise ConfigError(f"generations={self.generations} must be >= 0")
        if not 1 <= self.b_min <= self.b_max:
            raise ConfigError(f"need 1 <= b_min <= b_max, got [{self.b_min}, {self.b_max}]")
        for name in ("tau_m_op_avoid", "tau_m_edge_avoid"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name}={value} outside [0, 1]")
        if self.a_stag < 1:
            raise ConfigError(f"a_stag={self.a_stag} must be >= 1")
        if self.stagnation_warmup < 0:
            raise ConfigError(f"stagnation_warmup={self.stagnation_warmup} must be >= 0")


@dataclass
class Population:
    """Members plus the monotone creation counter for the next genome."""

    members: list[Individual]
    next_creation_index: int


@dataclass
class RunState:
    generation: int = 0
    best_fitness_history: list[float] = field(default_factory=list)
    no_improve_streak: int = 0
    soft_tried: bool = False
    event_log: list[dict] = field(default_factory=list)


@dataclass
class RunResult:
    best: Individual
    state: RunState
    population: Population
    params: VariationParams  # final values, reflecting any soft avoidance


def event_to_json(record: dict) -> str:
    """Canonical one-line JSON for an event record (insertion key order)."""
    return json.dumps(record, separators=(",", ":"))


def event_log_to_jsonl(records: Sequence[dict]) -> str:
    return "".join(event_to_json(record) + "\n" for record in records)


def _rank_key(ind: Individual):
    # Higher fitness wins; equal fitness prefers the oldest member.
    return (ind.fitness, -ind.creation_index)


def _score_one(evaluator: Evaluator, genome: Genome) -> float:
    try:
        fitness = evaluator.score(genome)
    except EvaluatorError as exc:
        if exc.genome_hash is None:
            exc.genome_hash = genome_hash(genome)
        raise
    except Exception as exc:
        raise EvaluatorError(
            f"evaluator raised {type(exc).__name__}: {exc}", genome_hash(genome)
        ) from exc
    if not isinstance(fitness, (int, float)) or isinstance(fitness, bool) or not (
        0.0 <= fitness <= 1.0
    ):
        raise EvaluatorError(f"fitness {fitness!r} outside [0, 1]", genome_hash(genome))
    return float(fitness)


def _evaluate_batch(
    genomes: Sequence[Genome],
    evaluator: Evaluator,
    pool: ThreadPoolExecutor | None,
) -> list[float]:
    if pool is not None and len(genomes) > 1:
        return list(pool.map(lambda g: _score_one(evaluator, g), genomes))
    return [_score_one(evaluator, genome) for genome in genomes]


def initialize(
    config: EvolutionConfig,
    evaluator: Evaluator,
    rng: Random,
    pool: ThreadPoolExecutor | None = None,
) -> Population:
    """Create and evaluate the initial population; creation indices 0..P-1."""
    genomes = [
        replace(random_genome(config, rng), id=i) for i in range(config.population_size)
    ]
    fitnesses = _evaluate_batch(genomes, evaluator, pool)
    members = [
        Individual(genome, fitness, genome.id)
        for genome, fitness in zip(genomes, fitnesses)
    ]
    return Population(members, next_creation_index=config.population_size)


def sample_parents(
    members: Sequence[Individual], sample_size: int, rng: Random
) -> tuple[Individual, Individual]:
    """Tournament-pick two parents from a uniform no-replacement sample.

    P1 is the sample's fittest (ties to the oldest); P2 is uniform over
    the rest of the sample, collapsing to P1 when sample_size is 1.
    """
    sample = rng.sample(members, sample_size)
    p1 = max(sample, key=_rank_key)
    if sample_size == 1:
        return p1, p1
    others = [ind for ind in sample if ind is not p1]
    p2 = others[rng.randrange(len(others))]
    return p1, p2


def survivor_selection(members: Sequence[Individual], num_remove: int) -> list[Individual]:
    """Drop the ``num_remove`` worst members; the best always survives.

    Equal-fitness ties remove the newest first, so a matching offspring
    never displaces an established member. Survivors keep their order.
    """
    doomed = sorted(members, key=_rank_key)[:num_remove]
    doomed_ids = {ind.creation_index for ind in doomed}
    return [ind for ind in members if ind.creation_index not in doomed_ids]


def stagnation_detected(state: RunState, config: EvolutionConfig) -> bool:
    """True once past warm-up with a_stag improvement-free generations.

    Improvement is strict: equal best fitness extends the streak.
    """
    return (
        state.generation >= config.stagnation_warmup
        and state.no_improve_streak >= config.a_stag
    )


def apply_soft_avoidance(state: RunState, config: EvolutionConfig) -> VariationParams:
    """Raise the op/edge mutation rates to their avoidance values.

    tau_cross and tau_b are untouched; the raised values persist for the
    rest of the run. Marks soft as tried and restarts the streak.
    """
    state.soft_tried = True
    state.no_improve_streak = 0
    return replace(
        config.variation,
        tau_m_op=config.tau_m_op_avoid,
        tau_m_edge=config.tau_m_edge_avoid,
    )


def apply_hard_avoidance(
    population: Population,
    config: EvolutionConfig,
    evaluator: Evaluator,
    rng: Random,
    pool: ThreadPoolExecutor | None = None,
) -> Population:
    """Keep only the best member and refill with fresh random individuals.

    The P-1 replacements use the same initial-B rule as initialization
    and are evaluated immediately. Caller resets the stagnation streak.
    """
    best = max(population.members, key=_rank_key)
    count = config.population_size - 1
    start = population.next_creation_index
    genomes = [
        replace(random_genome(config, rng), id=start + i) for i in range(count)
    ]
    fitnesses = _evaluate_batch(genomes, evaluator, pool)
    fresh = [
        Individual(genome, fitness, genome.id)
        for genome, fitness in zip(genomes, fitnesses)
    ]
    return Population([best] + fresh, next_creation_index=start + count)


def _breed(
    p1: Genome,
    p2: Genome,
    config: EvolutionConfig,
    params: VariationParams,
    rng: Random,
) -> Genome:
    if config.crossover_enabled:
        return make_offspring(p1, p2, config, params, rng)
    child = p1  # ablation mode: clone of the tournament winner
    child = mutate_op(child, params, rng)
    child = mutate_hidden_state(child, params, rng)
    child = mutate_b(child, config, params, rng)
    return child


def evolve(
    config: EvolutionConfig,
    evaluator: Evaluator,
    workers: int = 1,
    on_event: Callable[[dict], None] | None = None,
) -> RunResult:
    """Run the full search and return the best individual ever evaluated.

    Emits one event record per evaluation plus records for avoidance
    triggers and generation ends; ``on_event`` sees each record as it is
    produced, so partial logs survive an evaluator abort. Given the same
    config, seed and a deterministic evaluator, the event log is
    byte-identical regardless of ``workers``.
    """
    if workers < 1:
        raise ConfigError(f"workers={workers} must be >= 1")
    rng = Random(config.seed)
    state = RunState()
    params = config.variation
    best: Individual | None = None

    def emit(record: dict) -> None:
        state.event_log.append(record)
        if on_event is not None:
            on_event(record)

    def emit_eval(gen: int, ind: Individual) -> None:
        nonlocal best
        if best is None or ind.fitness > best.fitness:
            best = ind
        emit(
            {
                "gen": gen,
                "event": EVENT_EVAL,
                "genome_hash": genome_hash(ind.genome),
                "fitness": ind.fitness,
                "best": best.fitness,
            }
        )

    pool: ThreadPoolExecutor | None = None
    if workers > 1 and evaluator.concurrency_safe:
        pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="evocell-eval")
    try:
        population = initialize(config, evaluator, rng, pool)
        for ind in population.members:
            emit_eval(0, ind)
        state.best_fitness_history.append(best.fitness)

        for gen in range(1, config.generations + 1):
            state.generation = gen
            prev_best = best.fitness

            if config.steady_state_insertion:
                # Algorithm-literal mode: offspring become samplable as soon
                # as they are evaluated, which forces serial evaluation.
                for _ in range(config.offspring_per_gen):
                    p1, p2 = sample_parents(population.members, config.sample_size, rng)
                    child = _breed(p1.genome, p2.genome, config, params, rng)
                    child = replace(child, id=population.next_creation_index)
                    population.next_creation_index += 1
                    fitness = _score_one(evaluator, child)
                    ind = Individual(child, fitness, child.id)
                    population.members.append(ind)
                    emit_eval(gen, ind)
            else:
                snapshot = list(population.members)
                children: list[Genome] = []
                for _ in range(config.offspring_per_gen):
                    p1, p2 = sample_parents(snapshot, config.sample_size, rng)
                    child = _breed(p1.genome, p2.genome, config, params, rng)
                    child = replace(child, id=population.next_creation_index)
                    population.next_creation_index += 1
                    children.append(child)
                fitnesses = _evaluate_batch(children, evaluator, pool)
                for child, fitness in zip(children, fitnesses):
                    ind = Individual(child, fitness, child.id)
                    population.members.append(ind)
                    emit_eval(gen, ind)

            population.members = survivor_selection(
                population.members, config.offspring_per_gen
            )

            if best.fitness > prev_best:
                state.no_improve_streak = 0
            else:
                state.no_improve_streak += 1

            if stagnation_detected(state, config):
                if state.soft_tried:
                    log.info("hard stagnation avoidance at generation %d", gen)
                    emit({"gen": gen, "event": EVENT_HARD_AVOID, "best": best.fitness})
                    population = apply_hard_avoidance(
                        population, config, evaluator, rng, pool
                    )
                    for ind in population.members[1:]:
                        emit_eval(gen, ind)
                    state.no_improve_streak = 0
                else:
                    log.info("soft stagnation avoidance at generation %d", gen)
                    params = apply_soft_avoidance(state, config)
                    emit({"gen": gen, "event": EVENT_SOFT_AVOID, "best": best.fitness})

            state.best_fitness_history.append(best.fitness)
            emit({"gen": gen, "event": EVENT_GEN_END, "best": best.fitness})
    finally:
        if pool is not None:
            pool.shutdown(wait=False, cancel_futures=True)

    return RunResult(best, state, population, params)
