"""Engine: initialization, selection, stagnation avoidance, determinism."""

from collections import Counter
from random import Random

import pytest

from evocell import (
    ConfigError,
    ConstantEvaluator,
    EvaluatorError,
    EvolutionConfig,
    Individual,
    OneMaxEvaluator,
    RunState,
    apply_hard_avoidance,
    apply_soft_avoidance,
    event_log_to_jsonl,
    evolve,
    initialize,
    random_genome,
    sample_parents,
    stagnation_detected,
    survivor_selection,
)
from conftest import small_config


def make_individuals(fitnesses):
    rng = Random(0)
    config = EvolutionConfig()
    return [
        Individual(random_genome(config, rng), fitness, index)
        for index, fitness in enumerate(fitnesses)
    ]


def test_config_validation():
    with pytest.raises(ConfigError):
        EvolutionConfig(population_size=1)
    with pytest.raises(ConfigError):
        EvolutionConfig(sample_size=11, population_size=10)
    with pytest.raises(ConfigError):
        EvolutionConfig(b_min=4, b_max=2)
    with pytest.raises(ConfigError):
        EvolutionConfig(a_stag=0)
    with pytest.raises(ConfigError):
        EvolutionConfig(offspring_per_gen=0)


def test_initialize_population():
    config = EvolutionConfig(seed=3)
    pop = initialize(config, OneMaxEvaluator(), Random(config.seed))
    assert len(pop.members) == config.population_size
    assert [ind.creation_index for ind in pop.members] == list(range(10))
    assert all(ind.fitness is not None for ind in pop.members)
    assert all(ind.genome.id == ind.creation_index for ind in pop.members)
    assert pop.next_creation_index == 10


def test_initialize_constant_evaluator_equal_fitness():
    config = EvolutionConfig(population_size=2, sample_size=2, seed=1)
    pop = initialize(config, ConstantEvaluator(0.25), Random(1))
    assert [ind.fitness for ind in pop.members] == [0.25, 0.25]


def test_sample_parents_forced_pair():
    members = make_individuals([0.9, 0.5])
    for seed in range(10):
        p1, p2 = sample_parents(members, 2, Random(seed))
        assert p1.fitness == 0.9
        assert p2.fitness == 0.5


def test_sample_parents_degenerate_s1():
    members = make_individuals([0.9, 0.5, 0.7])
    p1, p2 = sample_parents(members, 1, Random(0))
    assert p1 is p2


def test_sample_parents_tie_breaks_to_oldest():
    members = make_individuals([0.5, 0.5])
    p1, _ = sample_parents(members, 2, Random(0))
    assert p1.creation_index == 0


def test_sample_parents_uniform_membership():
    members = make_individuals([i / 10 for i in range(10)])
    rng = Random(99)
    n = 10_000
    appearances = Counter()
    for _ in range(n):
        sample = rng.sample(members, 2)
        for ind in sample:
            appearances[ind.creation_index] += 1
    for index in range(10):
        assert abs(appearances[index] / n - 0.2) <= 0.02


def test_survivor_selection_drops_worst():
    members = make_individuals([0.3, 0.5, 0.4])
    survivors = survivor_selection(members, 1)
    assert sorted(ind.fitness for ind in survivors) == [0.4, 0.5]


def test_survivor_selection_ties_remove_newest():
    members = make_individuals([0.5, 0.5, 0.5, 0.5])
    survivors = survivor_selection(members, 2)
    assert [ind.creation_index for ind in survivors] == [0, 1]


def test_survivor_selection_keeps_best_and_order():
    members = make_individuals([0.2, 0.9, 0.1, 0.5, 0.3])
    survivors = survivor_selection(members, 2)
    assert [ind.fitness for ind in survivors] == [0.9, 0.5, 0.3]


def test_stagnation_detected_rules():
    config = EvolutionConfig(a_stag=40, stagnation_warmup=50)
    state = RunState(generation=49, no_improve_streak=100)
    assert not stagnation_detected(state, config)
    state = RunState(generation=90, no_improve_streak=40)
    assert stagnation_detected(state, config)
    state = RunState(generation=90, no_improve_streak=0)
    assert not stagnation_detected(state, config)
    state = RunState(generation=50, no_improve_streak=39)
    assert not stagnation_detected(state, config)


def test_apply_soft_avoidance():
    config = EvolutionConfig()
    state = RunState(generation=50, no_improve_streak=50)
    params = apply_soft_avoidance(state, config)
    assert params.tau_m_op == 0.6
    assert params.tau_m_edge == 0.6
    assert params.tau_b == config.variation.tau_b
    assert params.tau_cross == config.variation.tau_cross
    assert state.soft_tried
    assert state.no_improve_streak == 0


def test_apply_hard_avoidance_keeps_best():
    config = EvolutionConfig(seed=5)
    rng = Random(5)
    pop = initialize(config, OneMaxEvaluator(), rng)
    best = max(pop.members, key=lambda ind: (ind.fitness, -ind.creation_index))
    new_pop = apply_hard_avoidance(pop, config, OneMaxEvaluator(), rng)
    assert len(new_pop.members) == config.population_size
    assert new_pop.members[0] is best
    assert [ind.creation_index for ind in new_pop.members[1:]] == list(range(10, 19))
    assert new_pop.next_creation_index == 19


def test_apply_hard_avoidance_reproducible():
    config = EvolutionConfig(seed=5)
    runs = []
    for _ in range(2):
        rng = Random(5)
        pop = initialize(config, OneMaxEvaluator(), rng)
        new_pop = apply_hard_avoidance(pop, config, OneMaxEvaluator(), rng)
        runs.append([(ind.fitness, ind.creation_index) for ind in new_pop.members])
    assert runs[0] == runs[1]


def test_evolve_zero_generations_returns_init_best():
    config = small_config(generations=0)
    result = evolve(config, OneMaxEvaluator())
    fits = [ind.fitness for ind in result.population.members]
    assert result.best.fitness == max(fits)
    assert len(result.state.best_fitness_history) == 1


def test_evolve_stagnation_state_machine_exact():
    config = EvolutionConfig(
        population_size=4,
        offspring_per_gen=4,
        sample_size=2,
        generations=100,
        a_stag=40,
        stagnation_warmup=50,
        seed=11,
    )
    result = evolve(config, ConstantEvaluator(0.5))
    soft = [r["gen"] for r in result.state.event_log if r["event"] == "soft_avoid"]
    hard = [r["gen"] for r in result.state.event_log if r["event"] == "hard_avoid"]
    assert soft == [50]
    assert hard == [90]
    # evaluation counts: P at gen 0, F per generation, P-1 extra at the hard reset
    evals = Counter(r["gen"] for r in result.state.event_log if r["event"] == "eval")
    assert evals[0] == 4
    assert evals[90] == 4 + 3
    for gen in range(1, 101):
        if gen != 90:
            assert evals[gen] == 4
    assert result.params.tau_m_op == config.tau_m_op_avoid  # soft values persist


def test_evolve_elitism_monotone_history():
    config = small_config(generations=30)
    result = evolve(config, OneMaxEvaluator())
    history = result.state.best_fitness_history
    assert all(b >= a for a, b in zip(history, history[1:]))
    assert len(result.population.members) == config.population_size


def test_evolve_event_log_deterministic():
    config = small_config(generations=10)
    log1 = evolve(config, OneMaxEvaluator()).state.event_log
    log2 = evolve(config, OneMaxEvaluator()).state.event_log
    assert event_log_to_jsonl(log1) == event_log_to_jsonl(log2)


def test_evolve_workers_do_not_change_results():
    config = small_config(generations=10)
    serial = evolve(config, OneMaxEvaluator(), workers=1)
    threaded = evolve(config, OneMaxEvaluator(), workers=4)
    assert event_log_to_jsonl(serial.state.event_log) == event_log_to_jsonl(
        threaded.state.event_log
    )
    assert serial.best.fitness == threaded.best.fitness


def test_evolve_steady_state_mode():
    config = small_config(generations=10, steady_state_insertion=True)
    result = evolve(config, OneMaxEvaluator())
    assert len(result.population.members) == config.population_size
    again = evolve(config, OneMaxEvaluator())
    assert event_log_to_jsonl(result.state.event_log) == event_log_to_jsonl(
        again.state.event_log
    )


def test_evolve_no_crossover_mode():
    config = small_config(generations=10, crossover_enabled=False)
    result = evolve(config, OneMaxEvaluator())
    history = result.state.best_fitness_history
    assert all(b >= a for a, b in zip(history, history[1:]))


class FailingEvaluator(ConstantEvaluator):
    def __init__(self, fail_at: int):
        super().__init__(0.5)
        self.calls = 0
        self.fail_at = fail_at

    def score(self, genome):
        self.calls += 1
        if self.calls >= self.fail_at:
            raise RuntimeError("synthetic trainer crash")
        return super().score(genome)


def test_evolve_evaluator_failure_aborts_with_hash_and_partial_log():
    config = small_config(generations=10)
    seen = []
    with pytest.raises(EvaluatorError) as err:
        evolve(config, FailingEvaluator(fail_at=9), on_event=seen.append)
    assert err.value.genome_hash is not None
    assert len(err.value.genome_hash) == 64
    assert len(seen) >= config.population_size  # init records were flushed


class OutOfRangeEvaluator(ConstantEvaluator):
    def score(self, genome):
        return 1.5


def test_evolve_rejects_out_of_range_fitness():
    config = small_config(generations=1)
    with pytest.raises(EvaluatorError, match="outside"):
        evolve(config, OutOfRangeEvaluator())
