"""Walkthrough: a full search run on the onemax surrogate.

Fitness is the fraction of op slots equal to a target op, so the optimum
(1.0) is a genome using the target everywhere. Prints the best-fitness
trajectory and the event mix of the run.

Run: python demos/03_search_onemax.py
"""

from collections import Counter

from evocell import EvolutionConfig, OneMaxEvaluator, OpKind, evolve, genome_hash


def main():
    config = EvolutionConfig(seed=1)  # reference defaults: P=10, F=10, G=200
    result = evolve(config, OneMaxEvaluator(OpKind.CONV3X3))

    history = result.state.best_fitness_history
    print("generation : best fitness")
    for gen in range(0, len(history), 20):
        bar = "#" * int(history[gen] * 40)
        print(f"{gen:10d} : {history[gen]:.3f} {bar}")
    print(f"{len(history) - 1:10d} : {history[-1]:.3f}")

    events = Counter(rec["event"] for rec in result.state.event_log)
    print("\nevents:", dict(events))
    reached = next((i for i, v in enumerate(history) if v >= 0.95), None)
    print("generations to reach 0.95:", reached)
    print("best genome:", genome_hash(result.best.genome)[:16],
          f"fitness={result.best.fitness}")
    print("final mutation rates:", result.params)


if __name__ == "__main__":
    main()
