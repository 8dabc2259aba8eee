"""Walkthrough: the two stagnation-avoidance stages.

A constant evaluator never improves, so the run stagnates on schedule:
with warmup 50 and a 40-generation patience, the soft stage (raised
mutation rates) fires at generation 50 and the hard stage (population
reset around the best individual) at generation 90.

Run: python demos/04_stagnation.py
"""

from evocell import ConstantEvaluator, EvolutionConfig, evolve


def main():
    config = EvolutionConfig(generations=120, seed=5)
    print(f"warmup={config.stagnation_warmup}, patience={config.a_stag}, "
          f"rates {config.variation.tau_m_op}/{config.variation.tau_m_edge} "
          f"-> {config.tau_m_op_avoid}/{config.tau_m_edge_avoid} on soft avoidance\n")

    result = evolve(config, ConstantEvaluator(0.5))
    for rec in result.state.event_log:
        if rec["event"] == "soft_avoid":
            print(f"gen {rec['gen']:3d}: SOFT avoidance (mutation rates raised, kept for the rest of the run)")
        elif rec["event"] == "hard_avoid":
            print(f"gen {rec['gen']:3d}: HARD avoidance (best kept, {config.population_size - 1} random replacements)")

    evals = sum(1 for rec in result.state.event_log if rec["event"] == "eval")
    print(f"\ntotal evaluations: {evals}")
    print(f"  = {config.population_size} init"
          f" + {config.generations} generations x {config.offspring_per_gen} offspring"
          f" + {config.population_size - 1} hard-avoidance replacements")


if __name__ == "__main__":
    main()
