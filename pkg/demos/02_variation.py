"""Walkthrough: crossover and the three mutations.

Shows node-level crossover between parents of different sizes, then each
mutation applied with its probability forced to 1 so it always fires.

Run: python demos/02_variation.py
"""

from random import Random

from evocell import (
    EvolutionConfig,
    VariationParams,
    crossover,
    mutate_b,
    mutate_hidden_state,
    mutate_op,
    random_genome,
)


def row(cell):
    return " | ".join(
        f"{n.left.src}:{n.left.op.value[:4]},{n.right.src}:{n.right.op.value[:4]}"
        for n in cell.nodes
    )


def show(genome, label):
    print(f"{label}:")
    print(f"  normal    (B={genome.normal.b}): {row(genome.normal)}")
    print(f"  reduction (B={genome.reduction.b}): {row(genome.reduction)}")


def main():
    config = EvolutionConfig()
    rng = Random(3)
    p1 = random_genome(config, rng)
    p2 = random_genome(config, rng)
    show(p1, "parent 1 (tournament winner)")
    show(p2, "parent 2 (random sample member)")

    child = crossover(p1, p2, VariationParams(tau_cross=0.6), rng)
    print("\nCrossover: per shared position a coin picks the winner's node")
    print("(probability 0.6) or the other parent's; the tail comes from the")
    print("larger parent, so the child has max(B1, B2) nodes per cell.\n")
    show(child, "offspring")

    print("\nEach mutation changes at most one thing:")
    step = mutate_op(child, VariationParams(tau_m_op=1.0), rng)
    show(step, "after op mutation (one op swapped)")
    step = mutate_hidden_state(step, VariationParams(tau_m_edge=1.0), rng)
    show(step, "after hidden-state mutation (one source rewired)")
    step = mutate_b(step, config, VariationParams(tau_b=1.0), rng)
    show(step, "after B mutation (one cell grew by a node, if below b_max)")


if __name__ == "__main__":
    main()
