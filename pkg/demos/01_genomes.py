"""Walkthrough: the genome model.

Generates a random genome, inspects its structure, validates it, and shows
that serialization is canonical and reversible.

Run: python demos/01_genomes.py
"""

from random import Random

from evocell import (
    EvolutionConfig,
    genome_hash,
    parse,
    random_genome,
    serialize,
    unused_states,
    validate_genome,
)


def describe(cell, name):
    print(f"  {name} cell, B={cell.b}:")
    for j, node in enumerate(cell.nodes, start=1):
        print(
            f"    node {j} (state {j + 1}): "
            f"left=({node.left.src}, {node.left.op.value})  "
            f"right=({node.right.src}, {node.right.op.value})"
        )
    print(f"    unused states -> final concat: {sorted(unused_states(cell))}")


def main():
    config = EvolutionConfig()  # b_min=2, b_max=6; initial B drawn from [2, 3]
    rng = Random(7)
    genome = random_genome(config, rng)

    print("A genome is a pair of cells, each a feed-forward list of hidden")
    print("nodes over input states 0 and 1:\n")
    describe(genome.normal, "normal")
    describe(genome.reduction, "reduction")

    print("\nValidation:", validate_genome(genome) or "ok")

    text = serialize(genome)
    print(f"\nCanonical JSON ({len(text)} bytes):")
    print(" ", text[:100], "...")
    print("  hash:", genome_hash(genome))

    round_tripped = parse(text)
    print("\nparse(serialize(g)) == g:", round_tripped == genome)

    same_seed = random_genome(config, Random(7))
    print("same seed, same genome:", serialize(same_seed) == text)


if __name__ == "__main__":
    main()
