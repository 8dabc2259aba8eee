"""Walkthrough: from genome to network description.

Assembles the outer architecture (alternating normal/reduction cells with
2x2 stride-2 pooling after each reduction), traces channels and spatial
sizes, counts parameters, and prints a DOT rendering of one cell.

Run: python demos/05_materialize.py
"""

from random import Random

from evocell import (
    ArchitectureConfig,
    EvolutionConfig,
    assemble,
    count_parameters,
    export_dot,
    random_genome,
)


def main():
    genome = random_genome(EvolutionConfig(), Random(11))
    arch = ArchitectureConfig()  # 3 normal + 2 reduction cells, D=24, K=2, 28x28x1

    graph = assemble(genome, arch)
    print("cell stack (projection layers show each cell's width):")
    for layer in graph.layers:
        if layer.kind in ("input", "conv1x1", "avgpool2x2", "classifier"):
            print(
                f"  {layer.label:22s} {layer.kind:12s} "
                f"{layer.in_channels:4d} -> {layer.out_channels:4d} ch   "
                f"{layer.height}x{layer.width}   params={layer.params}"
            )

    print(f"\ntotal layers: {len(graph.layers)}")
    print(f"total parameters: {count_parameters(graph):,}")

    print("\nDOT for the normal cell (render with `dot -Tpng`):\n")
    print(export_dot(genome.normal))


if __name__ == "__main__":
    main()
