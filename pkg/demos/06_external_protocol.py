"""Walkthrough: the external-evaluator wire protocol.

The engine talks to trainer processes over stdin/stdout, one JSON object
per line: requests {"id", "genome", "budget"} and responses
{"id", "fitness"}. This demo spawns a throwaway evaluator (fitness =
normal-cell size / 6) and runs a short search against it.

Run: python demos/06_external_protocol.py
"""

import sys

from evocell import EvolutionConfig, ExternalEvaluator, evolve

# A complete protocol server in a few lines: read a request per line,
# answer on stdout, exit 0 when stdin closes. Real trainers do the same
# with actual training in the middle.
EVALUATOR_SOURCE = """
import json, sys
for line in sys.stdin:
    request = json.loads(line)
    b_normal = len(request["genome"]["normal"]["nodes"])
    response = {"id": request["id"], "fitness": b_normal / 6}
    sys.stdout.write(json.dumps(response) + "\\n")
    sys.stdout.flush()
"""


def main():
    command = [sys.executable, "-c", EVALUATOR_SOURCE]
    config = EvolutionConfig(generations=30, seed=2)
    with ExternalEvaluator(command, epochs=1, timeout=30) as evaluator:
        result = evolve(config, evaluator)

    print("evaluator rewards larger normal cells; B should reach b_max lazily")
    print("best fitness:", result.best.fitness)
    print("best normal-cell B:", result.best.genome.normal.b)
    evals = sum(1 for rec in result.state.event_log if rec["event"] == "eval")
    print("protocol round trips:", evals)


if __name__ == "__main__":
    main()
