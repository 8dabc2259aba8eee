"""Scriptable external evaluator for wire-protocol tests.

Usage: python mock_eval.py [MODE]

Modes:
    hash        deterministic fitness derived from the genome document (default)
    const05     every genome scores 0.5
    badid       responds with id+1 (protocol violation)
    malformed   responds with a non-JSON line
    outofrange  responds with fitness 1.5
    errorresp   responds {"id": ..., "error": "boom"}
    slow        sleeps 5 s before each response

Reads one JSON request per stdin line, writes one response line, exits 0
when stdin closes.
"""

import hashlib
import json
import sys
import time


def fitness_from(genome_doc) -> float:
    blob = json.dumps(genome_doc, separators=(",", ":"), sort_keys=True)
    digest = hashlib.sha256(blob.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def main() -> int:
    mode = sys.argv[1] if len(sys.argv) > 1 else "hash"
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        rid = request["id"]
        if mode == "malformed":
            response = "this is not json"
        elif mode == "badid":
            response = json.dumps({"id": rid + 1, "fitness": 0.5})
        elif mode == "outofrange":
            response = json.dumps({"id": rid, "fitness": 1.5})
        elif mode == "errorresp":
            response = json.dumps({"id": rid, "error": "boom"})
        elif mode == "const05":
            response = json.dumps({"id": rid, "fitness": 0.5})
        elif mode == "slow":
            time.sleep(5)
            response = json.dumps({"id": rid, "fitness": 0.5})
        else:
            response = json.dumps({"id": rid, "fitness": fitness_from(request["genome"])})
        sys.stdout.write(response + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
