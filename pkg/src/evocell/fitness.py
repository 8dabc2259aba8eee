"""Genome scoring: deterministic surrogates for desk-scale verification, a
memoizing cache, and a newline-delimited JSON protocol for external trainers.

Wire protocol (UTF-8, one JSON object per line, no other framing):

    request:  {"id":int,"genome":<genome JSON>,"budget":{"epochs":int}}
    response: {"id":int,"fitness":float}            on success
              {"id":int,"error":str}                on evaluator-side failure

The evaluator process is spawned once and must exit 0 when its stdin closes.
"""

from __future__ import annotations

import hashlib
import os
import json
import selectors
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass
from queue import Queue
from random import Random

from .errors import ConfigError, EvaluatorError, ProtocolError
from .genome import OPS, Cell, Genome, OpKind, genome_hash, serialize


class Evaluator:
    """Scores genomes to a fitness in [0, 1].

    ``concurrency_safe`` declares whether multiple threads may call
    ``score`` at once; the engine serializes evaluations otherwise.
    """

    concurrency_safe: bool = True

    def score(self, genome: Genome) -> float:
        raise NotImplementedError

    def close(self) -> None:
        """Release external resources; surrogates have none."""

    def __enter__(self) -> "Evaluator":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class ConstantEvaluator(Evaluator):
    """Every genome scores the same value. Handy for stagnation tests."""

    def __init__(self, value: float = 0.5):
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"constant fitness {value} outside [0, 1]")
        self.value = value

    def score(self, genome: Genome) -> float:
        return self.value


class OneMaxEvaluator(Evaluator):
    """Fraction of op slots equal to a target op, across both cells.

    With 2(B_normal + B_reduction) slots in play, the all-target genome
    scores exactly 1.0 and nothing scores higher.
    """

    def __init__(self, target_op: OpKind = OpKind.CONV3X3):
        self.target_op = target_op

    def score(self, genome: Genome) -> float:
        total = 0
        matches = 0
        for cell in (genome.normal, genome.reduction):
            for node in cell.nodes:
                for pair in (node.left, node.right):
                    total += 1
                    if pair.op is self.target_op:
                        matches += 1
        return matches / total


@dataclass(frozen=True)
class StructureWeights:
    """Relative weights of the three structure features (normalized to 1)."""

    depth: float = 0.4
    diversity: float = 0.3
    size: float = 0.3

    def __post_init__(self) -> None:
        if min(self.depth, self.diversity, self.size) < 0:
            raise ConfigError("structure weights must be non-negative")
        if self.size <= 0:
            raise ConfigError("size weight must be positive (rewards B growth)")


def cell_depth(cell: Cell) -> int:
    """Longest dependency chain, in hidden nodes, from a cell input.

    States 0/1 have depth 0; hidden node j's state has depth
    1 + max(depth of its two sources).
    """
    depth = {0: 0, 1: 0}
    for j, node in enumerate(cell.nodes, start=1):
        depth[j + 1] = 1 + max(depth[node.left.src], depth[node.right.src])
    return max(depth[i] for i in range(2, cell.b + 2))


class StructureEvaluator(Evaluator):
    """Deterministic score rewarding deep, diverse, large cells.

    Per cell: w_d * depth/b_max + w_v * distinct_ops/6 + w_s * B/b_max,
    with weights normalized to sum 1; the genome scores the mean of its
    two cells. Appending a node never lowers any feature and strictly
    raises the size term, which is what gives mutate_b its pull.
    """

    def __init__(self, weights: StructureWeights | None = None, b_max: int = 6):
        self.weights = weights or StructureWeights()
        self.b_max = b_max

    def _cell_score(self, cell: Cell) -> float:
        w = self.weights
        total = w.depth + w.diversity + w.size
        ops = {pair.op for node in cell.nodes for pair in (node.left, node.right)}
        depth_f = min(cell_depth(cell), self.b_max) / self.b_max
        diversity_f = len(ops) / len(OPS)
        size_f = min(cell.b, self.b_max) / self.b_max
        return (w.depth * depth_f + w.diversity * diversity_f + w.size * size_f) / total

    def score(self, genome: Genome) -> float:
        return (self._cell_score(genome.normal) + self._cell_score(genome.reduction)) / 2


class NoisyEvaluator(Evaluator):
    """Inner score plus Gaussian noise keyed by (genome hash, seed).

    The same genome always draws the same noise within a run, so the
    evaluator behaves deterministically for caching and replay. The sum
    is clamped to [0, 1]; this is the one place clamping is allowed.
    """

    def __init__(self, inner: Evaluator, sigma: float, seed: int = 0):
        if sigma < 0:
            raise ConfigError(f"sigma={sigma} must be >= 0")
        self.inner = inner
        self.sigma = sigma
        self.seed = seed
        self.concurrency_safe = inner.concurrency_safe

    def noise(self, genome: Genome) -> float:
        key = f"{self.seed}:{genome_hash(genome)}".encode("utf-8")
        rng = Random(int.from_bytes(hashlib.sha256(key).digest(), "big"))
        return rng.gauss(0.0, self.sigma)

    def score(self, genome: Genome) -> float:
        value = self.inner.score(genome) + self.noise(genome)
        return min(1.0, max(0.0, value))

    def close(self) -> None:
        self.inner.close()


class FitnessCache:
    """Genome-hash -> fitness map with hit/miss counters.

    Concurrent readers and exclusive writers; a hit returns exactly the
    stored value.
    """

    def __init__(self) -> None:
        self._store: dict[str, float] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: str) -> float | None:
        with self._lock:
            value = self._store.get(key)
            if value is None:
                self.misses += 1
            else:
                self.hits += 1
            return value

    def put(self, key: str, fitness: float) -> None:
        with self._lock:
            self._store[key] = fitness

    def __len__(self) -> int:
        return len(self._store)


class CachedEvaluator(Evaluator):
    """Memoizes a deterministic inner evaluator by canonical genome hash.

    For deterministic evaluators this changes evaluation counts only,
    never any returned fitness.
    """

    def __init__(self, inner: Evaluator, cache: FitnessCache | None = None):
        self.inner = inner
        self.cache = cache or FitnessCache()
        self.concurrency_safe = inner.concurrency_safe

    def score(self, genome: Genome) -> float:
        key = genome_hash(genome)
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        value = self.inner.score(genome)
        self.cache.put(key, value)
        return value

    def close(self) -> None:
        self.inner.close()


class _Worker:
    """One external evaluator subprocess owned by one request at a time."""

    def __init__(self, argv: list[str]):
        try:
            self.proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE
            )
        except OSError as exc:
            raise EvaluatorError(f"cannot spawn evaluator {argv!r}: {exc}") from exc
        self._buffer = bytearray()

    def send(self, line: str) -> None:
        assert self.proc.stdin is not None
        try:
            self.proc.stdin.write(line.encode("utf-8"))
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolError(f"evaluator process closed its stdin pipe: {exc}")

    def read_line(self, timeout: float | None) -> str:
        assert self.proc.stdout is not None
        fd = self.proc.stdout.fileno()
        deadline = None if timeout is None else time.monotonic() + timeout
        sel = selectors.DefaultSelector()
        sel.register(fd, selectors.EVENT_READ)
        try:
            while True:
                newline = self._buffer.find(b"\n")
                if newline >= 0:
                    line = self._buffer[:newline].decode("utf-8")
                    del self._buffer[: newline + 1]
                    return line
                remaining = None if deadline is None else deadline - time.monotonic()
                if remaining is not None and remaining <= 0:
                    raise ProtocolError(f"timeout after {timeout}s waiting for evaluator response")
                if not sel.select(remaining):
                    raise ProtocolError(f"timeout after {timeout}s waiting for evaluator response")
                chunk = os.read(fd, 65536)
                if not chunk:
                    raise ProtocolError("evaluator closed stdout before responding")
                self._buffer.extend(chunk)
        finally:
            sel.close()

    def close(self) -> None:
        if self.proc.stdin is not None and not self.proc.stdin.closed:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
        try:
            self.proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()


class ExternalEvaluator(Evaluator):
    """Scores genomes by streaming requests to long-lived subprocesses.

    A pool of ``workers`` identical processes serves one in-flight request
    each, which is how evaluation parallelism is achieved; request ids are
    globally unique and responses must echo them.
    """

    concurrency_safe = True

    def __init__(
        self,
        command: str | list[str],
        epochs: int = 15,
        timeout: float | None = None,
        workers: int = 1,
    ):
        if workers < 1:
            raise ConfigError(f"workers={workers} must be >= 1")
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.epochs = epochs
        self.timeout = timeout
        self._workers = [_Worker(self.argv) for _ in range(workers)]
        self._idle: Queue[_Worker] = Queue()
        for worker in self._workers:
            self._idle.put(worker)
        self._id_lock = threading.Lock()
        self._next_id = 0

    def _take_id(self) -> int:
        with self._id_lock:
            rid = self._next_id
            self._next_id += 1
            return rid

    def score(self, genome: Genome) -> float:
        ghash = genome_hash(genome)
        rid = self._take_id()
        request = '{"id":%d,"genome":%s,"budget":{"epochs":%d}}\n' % (
            rid,
            serialize(genome),
            self.epochs,
        )
        worker = self._idle.get()
        try:
            worker.send(request)
            line = worker.read_line(self.timeout)
        except EvaluatorError as exc:
            exc.genome_hash = ghash
            raise
        finally:
            self._idle.put(worker)
        return self._parse_response(line, rid, ghash)

    @staticmethod
    def _parse_response(line: str, rid: int, ghash: str) -> float:
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed evaluator response {line!r}: {exc}", ghash)
        if not isinstance(doc, dict) or "id" not in doc:
            raise ProtocolError(f"malformed evaluator response {line!r}: no id field", ghash)
        if doc["id"] != rid:
            raise ProtocolError(
                f"response id {doc['id']!r} does not match request id {rid}", ghash
            )
        if "error" in doc:
            raise EvaluatorError(f"evaluator reported error: {doc['error']}", ghash)
        fitness = doc.get("fitness")
        if not isinstance(fitness, (int, float)) or isinstance(fitness, bool):
            raise ProtocolError(f"malformed evaluator response {line!r}: no fitness", ghash)
        if not 0.0 <= fitness <= 1.0:
            raise ProtocolError(f"fitness {fitness} outside [0, 1]", ghash)
        return float(fitness)

    def close(self) -> None:
        for worker in self._workers:
            worker.close()
        self._workers = []
