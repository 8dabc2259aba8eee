"""Command-line front end: run searches, inspect genomes, exercise the
variation operators and export architectures.

Exit codes: 0 success, 2 input or config error, 3 evaluator or protocol
failure. Set EVOCELL_LOG=debug|info|warning for log verbosity.
"""

from __future__ import annotations

import argparse
import datetime
import json
import logging
import os
import secrets
import sys
from pathlib import Path
from random import Random
from types import SimpleNamespace

from .engine import EvolutionConfig, event_to_json, evolve
from .errors import EvaluatorError, EvoCellError, ParseError
from .fitness import (
    CachedEvaluator,
    Evaluator,
    ExternalEvaluator,
    NoisyEvaluator,
    OneMaxEvaluator,
    StructureEvaluator,
)
from .genome import genome_hash, op_from_name, parse, serialize, validate_genome
from .materialize import (
    ArchitectureConfig,
    assemble,
    count_parameters,
    export_dot,
    graph_to_json,
)
from .variation import VariationParams, crossover, mutate_b, mutate_hidden_state, mutate_op

log = logging.getLogger("evocell.cli")

_INPUT_ERRORS = (EvoCellError, FileNotFoundError, IsADirectoryError, PermissionError)


def _read_genome(path: str, b_min: int, b_max: int):
    text = Path(path).read_text(encoding="utf-8")
    return parse(text, b_min, b_max)


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _utcnow() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


# --- config file ------------------------------------------------------------

_VARIATION_FIELDS = ("tau_cross", "tau_m_op", "tau_m_edge", "tau_b")
_ENGINE_FIELDS = (
    "population_size", "offspring_per_gen", "sample_size", "generations",
    "b_min", "b_max", "variation", "tau_m_op_avoid", "tau_m_edge_avoid",
    "a_stag", "stagnation_warmup", "seed", "crossover_enabled",
    "steady_state_insertion", "architecture",
)
_ARCH_FIELDS = (
    "num_normal", "initial_filters", "channel_multiplier", "num_reductions",
    "input_shape", "num_classes",
)


def _reject_unknown(doc: dict, allowed: tuple[str, ...], path: str) -> None:
    for key in doc:
        if key not in allowed:
            raise ParseError(f"{path}{key}: unknown config field")


def load_config(path: str) -> tuple[EvolutionConfig, ArchitectureConfig, bool]:
    """Read the single-document JSON config; returns (engine, arch,
    seed_present). Missing fields fall back to defaults; unknown fields
    and invalid values are field-level errors."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a JSON object")
    if isinstance(doc.get("config"), dict):
        doc = doc["config"]  # run manifests embed their config echo; accept them
    _reject_unknown(doc, _ENGINE_FIELDS, "")

    variation_doc = doc.get("variation", {})
    if not isinstance(variation_doc, dict):
        raise ParseError("variation: expected object")
    _reject_unknown(variation_doc, _VARIATION_FIELDS, "variation.")
    variation = VariationParams(**variation_doc)

    arch_doc = doc.get("architecture", {})
    if not isinstance(arch_doc, dict):
        raise ParseError("architecture: expected object")
    _reject_unknown(arch_doc, _ARCH_FIELDS, "architecture.")
    if "input_shape" in arch_doc:
        arch_doc = dict(arch_doc, input_shape=tuple(arch_doc["input_shape"]))
    arch = ArchitectureConfig(**arch_doc)

    engine_doc = {
        k: v for k, v in doc.items() if k not in ("variation", "architecture")
    }
    seed_present = "seed" in engine_doc
    config = EvolutionConfig(variation=variation, **engine_doc)
    return config, arch, seed_present


def config_doc(config: EvolutionConfig, arch: ArchitectureConfig) -> dict:
    """Round-trippable echo of the full configuration."""
    return {
        "population_size": config.population_size,
        "offspring_per_gen": config.offspring_per_gen,
        "sample_size": config.sample_size,
        "generations": config.generations,
        "b_min": config.b_min,
        "b_max": config.b_max,
        "variation": {
            "tau_cross": config.variation.tau_cross,
            "tau_m_op": config.variation.tau_m_op,
            "tau_m_edge": config.variation.tau_m_edge,
            "tau_b": config.variation.tau_b,
        },
        "tau_m_op_avoid": config.tau_m_op_avoid,
        "tau_m_edge_avoid": config.tau_m_edge_avoid,
        "a_stag": config.a_stag,
        "stagnation_warmup": config.stagnation_warmup,
        "seed": config.seed,
        "crossover_enabled": config.crossover_enabled,
        "steady_state_insertion": config.steady_state_insertion,
        "architecture": {
            "num_normal": arch.num_normal,
            "initial_filters": arch.initial_filters,
            "channel_multiplier": arch.channel_multiplier,
            "num_reductions": arch.num_reductions,
            "input_shape": list(arch.input_shape),
            "num_classes": arch.num_classes,
        },
    }


def build_evaluator(
    spec: str,
    seed: int,
    workers: int = 1,
    epochs: int = 15,
    timeout: float | None = None,
    sigma: float = 0.05,
    target_op: str = "conv3x3",
    cache: bool = False,
) -> Evaluator:
    """Construct the evaluator named by --evaluator."""
    if spec == "onemax":
        evaluator: Evaluator = OneMaxEvaluator(op_from_name(target_op))
    elif spec == "structure":
        evaluator = StructureEvaluator()
    elif spec == "noisy":
        evaluator = NoisyEvaluator(OneMaxEvaluator(op_from_name(target_op)), sigma, seed)
    elif spec.startswith("external:"):
        evaluator = ExternalEvaluator(
            spec[len("external:"):], epochs=epochs, timeout=timeout, workers=workers
        )
    else:
        raise ParseError(
            f"unknown evaluator {spec!r} (use onemax, structure, noisy or external:<command>)"
        )
    return CachedEvaluator(evaluator) if cache else evaluator


# --- subcommands ------------------------------------------------------------

def cmd_search(args: argparse.Namespace) -> int:
    if args.config is not None:
        config, arch, seed_present = load_config(args.config)
    else:
        config, arch, seed_present = EvolutionConfig(), ArchitectureConfig(), False

    if args.seed is not None:
        seed = args.seed
    elif seed_present:
        seed = config.seed
    else:
        seed = secrets.randbits(63)
        log.info("no seed given; drew %d from entropy", seed)
    from dataclasses import replace as _replace

    config = _replace(config, seed=seed)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    events_path = out / "events.jsonl"

    started = _utcnow()
    evaluator = build_evaluator(
        args.evaluator, seed, workers=args.workers, epochs=args.epochs,
        timeout=args.timeout, sigma=args.sigma, target_op=args.target_op,
        cache=args.cache,
    )
    try:
        with open(events_path, "w", encoding="utf-8") as events_file:
            result = evolve(
                config, evaluator, workers=args.workers,
                on_event=lambda rec: events_file.write(event_to_json(rec) + "\n"),
            )
    finally:
        evaluator.close()

    best = result.best
    _write_text(out / "best_genome.json", serialize(best.genome) + "\n")
    _write_text(out / "best_normal.dot", export_dot(best.genome.normal))
    _write_text(out / "best_reduction.dot", export_dot(best.genome.reduction))
    manifest = {
        "config": config_doc(config, arch),
        "seed": seed,
        "evaluator": args.evaluator,
        "workers": args.workers,
        "epochs": args.epochs,
        "started_at": started,
        "finished_at": _utcnow(),
        "events_path": "events.jsonl",
        "best_genome_path": "best_genome.json",
        "best_fitness": best.fitness,
        "best_genome_hash": genome_hash(best.genome),
        "evaluations": sum(1 for rec in result.state.event_log if rec["event"] == "eval"),
    }
    _write_text(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    print(f"best fitness {best.fitness} genome {genome_hash(best.genome)[:12]} -> {out}")
    return 0


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(63)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _emit_genome(genome, args: argparse.Namespace) -> None:
    text = serialize(genome) + "\n"
    if args.out:
        _write_text(Path(args.out), text)
    else:
        sys.stdout.write(text)


def cmd_mutate(args: argparse.Namespace) -> int:
    genome = _read_genome(args.genome, args.b_min, args.b_max)
    rng = Random(_resolve_seed(args))
    if args.operator == "op":
        params = VariationParams(tau_m_op=args.tau)
        mutated = mutate_op(genome, params, rng)
    elif args.operator == "edge":
        params = VariationParams(tau_m_edge=args.tau)
        mutated = mutate_hidden_state(genome, params, rng)
    else:
        params = VariationParams(tau_b=args.tau)
        mutated = mutate_b(genome, SimpleNamespace(b_max=args.b_max), params, rng)
    _emit_genome(mutated, args)
    return 0


def cmd_crossover(args: argparse.Namespace) -> int:
    p1 = _read_genome(args.genome1, args.b_min, args.b_max)
    p2 = _read_genome(args.genome2, args.b_min, args.b_max)
    rng = Random(_resolve_seed(args))
    params = VariationParams(tau_cross=args.tau_cross)
    _emit_genome(crossover(p1, p2, params, rng), args)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        genome = _read_genome(args.genome, args.b_min, args.b_max)
    except ParseError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 2
    violation = validate_genome(genome, args.b_min, args.b_max)
    if violation is not None:
        print(f"invalid: {violation}", file=sys.stderr)
        return 2
    print("ok")
    return 0


def _parse_input_shape(text: str) -> tuple[int, int, int]:
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise ParseError(f"--input {text!r}: expected HxWxC, e.g. 28x28x1")
    return tuple(int(p) for p in parts)  # type: ignore[return-value]


def cmd_export(args: argparse.Namespace) -> int:
    genome = _read_genome(args.genome, args.b_min, args.b_max)
    arch = ArchitectureConfig(
        num_normal=args.num_normal,
        initial_filters=args.filters,
        channel_multiplier=args.multiplier,
        num_reductions=args.reductions,
        input_shape=_parse_input_shape(args.input),
        num_classes=args.classes,
    )
    graph = assemble(genome, arch)
    if args.out:
        out = Path(args.out)
        _write_text(out / "normal_cell.dot", export_dot(genome.normal))
        _write_text(out / "reduction_cell.dot", export_dot(genome.reduction))
        _write_text(out / "network.dot", export_dot(graph))
        _write_text(out / "layers.json", graph_to_json(graph) + "\n")
    print(f"parameters: {count_parameters(graph)}")
    return 0


# --- parser -----------------------------------------------------------------

def _add_bounds(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--b-min", type=int, default=2, help="lower bound on B")
    parser.add_argument("--b-max", type=int, default=6, help="upper bound on B")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evocell",
        description="Evolutionary search over two-cell network genomes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="run the evolutionary search")
    p.add_argument("config", nargs="?", help="JSON config file (defaults when omitted)")
    p.add_argument("--seed", type=int, help="run seed; overrides the config file")
    p.add_argument(
        "--evaluator", default="onemax",
        help="onemax | structure | noisy | external:<command>",
    )
    p.add_argument("--out", required=True, help="output directory for run artifacts")
    p.add_argument("--workers", type=int, default=1, help="parallel evaluations")
    p.add_argument("--epochs", type=int, default=15, help="epoch budget per request (external)")
    p.add_argument("--timeout", type=float, default=None, help="seconds per external response")
    p.add_argument("--sigma", type=float, default=0.05, help="noise level for --evaluator noisy")
    p.add_argument("--target-op", default="conv3x3", help="target op for onemax/noisy")
    p.add_argument("--cache", action="store_true", help="memoize fitness by genome hash")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("mutate", help="apply one mutation operator to a genome file")
    p.add_argument("genome")
    p.add_argument("--operator", choices=("op", "edge", "b"), required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--tau", type=float, default=1.0, help="firing probability (default: always)")
    p.add_argument("-o", "--out", help="output file (stdout when omitted)")
    _add_bounds(p)
    p.set_defaults(func=cmd_mutate)

    p = sub.add_parser("crossover", help="cross two genome files")
    p.add_argument("genome1", help="tournament-winner parent")
    p.add_argument("genome2", help="random parent")
    p.add_argument("--seed", type=int)
    p.add_argument("--tau-cross", type=float, default=0.6)
    p.add_argument("-o", "--out", help="output file (stdout when omitted)")
    _add_bounds(p)
    p.set_defaults(func=cmd_crossover)

    p = sub.add_parser("validate", help="check a genome file against the structural rules")
    p.add_argument("genome")
    _add_bounds(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("export", help="materialize a genome and export DOT/JSON")
    p.add_argument("genome")
    p.add_argument("--num-normal", type=int, default=3)
    p.add_argument("--filters", type=int, default=24)
    p.add_argument("--multiplier", type=int, default=2)
    p.add_argument("--reductions", type=int, default=2)
    p.add_argument("--input", default="28x28x1", help="input shape HxWxC")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("-o", "--out", help="output directory for dot/json files")
    _add_bounds(p)
    p.set_defaults(func=cmd_export)
    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("EVOCELL_LOG", "warning").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EvaluatorError as exc:
        suffix = f" (genome {exc.genome_hash})" if exc.genome_hash else ""
        print(f"evaluator failure: {exc}{suffix}", file=sys.stderr)
        return 3
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
