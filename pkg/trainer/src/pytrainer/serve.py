"""The wire-protocol server loop.

One JSON object per stdin line:

    {"id": 0, "genome": {...}, "budget": {"epochs": 1}}

answered on stdout with {"id": 0, "fitness": 0.93} or, when the request is
malformed, over the epoch cap, or the genome cannot be built or trained,
{"id": ..., "error": "..."} - and serving continues. Only protocol JSON
goes to stdout; diagnostics go to stderr. Returns 0 when stdin closes.
"""

from __future__ import annotations

import json
import logging
import sys
import time
from typing import TextIO

from .data import DataBundle, load_dataset
from .model import GenomeError
from .settings import TrainerSettings
from .training import train_and_eval

log = logging.getLogger("pytrainer")


def _parse_request(line: str):
    doc = json.loads(line)
    if not isinstance(doc, dict):
        raise ValueError("request must be a JSON object")
    if "id" not in doc:
        raise ValueError("request is missing 'id'")
    return doc


def handle_request(line: str, settings: TrainerSettings, data: DataBundle) -> dict:
    rid = None
    try:
        request = _parse_request(line)
    except (json.JSONDecodeError, ValueError) as exc:
        return {"id": rid, "error": f"malformed request: {exc}"}
    rid = request["id"]
    try:
        budget = request.get("budget")
        if not isinstance(budget, dict) or "epochs" not in budget:
            raise ValueError("request is missing 'budget.epochs'")
        epochs = budget["epochs"]
        if not isinstance(epochs, int) or epochs < 1:
            raise ValueError(f"budget.epochs must be a positive integer, got {epochs!r}")
        if settings.epochs_cap is not None and epochs > settings.epochs_cap:
            raise ValueError(
                f"budget.epochs={epochs} exceeds this trainer's cap of {settings.epochs_cap}"
            )
        if "genome" not in request:
            raise ValueError("request is missing 'genome'")
        started = time.monotonic()
        fitness = train_and_eval(request["genome"], epochs, settings, data)
        log.info("request %s: fitness %.4f in %.1fs", rid, fitness, time.monotonic() - started)
        return {"id": rid, "fitness": fitness}
    except (GenomeError, ValueError) as exc:
        return {"id": rid, "error": str(exc)}
    except Exception as exc:  # training blew up; report, keep serving
        log.exception("request %s failed", rid)
        return {"id": rid, "error": f"{type(exc).__name__}: {exc}"}


def serve(stdin: TextIO, stdout: TextIO, settings: TrainerSettings) -> int:
    settings.validate()
    data = load_dataset(settings)
    log.info(
        "serving dataset=%s train=%d val=%d", settings.dataset,
        len(data.x_train), len(data.x_val),
    )
    for line in stdin:
        if not line.strip():
            continue
        response = handle_request(line, settings, data)
        stdout.write(json.dumps(response) + "\n")
        stdout.flush()
    log.info("stdin closed, exiting")
    return 0


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        prog="pytrainer",
        description="Train genome-defined CNNs over the stdin/stdout JSON protocol.",
    )
    parser.add_argument("--dataset", default="digits", choices=("digits", "mnist", "synthetic"))
    parser.add_argument("--data-dir", default=None, help="cache directory for mnist")
    parser.add_argument("--train-size", type=int, default=None)
    parser.add_argument("--val-size", type=int, default=None)
    parser.add_argument("--split-seed", type=int, default=42)
    parser.add_argument("--image-size", type=int, default=28)
    parser.add_argument("--num-normal", type=int, default=3)
    parser.add_argument("--reductions", type=int, default=2)
    parser.add_argument("--filters", type=int, default=24)
    parser.add_argument("--multiplier", type=int, default=2)
    parser.add_argument("--classes", type=int, default=10)
    parser.add_argument("--dropout", type=float, default=0.2)
    parser.add_argument("--bn-momentum", type=float, default=0.5)
    parser.add_argument("--batch-size", type=int, default=64)
    parser.add_argument("--lr", type=float, default=3e-3)
    parser.add_argument("--lr-decay", type=float, default=0.9)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--epochs-cap", type=int, default=None,
                        help="reject requests whose epoch budget exceeds this")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    args = parser.parse_args(argv)

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="pytrainer: %(message)s",
    )
    settings = TrainerSettings(
        dataset=args.dataset,
        data_dir=args.data_dir,
        train_size=args.train_size,
        val_size=args.val_size,
        split_seed=args.split_seed,
        image_size=args.image_size,
        num_normal=args.num_normal,
        num_reductions=args.reductions,
        filters=args.filters,
        channel_multiplier=args.multiplier,
        num_classes=args.classes,
        dropout=args.dropout,
        bn_momentum=args.bn_momentum,
        batch_size=args.batch_size,
        lr=args.lr,
        lr_decay=args.lr_decay,
        seed=args.seed,
        device=args.device,
        epochs_cap=args.epochs_cap,
    )
    return serve(sys.stdin, sys.stdout, settings)
