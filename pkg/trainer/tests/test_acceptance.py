"""Secondary acceptance: the full search loop against the real trainer.

S1 drives the engine CLI with this trainer as the external evaluator for
3 generations (P=4, F=4, 1-epoch budget) on the offline digits subset and
requires a clean protocol run well inside the 15-minute CPU budget. The
loop uses --filters 8 to keep single-core training per genome in seconds;
the protocol surface is identical at any width. S2 trains the evo_a
reference genome for 2 epochs at full defaults (filters 24) and requires
at least 0.90 validation accuracy.

MNIST is not downloadable in this sandbox, so both run on the bundled
scikit-learn digits set (1200 train / 597 validation at 28x28), the
documented offline fallback for the 2000-image MNIST subset.
"""

import json
import shlex
import subprocess
import sys
import time
from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"


def _report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[ACCEPTANCE] {name}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip())
    assert ok, f"{name}: {detail}"


def test_s1_engine_trainer_loop(tmp_path):
    config_path = tmp_path / "config.json"
    config_path.write_text(
        json.dumps(
            {
                "population_size": 4,
                "offspring_per_gen": 4,
                "sample_size": 2,
                "generations": 3,
                "seed": 5,
            }
        )
    )
    trainer_cmd = (
        f"{shlex.quote(sys.executable)} -m pytrainer "
        "--dataset digits --filters 8 --epochs-cap 1"
    )
    started = time.monotonic()
    proc = subprocess.run(
        [
            sys.executable, "-m", "evocell.cli", "search", str(config_path),
            "--out", str(tmp_path / "run"),
            "--evaluator", f"external:{trainer_cmd}",
            "--epochs", "1",
            "--timeout", "600",
        ],
        capture_output=True,
        text=True,
        timeout=900,
    )
    elapsed = time.monotonic() - started
    events = []
    events_path = tmp_path / "run" / "events.jsonl"
    if events_path.exists():
        events = [json.loads(l) for l in events_path.read_text().splitlines()]
    evals = [e for e in events if e["event"] == "eval"]
    ok = (
        proc.returncode == 0
        and elapsed < 900
        and len(evals) == 4 + 3 * 4  # init + 3 generations of offspring
        and all(0.0 <= e["fitness"] <= 1.0 for e in evals)
    )
    _report(
        "S1 engine+trainer toy loop",
        ok,
        f"exit={proc.returncode}, evals={len(evals)}, {elapsed:.0f}s"
        + (f", stderr={proc.stderr[-200:]}" if proc.returncode != 0 else ""),
    )


def test_s2_reference_genome_accuracy():
    from pytrainer import TrainerSettings, load_dataset, train_and_eval

    genome = json.loads((FIXTURES / "evo_a.json").read_text())
    settings = TrainerSettings()  # digits 1200/597, filters 24, lr 3e-3
    data = load_dataset(settings)
    started = time.monotonic()
    accuracy = train_and_eval(genome, 2, settings, data)
    elapsed = time.monotonic() - started
    _report(
        "S2 reference genome 2-epoch accuracy",
        accuracy >= 0.90,
        f"val accuracy={accuracy:.4f} (bar 0.90), {elapsed:.0f}s",
    )
