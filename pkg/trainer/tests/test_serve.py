"""Protocol behavior of the serving loop."""

import io
import json
import subprocess
import sys
from pathlib import Path

from pytrainer import TrainerSettings, handle_request, load_dataset, serve

FIXTURES = Path(__file__).parent / "fixtures"


def genome_doc():
    return json.loads((FIXTURES / "evo_a.json").read_text())


def tiny_settings(**overrides):
    defaults = dict(dataset="synthetic", train_size=64, val_size=32, filters=2)
    defaults.update(overrides)
    return TrainerSettings(**defaults)


def request_line(rid=0, epochs=1, genome=None):
    return json.dumps(
        {"id": rid, "genome": genome or genome_doc(), "budget": {"epochs": epochs}}
    )


def run_serve(lines, settings):
    stdout = io.StringIO()
    code = serve(io.StringIO("".join(l + "\n" for l in lines)), stdout, settings)
    responses = [json.loads(l) for l in stdout.getvalue().splitlines()]
    return code, responses


def test_serve_well_formed_request():
    code, responses = run_serve([request_line(rid=7)], tiny_settings())
    assert code == 0
    assert len(responses) == 1
    assert responses[0]["id"] == 7
    assert 0.0 <= responses[0]["fitness"] <= 1.0


def test_serve_repeat_request_identical_fitness():
    code, responses = run_serve([request_line(rid=0), request_line(rid=1)], tiny_settings())
    assert code == 0
    assert responses[0]["fitness"] == responses[1]["fitness"]


def test_serve_malformed_json_continues():
    code, responses = run_serve(
        ["this is not json", request_line(rid=2)], tiny_settings()
    )
    assert code == 0
    assert "error" in responses[0]
    assert responses[1]["id"] == 2
    assert "fitness" in responses[1]


def test_serve_unbuildable_genome_error_response():
    bad = genome_doc()
    bad["normal"]["nodes"][0]["left"]["op"] = "conv9x9"
    code, responses = run_serve(
        [request_line(rid=3, genome=bad), request_line(rid=4)], tiny_settings()
    )
    assert code == 0
    assert responses[0]["id"] == 3
    assert "conv9x9" in responses[0]["error"]
    assert "fitness" in responses[1]


def test_serve_missing_budget_is_error():
    line = json.dumps({"id": 5, "genome": genome_doc()})
    _, responses = run_serve([line], tiny_settings())
    assert responses[0]["id"] == 5
    assert "budget" in responses[0]["error"]


def test_serve_epochs_cap_refuses_over_budget():
    settings = tiny_settings(epochs_cap=2)
    _, responses = run_serve(
        [request_line(rid=6, epochs=5), request_line(rid=7, epochs=2)], settings
    )
    assert "cap" in responses[0]["error"]
    assert "fitness" in responses[1]


def test_handle_request_missing_id():
    data = load_dataset(tiny_settings())
    response = handle_request(json.dumps({"genome": {}}), tiny_settings(), data)
    assert response["id"] is None
    assert "id" in response["error"]


def test_subprocess_round_trip_and_exit_zero():
    proc = subprocess.Popen(
        [
            sys.executable, "-m", "pytrainer",
            "--dataset", "synthetic", "--train-size", "64", "--val-size", "32",
            "--filters", "2", "--epochs-cap", "2",
        ],
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
    )
    try:
        proc.stdin.write(request_line(rid=11) + "\n")
        proc.stdin.flush()
        response = json.loads(proc.stdout.readline())
        assert response["id"] == 11
        assert 0.0 <= response["fitness"] <= 1.0
    finally:
        proc.stdin.close()
        assert proc.wait(timeout=60) == 0
