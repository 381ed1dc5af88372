import copy
import json
import math
from pathlib import Path

import numpy as np
import pytest

from graphflow.cli import main, parse_lambda
from graphflow.config import parse_config, parse_config_dict
from graphflow.errors import ParseError, SchemaError, ValidationError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def load(name="two_cycle_unit.json"):
    return json.loads((CONFIGS / name).read_text())


def write(tmp_path, raw, name="cfg.json"):
    raw = copy.deepcopy(raw)
    raw.setdefault("output", {})["directory"] = str(tmp_path / "out")
    p = tmp_path / name
    p.write_text(json.dumps(raw))
    return p


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config_sha256=")
    return lines[1].split(","), [l.split(",") for l in lines[2:]]


def test_minimal_config():
    cfg = parse_config(CONFIGS / "two_cycle_unit.json")
    assert cfg.graph.m == 2
    np.testing.assert_array_equal(cfg.graph.line_adjacency, [[0, 1], [1, 0]])


def test_missing_weight_names_pair():
    raw = load()
    raw["graph"]["weights"] = raw["graph"]["weights"][:1]
    with pytest.raises(ValidationError) as info:
        parse_config_dict(raw)
    assert info.value.path == "graph.weights.v1/e2"


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda r: r["sim"].update(dt=0), "sim.dt"),
        (lambda r: r["sim"].update(cells_per_edge=3), "sim.cells_per_edge"),
        (lambda r: r["sim"].update(t=-1.0), "sim.t"),
        (lambda r: r["sim"].update(scheme="rk4"), "sim.scheme"),
        (lambda r: r["sim"].update(extra=1), "sim.extra"),
        (lambda r: r.pop("initial"), "initial"),
        (lambda r: r["velocities"]["e1"].pop("value"), "velocities.e1.value"),
        (lambda r: r["velocities"].update(e9={"kind": "constant", "value": 1}), "velocities.e9"),
        (lambda r: r.update(schema_version=2), "schema_version"),
    ],
)
def test_schema_paths(mutate, path):
    raw = load()
    mutate(raw)
    with pytest.raises((SchemaError, ValidationError)) as info:
        parse_config_dict(raw)
    assert info.value.path == path


def test_parse_error_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "schema_version": 1,\n  "graph": \n}')
    with pytest.raises(ParseError) as info:
        parse_config(p)
    assert "line 4" in str(info.value)


def test_strict_rejects_conservation_violation():
    raw = load()
    raw["graph"]["weights"][0]["value"] = 0.9
    with pytest.raises(ValidationError) as info:
        parse_config_dict(raw)
    assert info.value.path == "graph.weights"
    cfg = parse_config_dict(raw, strict=False)
    assert cfg.diagnostics


def test_hash_independent_of_key_order():
    raw = load()
    shuffled = json.loads(json.dumps(raw, sort_keys=True))
    assert parse_config_dict(raw).sha256 == parse_config_dict(shuffled).sha256


def test_parse_lambda():
    assert parse_lambda("1,0") == 1.0
    assert parse_lambda("1,1") == 1 + 1j
    assert parse_lambda("2") == 2.0
    with pytest.raises(ValueError):
        parse_lambda("1,2,3")


def test_simulate_full_loop(tmp_path):
    p = write(tmp_path, load())
    assert main(["simulate", "--config", str(p)]) == 0
    header, rows = read_csv(tmp_path / "out" / "snapshots.csv")
    assert header == ["time", "edge_id", "cell_index", "x_center", "value"]
    first = np.array([float(r[4]) for r in rows if float(r[0]) == 0.0])
    last = np.array([float(r[4]) for r in rows if float(r[0]) == 2.0])
    np.testing.assert_allclose(last, first, atol=1e-12)
    _, mass = read_csv(tmp_path / "out" / "mass.csv")
    totals = np.array([float(r[-1]) for r in mass])
    assert np.ptp(totals) <= 1e-8
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["scheme"] == "semilagrangian" and rep["steps"] == 40


@pytest.mark.parametrize("scheme", ["frozen-product", "oracle"])
def test_simulate_other_schemes(tmp_path, scheme):
    raw = load("two_cycle.json")
    raw["sim"].update(scheme=scheme, t=0.5, dt=0.05, cells_per_edge=20, snapshot_every=5)
    p = write(tmp_path, raw)
    assert main(["simulate", "--config", str(p), "--emit-plot-script"]) == 0
    _, mass = read_csv(tmp_path / "out" / "mass.csv")
    assert [m[0] for m in mass] == ["0.0", "0.25", "0.5"]
    assert (tmp_path / "out" / "plot_snapshots.py").exists()


def test_simulate_zero_data(tmp_path):
    raw = load()
    raw["initial"] = {e: {"kind": "polynomial", "coefficients": [0.0]} for e in ("e1", "e2")}
    p = write(tmp_path, raw)
    assert main(["simulate", "--config", str(p)]) == 0
    _, rows = read_csv(tmp_path / "out" / "snapshots.csv")
    assert all(float(r[4]) == 0.0 for r in rows)


def test_stability(tmp_path):
    p = write(tmp_path, load())
    assert main(["stability", "--config", str(p), "--period", "2", "--save-matrix"]) == 0
    rep = json.loads((tmp_path / "out" / "stability.json").read_text())
    assert rep["radius"] == pytest.approx(1.0, abs=1e-10)
    assert rep["verdict"] == "not exponentially stable"
    assert (tmp_path / "out" / "monodromy.csv").exists()

    raw = load("two_cycle_absorbing.json")
    p = write(tmp_path, raw, "abs.json")
    assert main(["stability", "--config", str(p), "--period", "2"]) == 0
    rep = json.loads((tmp_path / "out" / "stability.json").read_text())
    assert rep["radius"] == pytest.approx(math.exp(-2), abs=1e-9)
    assert rep["omega0"] == pytest.approx(1.0, abs=1e-9)
    assert rep["verdict"] == "exponentially stable"


def test_stability_not_periodic(tmp_path):
    p = write(tmp_path, load("two_cycle.json"))
    assert main(["stability", "--config", str(p), "--period", "3"]) == 1


def test_resolvent_check_exit_codes(tmp_path):
    p = write(tmp_path, load())
    assert main(["resolvent-check", "--config", str(p), "--lambda", "1,0"]) == 0
    rep = json.loads((tmp_path / "out" / "resolvent.json").read_text())
    assert rep["passed"] and rep["identity_residual"] <= 1e-6
    assert main(["resolvent-check", "--config", str(p), "--lambda", "1,1"]) == 0
    assert main(["resolvent-check", "--config", str(p), "--lambda", "0,0"]) == 2
    rep = json.loads((tmp_path / "out" / "resolvent.json").read_text())
    assert rep["singular"] is True
    assert main(["resolvent-check", "--config", str(p), "--lambda", "x"]) == 1


def test_validate_reports(tmp_path, capsys):
    raw = load()
    assert main(["validate", "--config", str(write(tmp_path, raw))]) == 0
    out = capsys.readouterr().out
    assert "constant domain: yes" in out and "stochasticity: ok" in out and "u_k(0, t)" in out

    raw["velocities"]["e2"] = {"kind": "sinusoid", "base": 2.0, "amp": 1.0}
    assert main(["validate", "--config", str(write(tmp_path, raw))]) == 0
    out = capsys.readouterr().out
    assert "constant domain: no (witness: edges e1, e2" in out

    raw["graph"]["weights"][0]["value"] = 0.9
    assert main(["validate", "--config", str(write(tmp_path, raw))]) == 1
    out = capsys.readouterr().out
    assert "stochasticity: VIOLATED" in out and "0.1" in out


def test_validate_broken_config(capsys):
    assert main(["validate", "--config", str(CONFIGS / "broken_missing_weight.json")]) == 1
    assert "graph.weights.v1/e2" in capsys.readouterr().err


def test_io_error(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "missing.json")]) == 3


def test_output_deterministic(tmp_path):
    raw = load("two_cycle.json")
    outputs = []
    for k in range(2):
        raw["output"] = {"directory": str(tmp_path / f"run{k}")}
        p = tmp_path / f"c{k}.json"
        p.write_text(json.dumps(raw))
        assert main(["simulate", "--config", str(p)]) == 0
        outputs.append({f.name: f.read_bytes() for f in (tmp_path / f"run{k}").iterdir()})
    # the directory is part of the config, so only compare bodies below the hash line
    for name in outputs[0]:
        a, b = outputs[0][name], outputs[1][name]
        if name.endswith(".csv"):
            a, b = a.split(b"\n", 1)[1], b.split(b"\n", 1)[1]
        else:
            a, b = json.loads(a), json.loads(b)
            a.pop("config_sha256"), b.pop("config_sha256")
        assert a == b
