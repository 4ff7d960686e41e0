import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from galilean_elastica.cli import EXIT_DOMAIN, EXIT_OK, EXIT_SCHEMA, EXIT_SOLVER, atomic_write, main


def write_spec(tmp_path, spec, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(spec))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


INVARIANTS = {"surface": {"name": "cylinder", "params": {"R": 2.0}},
              "problem": {"kind": "invariants", "length": 1.0,
                          "curve": {"u1": [0.0, 1.0], "u2": [0.1, 0.2, 0.3]}},
              "output": {"samples": 11}}


def test_invariants_csv(tmp_path):
    spec = write_spec(tmp_path, INVARIANTS)
    assert main(["invariants", "--spec", spec, "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "invariants.csv")
    assert rows[0] == ["x", "u1", "u2", "du1", "du2", "kappa_n", "tau_g", "kappa_g", "lambda"]
    assert len(rows) == 12
    x = float(rows[5][0])
    v_dot = 0.2 + 0.6 * x
    assert float(rows[5][5]) == pytest.approx(v_dot ** 2 / 2.0, rel=1e-14)
    assert abs(float(rows[5][7])) == pytest.approx(0.6, rel=1e-14)
    # 17 significant digits make the text round-trip exactly
    assert rows[5][1] == f"{float(rows[5][1]):.17g}"


def test_tabulated_surface_matches_named(tmp_path):
    R = 2.0
    u = np.linspace(-0.5, 1.5, 41)
    v = np.linspace(-1.0, 1.5, 61)
    U, V = np.meshgrid(u, v, indexing="ij")
    tab = {"jets": {"u1": u.tolist(), "u2": v.tolist(), "X": U.tolist(),
                    "Y": (R * np.cos(V / R)).tolist(), "Z": (R * np.sin(V / R)).tolist()}}
    spec = dict(INVARIANTS, surface=tab, output={"samples": 11, "basename": "tab"})
    assert main(["invariants", "--spec", write_spec(tmp_path, spec), "--out", str(tmp_path)]) == 0
    assert main(["invariants", "--spec", write_spec(tmp_path, INVARIANTS, "n.json"),
                 "--out", str(tmp_path)]) == 0
    a = np.array(read_csv(tmp_path / "tab.csv")[1:], float)
    b = np.array(read_csv(tmp_path / "invariants.csv")[1:], float)
    np.testing.assert_allclose(a, b, atol=1e-5)


def test_geodesic_json_format(tmp_path):
    spec = {"surface": {"name": "sphere"},
            "problem": {"kind": "geodesic", "length": 0.5,
                        "start": {"u1": 0.0, "u2": 0.0, "du1": 0.6}}}
    assert main(["geodesic", "--spec", write_spec(tmp_path, spec), "--format", "json",
                 "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "geodesic.json").read_text())
    assert not (tmp_path / "geodesic.csv").exists()
    np.testing.assert_allclose(report["samples"]["u2"][-1], 0.4, atol=1e-12)


@pytest.mark.parametrize("spec", [
    {"surface": {"name": "torus"}, "problem": {"kind": "complete"}},
    {"surface": {"name": "cylinder"}, "problem": {"kind": "complete", "length": -1}},
    {"surface": {"name": "cylinder"}},
    {"surface": {"name": "cylinder"}, "problem": {"kind": "complete"}, "extra": 1},
])
def test_schema_errors(tmp_path, spec, capsys):
    assert main(["elastic", "--spec", write_spec(tmp_path, spec), "--out", str(tmp_path)]) \
        == EXIT_SCHEMA
    assert "schema error" in capsys.readouterr().err


def test_invalid_json_names_the_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "surface": ,\n}')
    assert main(["elastic", "--spec", str(path)]) == EXIT_SCHEMA
    assert "line 2" in capsys.readouterr().err


def test_elastic_needs_catalog_surface_not_tabulated(tmp_path):
    u = np.linspace(0, 1, 8).tolist()
    grid = np.zeros((8, 8)).tolist()
    spec = {"surface": {"jets": {"u1": u, "u2": u, "X": grid, "Y": grid, "Z": grid}},
            "problem": {"kind": "complete"}}
    assert main(["elastic", "--spec", write_spec(tmp_path, spec)]) == EXIT_SCHEMA


def test_domain_error(tmp_path):
    spec = {"surface": {"name": "helical_p", "params": {"v_box": [-0.5, 0.5]}},
            "problem": {"kind": "geodesic", "start": {"u1": 0.0, "u2": 3.0, "du2": 0.4}}}
    assert main(["geodesic", "--spec", write_spec(tmp_path, spec), "--out", str(tmp_path)]) \
        == EXIT_DOMAIN


def test_bad_catalog_parameter_is_domain_error(tmp_path):
    spec = dict(INVARIANTS, surface={"name": "cylinder", "params": {"R": -1.0}})
    assert main(["invariants", "--spec", write_spec(tmp_path, spec), "--out", str(tmp_path)]) \
        == EXIT_DOMAIN


def test_elastic_cross_check(tmp_path):
    spec = {"surface": {"name": "cylinder", "params": {"R": 1.0}},
            "problem": {"kind": "complete", "start": {"u1": 0.0, "u2": 0.2, "du2": 0.5}},
            "solver": {"n": 128}}
    assert main(["elastic", "--spec", write_spec(tmp_path, spec), "--cross-check",
                 "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "elastic.json").read_text())
    assert report["status"] == "ok"
    assert report["cross_check"]["method"] == "discrete"
    assert report["cross_check"]["relative_gap"] < 1e-3


def test_elastic_no_convergence(tmp_path):
    spec = {"surface": {"name": "helical_p"},
            "problem": {"kind": "incomplete", "start": {"u1": 0.0, "u2": 0.1, "du2": 0.4}},
            "output": {"basename": "nc"}}
    assert main(["elastic", "--spec", write_spec(tmp_path, spec), "--out", str(tmp_path)]) \
        == EXIT_SOLVER
    report = json.loads((tmp_path / "nc.json").read_text())
    assert report["status"] == "no_convergence" and report["best"] is not None


SWEEP = {"surface": {"name": "cylinder"},
         "problem": {"kind": "geodesic", "length": 0.5,
                     "start": {"u1": 0.0, "u2": 0.1, "du2": 0.3}},
         "sweep": {"param": "R", "values": [1.0, 2.0, -1.0, 4.0]}}


def test_sweep_is_ordered_and_deterministic(tmp_path):
    spec = write_spec(tmp_path, SWEEP)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["sweep", "--spec", spec, "--jobs", "1", "--out", str(a)]) == EXIT_OK
    assert main(["sweep", "--spec", spec, "--jobs", "4", "--out", str(b)]) == EXIT_OK
    for name in ("sweep.csv", "sweep.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    rows = read_csv(a / "sweep.csv")
    assert [r[1] for r in rows[1:]] == ["1", "2", "-1", "4"]
    status = {r[1]: r[2] for r in rows[1:]}
    assert status["-1"] == "domain_error" and status["4"] == "ok"


def test_empty_sweep(tmp_path):
    spec = dict(SWEEP, sweep={"param": "R", "values": []})
    assert main(["sweep", "--spec", write_spec(tmp_path, spec), "--out", str(tmp_path)]) \
        == EXIT_OK
    assert read_csv(tmp_path / "sweep.csv") == [["param", "value", "status", "error"]]


def test_verify_catalog(tmp_path):
    assert main(["verify-catalog", "--quiet", "--json", "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "verify_catalog.json").read_text())
    assert report["failed"] == 0 and report["passed"] > 100
    assert all(q["note"] for q in report["quarantine"])


def test_atomic_write_leaves_no_temporaries(tmp_path):
    target = tmp_path / "sub" / "out.txt"
    atomic_write(str(target), "first")
    atomic_write(str(target), "second")
    assert target.read_text() == "second"
    assert os.listdir(tmp_path / "sub") == ["out.txt"]


def test_console_script(tmp_path):
    spec = write_spec(tmp_path, INVARIANTS)
    proc = subprocess.run([sys.executable, "-m", "galilean_elastica.cli", "invariants",
                           "--spec", spec, "--out", str(tmp_path)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout.splitlines()[0])["command"] == "invariants"
