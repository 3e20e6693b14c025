import json
import subprocess
import sys

import numpy as np
import pytest

from segsolve import cli
from segsolve.benchmarks import example2
from segsolve.config import load_problem, problem_from_dict, problem_to_dict, save_problem
from segsolve.errors import ProblemDefinitionError
from segsolve.grid import read_csv
from segsolve.oracle import random_problem
from segsolve.solver import SolveConfig, solve


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_solve_writes_fields(tmp_path):
    assert run("solve", "--problem", "example2", "--n", 10, "--iters", 50, "--out", tmp_path) == 0
    names = sorted(f.name for f in tmp_path.iterdir())
    assert names == ["meta.json", "report.json", "u_1.csv", "u_2.csv", "u_3.csv", "w.csv"]
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["iterations"] == 50 and report["n"] == 10 and report["m"] == 3
    assert "wall_time" not in report
    state, _ = solve(example2(10), SolveConfig(max_iterations=50))
    np.testing.assert_array_equal(read_csv(tmp_path / "w.csv").values, state.total())
    np.testing.assert_array_equal(read_csv(tmp_path / "u_2.csv").values, state.values[1])


def test_solve_with_tolerance(tmp_path):
    assert run("solve", "--problem", "example1", "--n", 8, "--iters", 5000, "--tol", 1e-12,
               "--sweep", "gauss_seidel", "--reaction", "implicit", "--out", tmp_path) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["converged"] and report["iterations"] < 5000
    assert report["sweep"] == "gauss_seidel" and report["reaction"] == "implicit"


def test_bad_resolution_exit_code(tmp_path, capsys):
    assert run("solve", "--problem", "example2", "--n", 1, "--out", tmp_path) == 2
    assert "n_per_side" in capsys.readouterr().err


def test_unknown_problem(tmp_path):
    assert run("solve", "--problem", "nope", "--out", tmp_path) == 2


def test_overlapping_config_names_node(tmp_path, capsys):
    cfg = {"name": "clash", "dim": 1, "n": 4, "m": 2,
           "dynamics": [{"kind": "zero"}, {"kind": "zero"}],
           "boundary": {"values": [[1.0, 0.0], [1.0, 0.0]]}}
    path = tmp_path / "clash.json"
    path.write_text(json.dumps(cfg))
    assert run("solve", "--config", path, "--out", tmp_path / "out") == 2
    assert "boundary node (0,)" in capsys.readouterr().err


@pytest.mark.parametrize("text", ["{not json", json.dumps({"n": 4}), json.dumps([1, 2])])
def test_malformed_config(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    assert run("solve", "--config", path, "--out", tmp_path) == 2


def test_missing_config_is_io_error(tmp_path):
    assert run("solve", "--config", tmp_path / "absent.json", "--out", tmp_path) == 1


def test_table_requires_exact_solution(tmp_path):
    assert run("table", "--problem", "example1", "--out", tmp_path) == 2


def test_table_output(tmp_path, capsys):
    assert run("table", "--problem", "example2", "--n-list", "10", "--rules", "5,10", "--out", tmp_path) == 0
    data = json.loads((tmp_path / "table.json").read_text())
    assert data["N"] == [10] and [r["M_rule"] for r in data["rows"]] == ["5N", "10N"]
    assert (tmp_path / "table.txt").read_text() == capsys.readouterr().out


def test_validate_passes(tmp_path):
    assert run("validate", "--instances", 4, "--trials", 500, "--out", tmp_path) == 0
    data = json.loads((tmp_path / "validate.json").read_text())
    assert data["ok"] and data["oracle"]["agree"] == 4


def test_validate_catches_injected_dynamics(tmp_path):
    assert run("validate", "--instances", 1, "--trials", 500, "--inject-nonmonotone", "--out", tmp_path) == 4
    data = json.loads((tmp_path / "validate.json").read_text())
    bad = [p for p in data["probe"]["runs"] if not p["ok"]]
    assert len(bad) == 1 and bad[0]["witnesses"]


def test_probe_command(tmp_path):
    assert run("probe", "--trials", 300, "--seed", 2, "--out", tmp_path) == 0
    data = json.loads((tmp_path / "probe.json").read_text())
    assert data["trials"] == 300 and data["seed"] == 2 and data["ok"]
    assert run("probe", "--trials", 300, "--inject-nonmonotone", "--out", tmp_path) == 4


def test_probe_rejects_three_phases(tmp_path):
    assert run("probe", "--problem", "example2", "--n", 8, "--out", tmp_path) == 2


def test_refine_command(tmp_path):
    assert run("refine", "--problem", "example2", "--n-list", "5,10,20", "--out", tmp_path) == 0
    data = json.loads((tmp_path / "refine.json").read_text())
    assert data["reference"] == "exact" and data["N"] == [5, 10, 20]
    assert run("refine", "--problem", "example1", "--n-list", "4,8,16", "--out", tmp_path / "b") == 0
    data = json.loads((tmp_path / "b" / "refine.json").read_text())
    assert data["reference"] == "finest" and data["N"] == [4, 8]
    assert run("refine", "--problem", "example1", "--n-list", "4,6,8", "--out", tmp_path / "c") == 2


def test_config_round_trip(tmp_path):
    path = tmp_path / "ex2.json"
    save_problem(example2(12), path)
    assert json.loads(path.read_text())["boundary"] == {"preset": "example2"}
    assert run("solve", "--config", path, "--iters", 100, "--out", tmp_path / "a") == 0
    assert run("solve", "--problem", "example2", "--n", 12, "--iters", 100, "--out", tmp_path / "b") == 0
    assert (tmp_path / "a" / "w.csv").read_bytes() == (tmp_path / "b" / "w.csv").read_bytes()


def test_explicit_values_round_trip():
    p = random_problem(5)
    again = problem_from_dict(problem_to_dict(p))
    np.testing.assert_array_equal(again.boundary_values(), p.boundary_values())
    assert [d.to_config() for d in again.dynamics] == [d.to_config() for d in p.dynamics]


def test_config_resolution_override(tmp_path):
    path = tmp_path / "ex2.json"
    save_problem(example2(12), path)
    assert load_problem(path, n=20).n == 20


def test_config_errors_are_problem_errors():
    base = {"n": 4, "m": 2, "dim": 1, "dynamics": [{"kind": "zero"}] * 2}
    with pytest.raises(ProblemDefinitionError, match="preset"):
        problem_from_dict({**base, "boundary": {"preset": "example7"}})
    with pytest.raises(ProblemDefinitionError):
        problem_from_dict({**base, "boundary": {"values": [[1.0], [0.0]]}})
    with pytest.raises(ProblemDefinitionError):
        problem_from_dict({**base, "dynamics": [{"kind": "constant", "coef": -1}] * 2,
                           "boundary": {"values": [[0, 0], [0, 0]]}})


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "segsolve", "solve", "--problem", "example1", "--n", "4",
                          "--iters", "3", "--out", str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert "iterations=3" in out.stdout
