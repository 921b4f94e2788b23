import csv
import io
import json

import pytest

from pdae.main import main
from pdae.services import problem as problem_module
from pdae.services import theory
from pdae.services.stencil import StencilTable, build_stencil

from conftest import make_zero_problem

DEMO_SOLVE = ["solve", "--example", "demo", "--h", "0.1", "--tau", "0.1", "--m1", "2", "--m2", "2"]


# -------------------------
# solve
# -------------------------
def test_solve_table(capsys):
    assert main(DEMO_SOLVE) == 0
    out = capsys.readouterr().out
    assert out.startswith("delta_u")
    assert "cells              25" in out


def test_solve_json(capsys):
    assert main(DEMO_SOLVE + ["--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["cells_solved"] == 25
    assert report["delta_u"] < 1e-2


def test_solve_csv(capsys):
    assert main(DEMO_SOLVE + ["--format", "csv"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 1
    assert int(rows[0]["m1"]) == 2


def test_solve_node_stride(capsys):
    assert main(DEMO_SOLVE + ["--stride", "node", "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["stride"] == "node"
    assert report["cells_solved"] == 81


def test_solve_custom_domain(capsys):
    assert main(DEMO_SOLVE + ["--X", "2", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["n1"] == 20


@pytest.mark.parametrize("argv", [
    ["solve", "--example", "1", "--h", "0.1", "--tau", "0.1", "--m1", "0", "--m2", "2"],
    ["solve", "--example", "9", "--h", "0.1", "--tau", "0.1", "--m1", "2", "--m2", "2"],
    ["solve", "--example", "1", "--h", "0.3", "--tau", "0.1", "--m1", "2", "--m2", "2"],
    ["solve", "--example", "1", "--h", "abc"],
    DEMO_SOLVE + ["--stride", "diagonal"],
    ["solve"],
    ["frobnicate"],
])
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err


def test_singular_problem_exits_2(monkeypatch, capsys):
    monkeypatch.setitem(problem_module.PROBLEMS, "zero", make_zero_problem)
    code = main(["solve", "--example", "zero", "--h", "0.1", "--tau", "0.1", "--m1", "2", "--m2", "2"])
    assert code == 2
    assert "cell (i=0, j=0)" in capsys.readouterr().err


@pytest.mark.slow
def test_solve_example2_published_row(capsys):
    argv = ["solve", "--example", "2", "--h", "0.01", "--tau", "0.01", "--m1", "2", "--m2", "2",
            "--stride", "node", "--format", "json"]
    assert main(argv) == 0
    delta = json.loads(capsys.readouterr().out)["delta_u"]
    assert 3.23e-4 / 3 <= delta <= 3.23e-4 * 3


# -------------------------
# analyze
# -------------------------
def test_analyze_json_fields(capsys):
    assert main(["analyze", "--example", "2", "--samples", "4"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report) == {
        "samples", "rank_degree_b", "rank_degree_a", "multiplicity_constant",
        "lemma2_min_separation", "mu", "xi_j_min", "canonical_residual",
    }
    assert set(report["samples"][0]) == {"x", "t", "rank_a", "rank_b", "degree", "roots"}
    assert sorted(r["mult"] for r in report["samples"][0]["roots"]) == [1, 2, 3]


def test_analyze_example1(capsys):
    assert main(["analyze", "--example", "1", "--samples", "4", "--full"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["rank_degree_b"] is True
    assert report["canonical_residual"] <= 1e-10
    assert report["status"] == "warn"


def test_analyze_bad_samples(capsys):
    assert main(["analyze", "--example", "1", "--samples", "0"]) == 1


# -------------------------
# verify
# -------------------------
def test_verify_passes(capsys):
    assert main(["verify", "--m-max", "4"]) == 0
    out = capsys.readouterr().out
    assert out.count("pass") >= 3


def test_verify_default_reports_high_degrees_without_failing(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    gamma_line = next(line for line in out.splitlines() if line.startswith("gamma"))
    assert "pass" in gamma_line
    assert "m=5:0.07" in gamma_line
    assert "m=8:-0.34" in gamma_line and gamma_line.endswith("*]")


def test_verify_detects_corrupted_stencil(monkeypatch, capsys):
    def corrupted(m):
        st = build_stencil(m)
        return StencilTable(m=st.m, full_weights=st.full_weights, gamma0=-st.gamma0, gamma=st.gamma)

    monkeypatch.setattr(theory, "build_stencil", corrupted)
    assert main(["verify", "--m-max", "3"]) == 3
    assert "FAIL" in capsys.readouterr().out


def test_verify_bad_m_max(capsys):
    assert main(["verify", "--m-max", "20"]) == 1


# -------------------------
# sweep
# -------------------------
def _write_config(tmp_path, rows, **extra):
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps({"rows": rows, **extra}))
    return str(path)


def test_sweep_csv_to_file(tmp_path):
    rows = [
        {"label": 1, "example": "demo", "h": 0.1, "tau": 0.1, "m1": 2, "m2": 2},
        {"label": 2, "example": "demo", "h": 0.1, "tau": 0.1, "m1": 4, "m2": 4},
    ]
    out = tmp_path / "out.csv"
    code = main(["sweep", _write_config(tmp_path, rows), "--format", "csv", "--output", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "N,h,tau,t0,T,x0,X,m1,m2,delta_u"
    assert len(lines) == 3


def test_sweep_out_of_tolerance_exits_3(tmp_path, capsys):
    rows = [{"label": 1, "example": "demo", "h": 0.1, "tau": 0.1, "m1": 2, "m2": 2, "expected_delta_u": 10.0}]
    assert main(["sweep", _write_config(tmp_path, rows)]) == 3
    assert "out of tolerance" in capsys.readouterr().out


def test_sweep_parallel_workers(tmp_path, capsys):
    rows = [{"label": k, "example": "demo", "h": 0.1, "tau": 0.1, "m1": k, "m2": 2} for k in (1, 2, 3)]
    assert main(["--workers", "2", "sweep", _write_config(tmp_path, rows), "--format", "json"]) == 0
    assert [r["N"] for r in json.loads(capsys.readouterr().out)] == [1, 2, 3]


@pytest.mark.parametrize("rows", [[], [{"label": 1, "example": "1"}]])
def test_sweep_bad_config_exits_1(tmp_path, rows, capsys):
    assert main(["sweep", _write_config(tmp_path, rows)]) == 1


def test_sweep_missing_config(capsys):
    assert main(["sweep", "no-such-table"]) == 1


def test_repeated_sweeps_write_identical_csv(tmp_path):
    rows = [
        {"label": 1, "example": "demo", "h": 0.1, "tau": 0.1, "m1": 2, "m2": 2},
        {"label": 2, "example": "2", "h": 0.1, "tau": 0.1, "m1": 3, "m2": 2, "stride": "node"},
    ]
    config = _write_config(tmp_path, rows)
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", config, "--format", "csv", "--output", str(first)]) == 0
    assert main(["--workers", "2", "sweep", config, "--format", "csv", "--output", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
