import io
import json
import math

import pandas as pd
import pytest
from click.testing import CliRunner

from levinger import cli as cli_module
from levinger import spectra
from levinger.checks import CheckResult
from levinger.cli import cli, read_frame, search_records
from levinger.spectra import ConvergenceError

TWO_BY_TWO = ["--family", "two-by-two", "--a", "1", "--b", "2", "--c", "3", "--d", "4"]


@pytest.fixture
def runner():
    return CliRunner()


def test_eval_ex1(runner):
    result = runner.invoke(cli, ["eval", "--family", "ex1", "--t", "0.09", "--t", "0.5"])

    assert result.exit_code == 0, result.output
    assert result.stdout.startswith("t,r,dr,d2r,eig_re_1")
    frame = pd.read_csv(io.StringIO(result.stdout), float_precision="round_trip")
    assert list(frame["t"]) == [0.09, 0.5]
    assert frame["r"].tolist() == pytest.approx([0.4, 0.5], abs=1e-14)


def test_scan_csv_round_trip(runner, tmp_path):
    out = tmp_path / "scan.csv"
    result = runner.invoke(cli, ["scan", *TWO_BY_TWO, "--grid", "11", "--out", str(out)])
    assert result.exit_code == 0, result.output

    frame = read_frame(str(out))
    assert len(frame) == 11
    assert list(frame.columns[:4]) == ["t", "r", "dr", "d2r"]

    again = tmp_path / "again.csv"
    frame.to_csv(again, index=False, float_format=cli_module.FLOAT_FORMAT)
    assert again.read_text() == out.read_text()


def test_scan_json(runner):
    result = runner.invoke(cli, ["scan", *TWO_BY_TWO, "--grid", "5", "--format", "json"])
    assert result.exit_code == 0, result.output

    document = json.loads(result.stdout)
    assert document["command"] == "scan"
    assert document["config"]["grid_size"] == 5
    assert document["config"]["family"] == "two-by-two(a=1, b=2, c=3, d=4)"
    assert len(document["rows"]) == 5
    assert document["rows"][0]["d2r"] is None


def test_matrix_file_source(runner, tmp_path):
    path = tmp_path / "a.txt"
    path.write_text("2\n1 2\n3 4\n")

    result = runner.invoke(cli, ["eval", "--matrix", str(path)])
    assert result.exit_code == 0, result.output
    assert result.stdout.splitlines()[1].startswith("0.5,5.")


def test_family_file_source(runner, tmp_path):
    path = tmp_path / "family.txt"
    path.write_text("kind = direct-sum\nleft.kind = ex1\nright.kind = ex1\n")
    out = tmp_path / "parts.csv"

    result = runner.invoke(cli, ["decompose", "--family-file", str(path), "--out", str(out)])
    assert result.exit_code == 0, result.output
    frame = read_frame(str(out))
    assert list(frame["part"]) == ["sym"] * 6 + ["skew"] * 6
    assert not frame["odd_order"].any()


def test_usage_errors_exit_with_2(runner, tmp_path):
    assert runner.invoke(cli, ["eval", "--family", "hankel"]).exit_code == 2
    assert runner.invoke(cli, ["eval"]).exit_code == 2
    assert runner.invoke(cli, ["eval", "--family", "tridiag-toeplitz", "--n", "4"]).exit_code == 2

    bad = tmp_path / "bad.txt"
    bad.write_text("3\n1 2 3\n")
    assert runner.invoke(cli, ["scan", "--matrix", str(bad)]).exit_code == 2
    assert runner.invoke(cli, ["scan", *TWO_BY_TWO, "--fd-step", "0.1"]).exit_code == 2
    assert runner.invoke(cli, ["figure", "7"]).exit_code == 2


def test_solver_failure_exits_with_3(runner, monkeypatch):
    def failing_scan(*args, **kwargs):
        raise ConvergenceError("QR iteration exceeded 0 sweeps")

    monkeypatch.setattr(cli_module, "scan", failing_scan)
    result = runner.invoke(cli, ["scan", *TWO_BY_TWO])
    assert result.exit_code == 3


def test_scan_with_failed_points_exits_with_3(runner, monkeypatch, tmp_path):
    monkeypatch.setattr(spectra, "QR_SWEEPS_PER_ROW", 0)
    out = tmp_path / "scan.csv"
    family = ["--family", "tridiag-toeplitz", "--n", "4", "--a", "2", "--b", "1", "--c", "3"]
    result = runner.invoke(cli, ["scan", *family, "--grid", "5", "--out", str(out)])

    assert result.exit_code == 3
    frame = read_frame(str(out))
    assert len(frame) == 5
    assert frame["r"].notna().all()
    assert frame["eig_re_1"].isna().all()


def test_decompose_reports_summary_in_output(runner, tmp_path):
    path = tmp_path / "a.txt"
    path.write_text("3\n0 1 2\n3 0 1\n1 1 0\n")
    out = tmp_path / "parts.json"

    result = runner.invoke(
        cli, ["decompose", "--matrix", str(path), "--format", "json", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output

    rows = json.loads(out.read_text())["rows"]
    assert len(rows) == 6
    for row in rows:
        assert row["odd_order"] is True
        assert row["skew_rank_deficient"] is True
        assert row["extension_bound"] > 0.0
        assert row["skew_sigma_min"] == pytest.approx(0.0, abs=1e-9)


def test_verify_exit_codes(runner, monkeypatch):
    outcome = [CheckResult("ex1-spectrum", True, 0.0, 1e-10)]
    monkeypatch.setattr(cli_module, "run_acceptance", lambda **kwargs: outcome)

    result = runner.invoke(cli, ["verify", "--format", "json"])
    assert result.exit_code == 0, result.output
    document = json.loads(result.stdout)
    assert set(document) == {"command", "config", "checks", "witnesses"}
    assert document["checks"][0]["pass"] is True

    outcome.append(CheckResult("weight-limit", False, 2.0, 10.0))
    result = runner.invoke(cli, ["verify"])
    assert result.exit_code == 1


def test_verify_reports_witness(runner, monkeypatch):
    monkeypatch.setattr(cli_module, "run_acceptance", lambda **kwargs: [])
    result = runner.invoke(cli, ["verify", "--family", "ex1", "--format", "json"])

    assert result.exit_code == 0, result.output
    witness = json.loads(result.stdout)["witnesses"][0]
    assert witness["margin"] > 1e-7
    assert witness["t1"] < witness["t2"]


def test_figure_ex1(runner):
    result = runner.invoke(cli, ["figure", "1", "--grid", "101"])
    assert result.exit_code == 0, result.output

    frame = pd.read_csv(io.StringIO(result.stdout), float_precision="round_trip")
    row = frame.iloc[9]
    assert row["t"] == 0.09
    assert row["r"] == pytest.approx(0.4)
    assert sorted(row[["eig_re_1", "eig_re_2", "eig_re_3"]]) == pytest.approx(
        [-math.sqrt(0.0819), math.sqrt(0.0819), 0.4]
    )


def test_figure_two_parameter_flags_nonconcave_slice():
    frame = cli_module.figure_two_parameter(grid_size=101, h_steps=5)
    flagged = frame[frame["h_slice"]]

    assert not flagged.empty
    assert flagged["nonconcave"].all()
    assert not frame[frame["h"] == 0.0]["nonconcave"].any()


def test_figure_toeplitz_convex_endpoints():
    frame = cli_module.figure_toeplitz_convex(grid_size=21, fd_step=1e-3)
    assert frame["d2r"].iloc[0] > 0.0
    assert frame["d2r"].notna().all()


def test_search_is_reproducible(runner):
    args = ["search", "--count", "20", "--n", "3", "--seed", "7"]
    first = runner.invoke(cli, args)
    second = runner.invoke(cli, args)

    assert first.exit_code == 0, first.output
    assert first.stdout == second.stdout
    assert first.stdout.splitlines()[0] == "draw,n,t1,t2,margin,matrix"


def test_search_finds_nothing_for_tridiagonal_toeplitz():
    frame = search_records(seed=1, count=10, n=5, sparsity=0.0, draw="tridiag-toeplitz")
    assert frame.empty
    assert list(frame.columns) == ["draw", "n", "t1", "t2", "margin", "matrix"]
