import subprocess
import sys

import pytest

from bcsplit import cli
from bcsplit.harness import CSV_HEADER, parse_csv
from bcsplit.verify import CheckResult

SMALL_RUN = ["run", "--problem", "p1", "--method", "strang", "--h", "0.01", "--k", "0.01,0.005", "--T", "0.05"]


def _exit_code(argv) -> int:
    try:
        return cli.main(argv)
    except SystemExit as exc:
        return exc.code


def test_run_writes_csv(capsys):
    assert cli.main(SMALL_RUN) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == ",".join(CSV_HEADER)
    report = parse_csv(out)
    assert report.ks == (0.01, 0.005)
    assert report.global_errors[1] < report.global_errors[0]


def test_run_pretty_and_error_kind(capsys):
    assert cli.main(SMALL_RUN + ["--format", "pretty", "--error", "local"]) == 0
    out = capsys.readouterr().out
    assert "local error" in out and "global error" not in out


def test_out_file_matches_stdout(tmp_path, capsys):
    target = tmp_path / "report.csv"
    assert cli.main(SMALL_RUN + ["--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert cli.main(SMALL_RUN) == 0
    assert target.read_text() == capsys.readouterr().out


def test_workers_give_identical_report(capsys):
    cli.main(SMALL_RUN)
    serial = capsys.readouterr().out
    cli.main(SMALL_RUN + ["--workers", "2"])
    assert capsys.readouterr().out == serial


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--problem", "nope", "--method", "lie", "--h", "0.01", "--k", "0.01,0.005", "--T", "1"],
        ["run", "--problem", "p1", "--method", "lie-split2d", "--h", "0.01", "--k", "0.01,0.005", "--T", "1"],
        ["run", "--problem", "p1", "--method", "lie", "--h", "0.01", "--k", "0.01,0.004", "--T", "1"],
        ["run", "--problem", "p1", "--method", "lie", "--h", "0.01", "--k", "0.01", "--T", "1"],
        ["run", "--problem", "p1", "--method", "lie", "--h", "0.01", "--k", "a,b", "--T", "1"],
        ["run", "--problem", "p1", "--method", "lie", "--h", "0.01", "--k", "0.01,0.005", "--T", "0"],
        SMALL_RUN + ["--workers", "0"],
        ["reproduce", "--table", "9"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert _exit_code(argv) == 2
    assert capsys.readouterr().err


def test_numeric_failure_exits_1(capsys):
    argv = ["run", "--problem", "p1", "--method", "lie-standard", "--h", "0.01", "--k", "0.02,0.01", "--T", "1"]
    assert _exit_code(argv) == 1
    assert "numerical failure" in capsys.readouterr().err


def test_reproduce_pretty_lists_reference(monkeypatch, capsys):
    from bcsplit.harness import ErrorReport

    seen = {}

    def fake_run(plan, workers=1):
        seen["plan"] = plan
        return ErrorReport(plan.ks, (1.0, 0.5, 0.25), (2.0, 1.0, 0.5))

    monkeypatch.setattr(cli, "run_plan", fake_run)
    assert cli.main(["reproduce", "--table", "4", "--full-h", "--format", "pretty", "--trace", "exact"]) == 0
    out = capsys.readouterr().out
    assert "reference global error 1.8549e-04" in out
    plan = seen["plan"]
    assert (plan.problem, plan.method, plan.h, plan.backend, plan.trace) == (
        "p1_neumann", "strang", 2.5e-4, "krylov", "exact"
    )


@pytest.mark.parametrize("passed, code", [(True, 0), (False, 1)])
def test_verify_exit_status(monkeypatch, capsys, passed, code):
    monkeypatch.setattr(cli, "run_all", lambda: [CheckResult("stub", passed, "detail")])
    assert cli.main(["verify"]) == code
    assert ("PASS" if passed else "FAIL") + " stub: detail" in capsys.readouterr().out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "bcsplit", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "reproduce" in res.stdout
