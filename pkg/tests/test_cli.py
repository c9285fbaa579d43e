import json
import subprocess
import sys

import pytest

from symspace.cli import BENCH_OPS, main, read_config


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_no_arguments_prints_usage(capsys):
    code, out, err = run([], capsys)
    assert code == 2 and "usage:" in err and out == ""


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["verify", "--suite", "nope"],
        ["verify", "--trials", "-3"],
        ["verify", "--bogus"],
        ["demo", "mlr", "--lr", "abc"],
        ["demo", "mlr", "--sigma", "-0.1"],
        ["demo", "mlr", "--min-accuracy", "1.5"],
        ["bench", "--dim", "1"],
        ["bench", "--dim", "65"],
        ["gen", "--dim", "2"],
        ["demo", "mlr", "--classes", "1", "--quiet"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and err


def test_help_exits_0(capsys):
    code, out, _ = run(["--help"], capsys)
    assert code == 0 and "verify" in out


def test_verify_writes_report(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = run(["verify", "--suite", "kernels", "--seed", "7", "--trials", "4", "--report", str(path)], capsys)
    assert code == 0
    rep = json.loads(path.read_text())
    assert rep["suite"] == "kernels" and rep["seed"] == 7
    assert all(c["passed"] and c["trials"] == 4 for c in rep["checks"])
    assert "checks passed" in out


def test_verify_report_to_stdout_is_pure_json(capsys):
    code, out, err = run(["verify", "--suite", "attention", "--trials", "2", "--report", "-"], capsys)
    assert code == 0
    assert json.loads(out)["suite"] == "attention"
    assert "PASS" in err


def test_verify_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("SYMSPACE_SEED", "42")
    code, out, _ = run(["verify", "--suite", "kernels", "--trials", "1", "--report", "-"], capsys)
    assert code == 0 and json.loads(out)["seed"] == 42
    monkeypatch.setenv("SYMSPACE_SEED", "x")
    code, _, err = run(["verify", "--suite", "kernels", "--trials", "1"], capsys)
    assert code == 2 and "SYMSPACE_SEED" in err


def test_demo_prints_epochs_and_table(capsys):
    argv = ["demo", "mlr", "--distance", "g", "--samples", "60", "--epochs", "3", "--seed", "1"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert out.count("[g] epoch") == 3
    assert "final_acc" in out


def test_demo_min_accuracy_gate(capsys):
    argv = ["demo", "mlr", "--distance", "b", "--samples", "60", "--epochs", "1", "--lr", "0", "--quiet",
            "--min-accuracy", "1.0"]
    code, out, _ = run(argv, capsys)
    assert code == 1 and "[b] epoch" not in out


def test_gen_then_demo_on_csv(tmp_path, capsys):
    path = tmp_path / "d.csv"
    assert run(["gen", "--samples", "45", "--out", str(path)], capsys)[0] == 0
    assert path.read_text().startswith("f0,f1,label")
    code, out, _ = run(["demo", "mlr", "--data", str(path), "--distance", "h", "--epochs", "2", "--quiet"], capsys)
    assert code == 0 and out.splitlines()[-1].startswith("h")


def test_demo_bad_csv_is_usage_error(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("f0,label\nx,0\n")
    code, _, err = run(["demo", "mlr", "--data", str(path)], capsys)
    assert code == 2 and "line 2" in err


def test_bench_single_op(capsys):
    code, out, _ = run(["bench", "--op", "gi_dist", "--dim", "4", "--iters", "5"], capsys)
    assert code == 0 and "gi_dist" in out and "median_us" in out
    assert "iwasawa" in BENCH_OPS


def test_config_file_defaults_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# verify settings\nsuite = kernels\ntrials = 2\nseed = 9\n")
    code, out, _ = run(["--config", str(cfg), "verify", "--report", "-"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["suite"] == "kernels" and rep["seed"] == 9
    assert all(c["trials"] == 2 for c in rep["checks"])
    code, out, _ = run(["--config", str(cfg), "verify", "--seed", "3", "--report", "-"], capsys)
    assert json.loads(out)["seed"] == 3


@pytest.mark.parametrize(
    "text, needle",
    [("colour = red\n", "unknown key"), ("trials = -1\n", "trials"), ("suite = lorentz\n", "suite"), ("oops\n", "line 1")],
)
def test_config_file_errors(tmp_path, capsys, text, needle):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(text)
    code, _, err = run(["--config", str(cfg), "verify"], capsys)
    assert code == 2 and needle in err


def test_read_config_normalizes_dashes(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("min-accuracy = 0.5  # trailing comment\n\n")
    assert read_config(cfg) == {"min_accuracy": "0.5"}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "symspace"], capture_output=True, text=True)
    assert proc.returncode == 2 and "usage:" in proc.stderr


def test_reports_identical_apart_from_elapsed_time(capsys):
    argv = ["verify", "--suite", "gi", "--seed", "5", "--trials", "3", "--report", "-"]
    reports = []
    for extra in ([], ["--threads", "3"]):
        code, out, _ = run(argv + extra, capsys)
        assert code == 0
        rep = json.loads(out)
        rep.pop("elapsed_ms")
        reports.append(json.dumps(rep))
    assert reports[0] == reports[1]
