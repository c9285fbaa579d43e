"""Acceptance criteria, one test per criterion.

Each test prints a single ``ACCEPT <n> PASS|FAIL`` line (visible with or
without ``-s``) and then asserts. Property criteria run the registered
checks at the trial counts and tolerances listed below; the tolerance used
for the verdict is the one in this table, not the check's own.
"""
import itertools
import math
import re
import subprocess
import sys
import time

import numpy as np
import pytest

from symspace import verify
from symspace.cli import main
from symspace.oracles import angular_metric_estimate

SEED = 0


def _find(name):
    for checks in verify._REGISTRY.values():
        for c in checks:
            if c.name == name:
                return c
    raise KeyError(name)


def _run(name, tol, trials):
    res = verify.run_check(_find(name), SEED, trials)
    ok = res.max_error is not None and res.max_error <= tol
    err = "nan" if res.max_error is None else f"{res.max_error:.2e}"
    return ok, f"{name}: {err} <= {tol:g} over {res.trials}"


def _announce(capsys, number, title, ok, details):
    with capsys.disabled():
        print(f"\nACCEPT {number:>2} {'PASS' if ok else 'FAIL'}  {title}  [{'; '.join(details)}]")


def _criterion(capsys, number, title, specs, extra=()):
    results = [_run(*s) for s in specs] + list(extra)
    ok = all(r[0] for r in results)
    _announce(capsys, number, title, ok, [r[1] for r in results])
    assert ok, [r[1] for r in results if not r[0]]


def test_01_busemann_closed_forms_vs_limit(capsys):
    start = time.perf_counter()
    results = [
        _run("busemann_ball_limit_t40", 1e-8, 100),
        _run("busemann_ball_ray_exact", 1e-12, 100),
        _run("busemann_pem_decay_ratio", 0.6, 100),
        _run("busemann_pem_ray_exact", 1e-12, 100),
        _run("busemann_gi_decay_ratio", 0.6, 100),
        _run("busemann_gi_ray_exact", 1e-12, 100),
    ]
    secs = time.perf_counter() - start
    results.append((secs < 10.0, f"runtime {secs:.2f}s < 10s"))
    _criterion(capsys, 1, "Busemann closed forms vs limit oracle", [], results)


def test_02_gi_norm_is_half_affine_distance(capsys):
    _criterion(capsys, 2, "gi_norm of difference vs half affine-invariant distance",
               [("norm_of_difference_equals_half_affine_distance", 1e-10, 200)])


def test_03_gi_inner_k_invariance(capsys):
    _criterion(capsys, 3, "K-invariance of gi_inner", [("inner_product_k_invariance", 1e-10, 200)])


def test_04_pem_b_distance_closed_vs_pipeline(capsys):
    _criterion(capsys, 4, "PEM b-distance closed form vs pipeline (log, power 0.5)", [
        ("b_distance_pem_closed_vs_definition_log", 1e-12, 200),
        ("b_distance_pem_closed_vs_definition_power0.5", 1e-12, 200),
    ])


def test_05_gi_b_distance_closed_vs_pipeline(capsys):
    _criterion(capsys, 5, "GI b-distance closed form vs pipeline with random k",
               [("b_distance_gi_closed_vs_definition", 1e-8, 200)])


def test_06_iwasawa_cholesky_vs_qr(capsys):
    _criterion(capsys, 6, "Iwasawa Cholesky route vs QR oracle, cond <= 1e4",
               [("iwasawa_cholesky_vs_qr", 1e-10, 500)])


def test_07_angular_metric_orthonormal_pairs(capsys):
    # every ordered standard-basis pair for m = 2..5 at each t
    worst = 0.0
    for m, t in itertools.product(range(2, 6), (1.0, 10.0, 1e3)):
        e = np.eye(m)
        for i, j in itertools.permutations(range(m), 2):
            worst = max(worst, abs(angular_metric_estimate(e[i], e[j], t) - math.sqrt(2.0)))
    extra = [(worst <= 1e-12, f"all basis pairs m<=5: {worst:.2e} <= 1e-12")]
    _criterion(capsys, 7, "angular metric on orthonormal pairs equals sqrt 2",
               [("angular_metric_orthonormal_pair", 1e-12, 3)], extra)


def test_08_fc_round_trips(capsys):
    _criterion(capsys, 8, "FC round trips (GI and LE)", [
        ("gi_fc_round_trip", 1e-8, 100),
        ("le_fc_round_trip", 1e-10, 100),
    ])


def test_09_attention(capsys):
    _criterion(capsys, 9, "attention permutation equivariance and weight simplex", [
        ("permutation_equivariance_le", 1e-10, 30),
        ("permutation_equivariance_gi", 1e-10, 30),
        ("weights_on_simplex_le", 1e-10, 30),
        ("weights_on_simplex_gi", 1e-10, 30),
    ])


def test_10_ball_identities(capsys):
    _criterion(capsys, 10, "ball distance identities, Lorentz isometry, exp/log", [
        ("gyro_distance_identity", 1e-10, 200),
        ("lorentz_ball_isometry", 1e-9, 200),
        ("ball_exp_log_round_trip", 1e-12, 200),
    ])


def test_11_g_distance_vs_projection(capsys):
    _criterion(capsys, 11, "g-distance vs geodesic projection oracle in the 2-D ball",
               [("g_distance_vs_projection_oracle", 1e-3, 20)])


_TABLE_ROW = re.compile(r"^([ghb])\s+\S+\s+\S+\s+(\S+)\s+(\S+)$")


@pytest.mark.parametrize("kind", ["g", "h", "b"])
def test_12_demo_mlr(capsys, kind):
    argv = ["demo", "mlr", "--distance", kind, "--dim", "2", "--classes", "3", "--samples", "300",
            "--sigma", "0.1", "--epochs", "200", "--lr", "0.05", "--seed", "1"]
    start = time.perf_counter()
    code = main(argv)
    secs = time.perf_counter() - start
    out = capsys.readouterr().out
    rows = [m for m in map(_TABLE_ROW.match, out.splitlines()) if m]
    acc = float(rows[-1].group(2)) if rows else float("nan")
    epochs = sum(1 for line in out.splitlines() if line.startswith(f"[{kind}] epoch"))
    results = [
        (code == 0, f"exit {code}"),
        (acc >= 0.9, f"final train accuracy {acc:.4f} >= 0.90"),
        (epochs == 200, f"{epochs} epochs"),
        (secs < 60.0, f"runtime {secs:.1f}s < 60s"),
    ]
    _criterion(capsys, 12, f"demo mlr head {kind}", [], results)


def test_13_full_verify_run(capsys, tmp_path):
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "symspace", "verify", "--suite", "all", "--report", str(tmp_path / "r.json")],
        capture_output=True, text=True,
    )
    secs = time.perf_counter() - start
    results = [(proc.returncode == 0, f"exit {proc.returncode}"), (secs < 120.0, f"runtime {secs:.1f}s < 120s")]
    _criterion(capsys, 13, "verify --suite all, single-threaded", [], results)
