"""The ten acceptance criteria, each at its stated tolerance.

Every criterion prints one PASS/FAIL line; under pytest the lines are also
collected into a summary section.  Run this file directly to get only the
summary lines.
"""

import json
import math
import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from qcorr import fixtures
from qcorr.collective import interpolate_R, r_from_collective
from qcorr.measures import (
    bprime_from_b,
    bell_B,
    fef,
    gws_oracle,
    measure_set,
    measures_from_R,
    s3_from_s,
    steering_S,
    thresholds,
    werner_oracle,
)
from qcorr.pipeline import run_werner_pipeline
from qcorr.states import bloch_decompose, corr_R, gws, projector, random_density, random_pure, werner

ROOT = Path(__file__).resolve().parents[1]
ARTIFACTS = ROOT / "artifacts"
SQ2, SQ3 = math.sqrt(2.0), math.sqrt(3.0)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run
    ACCEPTANCE_LINES = {}


def _report(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    return ok


def _R(rho):
    return corr_R(bloch_decompose(rho))


# --------------------------------------------------------------------- 1


def _bisect(func, tol=1e-10):
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if func(_R(werner(mid))) > 0:
            hi = mid
        else:
            lo = mid
    return lo, hi


def criterion_1():
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for func, exact in ((fef, 1 / 3), (steering_S, 1 / SQ3), (bell_B, 1 / SQ2)):
        lo, hi = _bisect(func)
        worst = max(worst, abs(lo - exact), abs(hi - exact))
        # zero at and below the threshold, positive just above it
        ok &= func(_R(werner(exact))) == 0.0 and func(_R(werner(exact - 1e-6))) == 0.0
        ok &= func(_R(werner(exact + 1e-8))) > 0.0
    elapsed = time.perf_counter() - t0
    ok &= worst <= 1e-9 and elapsed < 1.0
    return ok, f"threshold roots off by at most {worst:.1e} (tol 1e-9), {elapsed:.2f}s (< 1s)"


# ------------------------------------------------------------------ 2, 3


def _table_check(entries):
    worst_exp = 0.0
    theory_ok = True
    for e in entries:
        th = getattr(werner_oracle(e.p), e.measure)
        theory_ok &= round(th, 3) == e.theory_value
        exp = getattr(measures_from_R(interpolate_R(fixtures.R_BELL, fixtures.R_NOISE, e.p)), e.measure)
        worst_exp = max(worst_exp, abs(exp - e.experiment_value))
    return theory_ok, worst_exp


def criterion_2():
    t0 = time.perf_counter()
    theory_ok, worst = _table_check(fixtures.TABLE1)
    elapsed = time.perf_counter() - t0
    ok = theory_ok and worst <= 0.005 and elapsed < 1.0
    return ok, (f"Table 1 theory to 3 decimals: {theory_ok}; experiment max |delta| {worst:.4f} (tol 0.005); "
                f"{elapsed:.2f}s")


def criterion_3():
    theory_ok, worst = _table_check(fixtures.TABLE2)
    ok = theory_ok and worst <= 0.005
    return ok, f"Table 2 theory to 3 decimals: {theory_ok}; experiment max |delta| {worst:.4f} (tol 0.005)"


# --------------------------------------------------------------------- 4


def criterion_4():
    t0 = time.perf_counter()
    grid = np.linspace(0.0, 1.0, 51)
    step = grid[1] - grid[0]
    worst = 0.0
    levels = set()
    boundary_ok = True
    for q in grid:
        p_e, p_s, p_b = thresholds(q)
        for p in grid:
            generic = measure_set(gws(p, q))
            worst = max(worst, generic.max_abs_diff(gws_oracle(p, q)))
            h = generic.hierarchy_H
            levels.add(h)
            expected = int(p > p_e) + int(p > p_s) + int(p > p_b)
            near = min(abs(p - t) for t in (p_e, p_s, p_b)) <= step
            boundary_ok &= h == expected or near
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and levels == {0, 1, 2, 3} and boundary_ok and elapsed < 10.0
    return ok, (f"51x51 oracle vs generic max diff {worst:.1e} (tol 1e-9); plateaus {sorted(levels)}; "
                f"boundaries at p_E/p_S/p_B: {boundary_ok}; {elapsed:.1f}s (< 10s)")


# --------------------------------------------------------------------- 5


def criterion_5():
    t0 = time.perf_counter()
    worst_m = worst_e = 0.0
    for seed in range(1000):
        rho = random_density(seed, rank=1 + seed % 4)
        d = bloch_decompose(rho)
        Rc = r_from_collective(rho)
        worst_m = max(worst_m, float(np.max(np.abs(Rc.matrix - d.T @ d.T.T))))
        worst_e = max(worst_e, float(np.max(np.abs(Rc.eigenvalues - corr_R(d).eigenvalues))))
    elapsed = time.perf_counter() - t0
    ok = worst_m <= 1e-9 and worst_e <= 1e-9 and elapsed < 30.0
    return ok, (f"collective vs T T^T max {worst_m:.1e}, spectrum vs T^T T max {worst_e:.1e} (tol 1e-9); "
                f"{elapsed:.1f}s (< 30s)")


# --------------------------------------------------------------------- 6


def criterion_6():
    worst = 0.0
    for seed in range(1000):
        psi = random_pure(seed)
        a, b, c, d = psi
        target = 2 * abs(a * d - b * c)
        ms = measure_set(projector(psi))
        for v in (ms.bell_B, ms.steering_S, ms.fef, ms.concurrence, ms.negativity):
            worst = max(worst, abs(v - target))
    return worst <= 1e-8, f"pure states: max |measure - 2|ad-bc|| = {worst:.1e} (tol 1e-8)"


# --------------------------------------------------------------------- 7


def criterion_7():
    eps = 1e-9
    chain_fail = 0
    link_worst = 0.0
    violations = []
    for seed in range(10_000):
        rho = random_density(seed, rank=1 + seed % 4)
        ms = measure_set(rho)
        chain_fail += not (ms.bell_B <= ms.steering_S + eps and ms.steering_S <= ms.fef + eps)
        chain_fail += not (ms.steering_S2 <= ms.steering_S3 + eps)
        chain_fail += not (ms.steering_S2 <= ms.bell_B + eps and ms.steering_S3 <= ms.steering_S + eps)
        s3 = s3_from_s(ms.steering_S) if ms.steering_S > 0 else 0.0
        bp = bprime_from_b(ms.bell_B) if ms.bell_B > 0 else 0.0
        link_worst = max(link_worst, abs(ms.steering_S3 - s3), abs(ms.bell_Bprime - bp))
        if ms.fef > ms.negativity + eps or ms.negativity > ms.concurrence + eps:
            violations.append({"seed": seed, "rank": 1 + seed % 4, "fef": ms.fef,
                               "negativity": ms.negativity, "concurrence": ms.concurrence})
    ARTIFACTS.mkdir(exist_ok=True)
    (ARTIFACTS / "fef_negativity_concurrence_violations.json").write_text(
        json.dumps({"states": 10_000, "tolerance": eps, "violations": violations}, indent=2) + "\n"
    )
    ok = chain_fail == 0 and link_worst <= 1e-9
    return ok, (f"10^4 states: {chain_fail} chain failures, monotone links max {link_worst:.1e} (tol 1e-9); "
                f"FEF<=N<=C violations recorded: {len(violations)}")


# --------------------------------------------------------------------- 8


def _within_bars(value, entry):
    minus, plus = entry.bars()
    th = entry.theory_value
    return th - 2 * minus - 1e-12 <= value <= th + 2 * plus + 1e-12


def criterion_8():
    t0 = time.perf_counter()
    report = run_werner_pipeline(events_per_setting=1e5, seed=0, mc_samples=1000)
    elapsed = time.perf_counter() - t0
    misses = []
    for pt in report.payload["points"]:
        for m in fixtures.TABLE1_MEASURES:
            entry = fixtures.table_entry(m, pt["p"])
            value = pt["measures"][m]["value"]
            if not _within_bars(value, entry):
                misses.append(f"{m}@{pt['p']}={value:.4f}")
    agreement = report.payload["parametrization_agreement"]
    ok = not misses and agreement <= 1e-4 and elapsed < 300
    return ok, (f"{24 - len(misses)}/24 Table 1 entries within 2x published bars {misses or ''}; "
                f"MLE agreement {agreement:.1e} (tol 1e-4); {elapsed:.1f}s (< 300s)")


# --------------------------------------------------------------------- 9


def _mean_bar(report, p, measures):
    pt = next(x for x in report.payload["points"] if x["p"] == p)
    return float(np.mean([pt["measures"][m]["plus"] + pt["measures"][m]["minus"] for m in measures]))


def criterion_9():
    # one-sided bars need resampling spread comparable to the distance below the
    # threshold; 1e4 events per setting gives the published scale at p = 0.7
    base = run_werner_pipeline(events_per_setting=1e4, seed=0, mc_samples=400)
    b07 = next(x for x in base.payload["points"] if x["p"] == 0.7)["measures"]["bell_B"]
    one_sided = b07["value"] == 0.0 and b07["minus"] == 0.0 and b07["plus"] > 0.0
    structural = all(
        pt["measures"][m]["minus"] == 0.0
        for pt in base.payload["points"]
        for m in fixtures.TABLE1_MEASURES + fixtures.TABLE2_MEASURES
        if pt["measures"][m]["value"] == 0.0
    )
    events = [1e4, 1e5, 1e6]
    measures = ("fef", "steering_S", "bell_B", "steering_S3")
    bars = [base if n == 1e4 else run_werner_pipeline(p_values=(0.9,), events_per_setting=n, seed=0,
                                                      mc_samples=400) for n in events]
    sizes = [_mean_bar(r, 0.9, measures) for r in bars]
    slope = float(np.polyfit(np.log(events), np.log(sizes), 1)[0])
    ok = one_sided and structural and abs(slope + 0.5) <= 0.1
    return ok, (f"B(p=0.7) = {b07['value']:.3f} [+{b07['plus']:.3f}, -{b07['minus']:.3f}]; zero values have "
                f"minus = 0: {structural}; bar log-log slope {slope:+.3f} (target -0.5 +- 0.1)")


# -------------------------------------------------------------------- 10


_COMMANDS = [
    ["measures", "--family", "gws", "--p", "0.8", "--q", "0.3"],
    ["measures", "--R", str(ROOT / "fixtures" / "bell_R.json"), "--format", "csv"],
    ["sweep", "--family", "gws", "--grid", "0:1:0.1,0:1:0.25"],
    ["report-tables"],
    ["pipeline", "--p", "0.3,0.7,1.0", "--events", "1e4", "--mc-samples", "100", "--seed", "3"],
]


def _run_cli(argv, hashseed):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    env.pop("QCORR_SEED", None)
    res = subprocess.run([sys.executable, "-m", "qcorr.cli", *argv], capture_output=True, env=env, check=True)
    return res.stdout


def criterion_10():
    identical = 0
    total = 0
    for argv in _COMMANDS:
        a = _run_cli(argv, 1)
        b = _run_cli(argv, 2)
        total += 1
        identical += a == b and len(a) > 0
        if argv[0] == "sweep":
            sweep_csv = a
    with tempfile.TemporaryDirectory() as tmp:
        plot_in = Path(tmp) / "sweep.csv"
        plot_in.write_bytes(sweep_csv)
        for kind in ("curves", "heatmap", "scatter"):
            argv = ["plot", str(plot_in), "--kind", kind]
            total += 1
            identical += _run_cli(argv, 1) == _run_cli(argv, 2)
    return identical == total, f"{identical}/{total} seeded commands byte-identical across processes"


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 11)}


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, detail = CRITERIA[n]()
    assert _report(n, ok, detail), detail


if __name__ == "__main__":
    results = [_report(n, *CRITERIA[n]()) for n in sorted(CRITERIA)]
    sys.exit(0 if all(results) else 1)
