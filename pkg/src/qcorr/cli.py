"""``qcorr`` command-line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import fixtures
from .collective import interpolate_R
from .inference import ConvergenceError, InsufficientSamplesError
from .measures import (
    MEASURE_NAMES,
    CorrMatrixR,
    classify_werner,
    measures_from_R,
    werner_oracle,
)
from .pipeline import DEFAULT_P_VALUES, run_werner_pipeline
from .plotting import KINDS, render
from .states import FAMILIES, bloch_decompose, density_from_dict, family_state

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
FLAG_TOLERANCE = 0.005
_R_ONLY = frozenset(MEASURE_NAMES) - {"concurrence", "negativity"}


class InputError(ValueError):
    pass


# ------------------------------------------------------------------ helpers


def fmt(x) -> str:
    """Six significant digits, '.' separator, empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        return "0"
    return f"{x:.6g}"


def parse_range(text: str) -> list[float]:
    """``start:stop:step`` inclusive of ``stop`` (up to rounding); a bare number is one point."""
    parts = text.split(":")
    try:
        nums = [float(x) for x in parts]
    except ValueError:
        raise InputError(f"bad range {text!r}; expected start:stop:step") from None
    if len(nums) == 1:
        return [nums[0]]
    if len(nums) != 3:
        raise InputError(f"bad range {text!r}; expected start:stop:step")
    start, stop, step = nums
    if not step > 0:
        raise InputError(f"range step must be positive in {text!r}")
    if stop < start:
        raise InputError(f"range {text!r} is empty")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(n)]


def parse_grid(text: str) -> tuple[list[float], list[float] | None]:
    pieces = text.split(",")
    if len(pieces) > 2:
        raise InputError("--grid takes at most two ranges: p0:p1:step[,q0:q1:step]")
    p_grid = parse_range(pieces[0])
    q_grid = parse_range(pieces[1]) if len(pieces) == 2 else None
    return p_grid, q_grid


def parse_measures(text: str | None, allowed=MEASURE_NAMES) -> list[str]:
    if text is None:
        return list(allowed)
    names = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in names if m not in allowed]
    if bad:
        raise InputError(f"unknown measure(s) {bad}; choose from {list(allowed)}")
    return names


def parse_p_list(text: str | None) -> list[float]:
    if text is None:
        return list(DEFAULT_P_VALUES)
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad p list {text!r}") from None


def default_seed() -> int:
    env = os.environ.get("QCORR_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise InputError(f"QCORR_SEED must be an integer, got {env!r}") from None


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def load_R(path: str) -> CorrMatrixR:
    data = _load_json(path)
    if isinstance(data, dict):
        data = data.get("R")
    m = np.asarray(data, dtype=float) if data is not None else None
    if m is None or m.shape != (3, 3):
        raise InputError(f"{path}: expected a 3x3 matrix (bare or under key 'R')")
    return CorrMatrixR(m)


def write_output(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc.strerror}") from None


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(r[h]) for h in header])
    return buf.getvalue()


def _state_measures(rho, wanted):
    """MeasureSet, skipping the state-only measures when they are not wanted."""
    from .measures import measure_set

    if set(wanted) <= _R_ONLY:
        T = bloch_decompose(rho).T
        return measures_from_R(CorrMatrixR(T.T @ T))
    return measure_set(rho)


# ----------------------------------------------------------------- commands


def cmd_measures(args) -> int:
    wanted = parse_measures(args.measures)
    sources = [x is not None for x in (args.family, args.R, args.rho)]
    if sum(sources) != 1:
        raise InputError("give exactly one of --family, --R or --rho")
    info = {}
    if args.R is not None:
        R = load_R(args.R)
        ms = measures_from_R(R)
        info["input"] = {"R": args.R}
    else:
        if args.rho is not None:
            rho = density_from_dict(_load_json(args.rho))
            info["input"] = {"rho": args.rho}
        else:
            if args.p is None:
                raise InputError("--family needs --p")
            rho = family_state(args.family, float(args.p), None if args.q is None else float(args.q))
            info["input"] = {"family": args.family, "p": float(args.p), "q": args.q if args.q is None else float(args.q)}
        T = bloch_decompose(rho).T
        R = CorrMatrixR(T.T @ T)
        ms = _state_measures(rho, wanted)
    values = ms.to_dict()
    result = {
        **info,
        "measures": {m: values[m] for m in wanted},
        "hierarchy_H": ms.hierarchy_H,
        "R": R.to_list(),
        "R_min_eigenvalue": float(R.eigenvalues[0]),
        "R_max_eigenvalue": float(R.eigenvalues[-1]),
    }
    if args.family == "werner":
        result["werner_region"] = classify_werner(float(args.p))
    if args.format == "csv":
        write_output(rows_to_csv(wanted, [result["measures"]]), args.out)
    else:
        write_output(json.dumps(result, indent=2, allow_nan=False) + "\n", args.out)
    return EXIT_OK


def sweep_rows(family: str, p_grid, q_grid, wanted):
    if family not in FAMILIES:
        raise InputError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    if family != "werner" and q_grid is None:
        raise InputError(f"family {family!r} needs a q range in --grid (or --q)")
    rows = []
    for p in p_grid:
        for q in (q_grid if q_grid is not None else [None]):
            rho = family_state(family, p, q)
            d = _state_measures(rho, wanted).to_dict()
            row = {"p": p} if q is None else {"p": p, "q": q}
            row.update({m: d[m] for m in wanted})
            rows.append(row)
    return rows


def cmd_sweep(args) -> int:
    if args.grid is None:
        raise InputError("sweep needs --grid p0:p1:step[,q0:q1:step]")
    family = args.family or "werner"
    p_grid, q_grid = parse_grid(args.grid)
    if q_grid is None and args.q is not None:
        q_grid = [float(args.q)]
    if family == "werner":
        q_grid = None
    wanted = parse_measures(args.measures)
    header = (["p"] if q_grid is None else ["p", "q"]) + wanted
    # no measures requested: the grid is still validated, but there is nothing to tabulate
    rows = sweep_rows(family, p_grid, q_grid, wanted) if wanted else []
    if args.format == "json":
        text = json.dumps({"family": family, "columns": header, "rows": [[r[h] for h in header] for r in rows]},
                          allow_nan=False) + "\n"
    else:
        text = rows_to_csv(header, rows)
    write_output(text, args.out)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    family = args.family or "werner"
    if family != "werner":
        raise InputError("the simulated pipeline supports the werner family only")
    events = float(args.events)
    if not events > 0:
        raise InputError("--events must be positive")
    if args.mc_samples < 1:
        raise InputError("--mc-samples must be positive")
    seed = args.seed if args.seed is not None else default_seed()
    report = run_werner_pipeline(parse_p_list(args.p), events, seed, args.mc_samples)
    if args.out is None or args.out == "-":
        write_output(report.to_csv() if args.format == "csv" else report.to_json(), None)
    else:
        out = Path(args.out)
        write_output(report.to_json(), str(out.with_suffix(".json")))
        write_output(report.to_csv(), str(out.with_suffix(".csv")))
    return EXIT_OK


def report_tables() -> list[dict]:
    rows = []
    for table, entries in fixtures.TABLES.items():
        for e in entries:
            theory = getattr(werner_oracle(e.p), e.measure)
            exp = getattr(measures_from_R(interpolate_R(fixtures.R_BELL, fixtures.R_NOISE, e.p)), e.measure)
            d_th = theory - e.theory_value
            d_ex = exp - e.experiment_value
            rows.append({
                "table": table, "p": e.p, "measure": e.measure,
                "theory_printed": e.theory_value, "theory": theory, "theory_delta": d_th,
                "theory_flag": abs(d_th) > FLAG_TOLERANCE or round(theory, 3) != e.theory_value,
                "experiment_printed": e.experiment_value, "experiment": exp, "experiment_delta": d_ex,
                "experiment_flag": abs(d_ex) > FLAG_TOLERANCE,
            })
    return rows


_TABLE_COLUMNS = ("table", "p", "measure", "theory_printed", "theory", "theory_delta", "theory_flag",
                  "experiment_printed", "experiment", "experiment_delta", "experiment_flag")


def cmd_report_tables(args) -> int:
    rows = report_tables()
    if args.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    elif args.format == "csv":
        text = rows_to_csv(_TABLE_COLUMNS, [{**r, "table": r["table"]} for r in rows])
    else:
        lines = [f"{'table':<7}{'p':>4}  {'measure':<12}{'theory':>9}{'calc':>9}{'':>3}"
                 f"{'exp':>9}{'calc':>9}{'delta':>9}{'':>3}"]
        for r in rows:
            lines.append(
                f"{r['table']:<7}{r['p']:>4.1f}  {r['measure']:<12}"
                f"{r['theory_printed']:>9.3f}{r['theory']:>9.4f}{'!!' if r['theory_flag'] else 'ok':>3}"
                f"{r['experiment_printed']:>9.3f}{r['experiment']:>9.4f}{r['experiment_delta']:>+9.4f}"
                f"{'!!' if r['experiment_flag'] else 'ok':>3}"
            )
        flagged = sum(r["theory_flag"] or r["experiment_flag"] for r in rows)
        lines.append(f"{len(rows)} entries, {flagged} flagged at |delta| > {FLAG_TOLERANCE}")
        text = "\n".join(lines) + "\n"
    write_output(text, args.out)
    return EXIT_OK


def cmd_plot(args) -> int:
    try:
        text = Path(args.csv).read_text()
    except FileNotFoundError:
        raise InputError(f"no such file: {args.csv}") from None
    write_output(render(text, args.kind), args.out)
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcorr", description="Two-qubit correlation measures from R.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("json", "csv"), default="json"):
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--format", choices=formats, default=default)

    m = sub.add_parser("measures", help="all measures of one state or correlation matrix")
    m.add_argument("--family", choices=sorted(FAMILIES))
    m.add_argument("--p")
    m.add_argument("--q")
    m.add_argument("--R", help="JSON file holding a 3x3 correlation matrix")
    m.add_argument("--rho", help="JSON file holding a density matrix as {re, im}")
    m.add_argument("--measures", help="comma-separated subset of measures")
    common(m)
    m.set_defaults(func=cmd_measures)

    s = sub.add_parser("sweep", help="measures over a (p, q) grid")
    s.add_argument("--family", choices=sorted(FAMILIES), default="werner")
    s.add_argument("--grid", help="p0:p1:step[,q0:q1:step]")
    s.add_argument("--q", help="fixed q when the grid has no q range")
    s.add_argument("--measures", help="comma-separated subset of measures ('' for none)")
    common(s, default="csv")
    s.set_defaults(func=cmd_sweep)

    pl = sub.add_parser("pipeline", help="simulate, reconstruct and interpolate Werner states")
    pl.add_argument("--family", default="werner")
    pl.add_argument("--p", help="comma-separated p values")
    pl.add_argument("--events", default="1e5", help="mean detected events per setting")
    pl.add_argument("--seed", type=int)
    pl.add_argument("--mc-samples", type=int, default=1000)
    common(pl)
    pl.set_defaults(func=cmd_pipeline)

    rt = sub.add_parser("report-tables", help="recompute the published Werner tables")
    common(rt, formats=("text", "csv", "json"), default="text")
    rt.set_defaults(func=cmd_report_tables)

    pt = sub.add_parser("plot", help="render a sweep or pipeline CSV as SVG")
    pt.add_argument("csv")
    pt.add_argument("--kind", choices=KINDS, default="curves")
    pt.add_argument("--out")
    pt.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConvergenceError, InsufficientSamplesError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"qcorr: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, TypeError) as exc:
        print(f"qcorr: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
