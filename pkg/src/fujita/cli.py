"""Batch front door: exponents / kernel / solve / scan / certify / report.

Exit codes: 0 success, 1 partial or runtime failure, 2 configuration error.
The env var FUJITA_THREADS caps scan row parallelism (default: cpu count).
All CSV output uses '.' decimals, a header row, and %.12g float formatting,
so reruns with the same config and seed are byte-identical except for the
wallclock column.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import certifier, fieldio
from .config import ConfigError, ExperimentConfig, build_control, build_params, parse_config
from .exponents import exponents, fujita_exponent
from .grid import make_grid
from .kernels import kernel_profile
from .solver import (
    BlowUp, GlobalCandidate, Inconclusive, PurePower, TwoRegime, ZeroForcing, run,
)

SCAN_COLUMNS = [
    "p", "sigma", "d", "alpha", "N", "p_c", "p_F_sigma", "ell",
    "classification", "t_est_or_horizon", "final_sup", "final_weak_pc_norm",
    "wallclock_s",
]


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return "%.12g" % x


def _classification_label(cls) -> str:
    if isinstance(cls, BlowUp):
        return "BlowUp"
    if isinstance(cls, GlobalCandidate):
        return "GlobalCandidate"
    if isinstance(cls, Inconclusive):
        return "Inconclusive:" + cls.reason.replace(",", ";")
    return str(cls)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_exponents(args) -> int:
    es = exponents(args.N, args.d, args.alpha, args.sigma, args.m, args.p)
    fields = [
        ("p_c", es.p_c), ("p_F_sigma", es.p_F_sigma), ("p_F_m", es.p_F_m),
        ("ell", es.ell),
        ("r_lo", 1.0 / es.r_window[1] if es.r_window else float("nan")),
        ("r_hi", 1.0 / es.r_window[0] if es.r_window else float("nan")),
        ("r", es.r if es.r is not None else float("nan")),
        ("mu", es.mu if es.mu is not None else float("nan")),
    ]
    for key, val in fields:
        print(f"{key} = {_fmt(val)}")
    print(",".join(k for k, _ in fields))
    print(",".join(_fmt(v) for _, v in fields))
    return 0


def cmd_kernel(args) -> int:
    try:
        dim, half, n = args.grid.split(",")
        grid = make_grid(int(dim), float(half), int(n))
    except ValueError as exc:
        print(f"bad --grid {args.grid!r}: {exc}", file=sys.stderr)
        return 2
    prof = kernel_profile(grid, args.d)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out)
    writer.writerow([f"x_{i + 1}" for i in range(grid.dim)] + ["value"])
    coords = np.meshgrid(*[grid.axis_coords()] * grid.dim, indexing="ij")
    flat = [c.ravel() for c in coords] + [prof.profile.values.ravel()]
    for row in zip(*flat):
        writer.writerow([_fmt(v) for v in row])
    if args.out:
        out.close()
    return 0


def cmd_solve(args) -> int:
    cfg = parse_config(args.config)
    params = build_params(cfg)
    control = build_control(cfg)
    snapshots: list[tuple[float, object]] = []
    observer = (lambda t, u: snapshots.append((t, u))) if args.traj else None
    report = run(params, cfg.run.horizon, control, observer=observer)
    if args.csv:
        names = sorted(report.norm_traces)
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time"] + names)
            for i, t in enumerate(report.times):
                writer.writerow([_fmt(t)] + [_fmt(report.norm_traces[k][i]) for k in names])
    if args.traj:
        if args.frames and len(snapshots) > args.frames:
            idx = np.unique(np.linspace(0, len(snapshots) - 1, args.frames).astype(int))
            snapshots = [snapshots[i] for i in idx]
        fieldio.write_trajectory(
            args.traj, [t for t, _ in snapshots], [u for _, u in snapshots],
            d=params.d, p=params.p, alpha=params.alpha,
        )
    print(f"classification = {_classification_label(report.classification)}")
    if isinstance(report.classification, BlowUp):
        print(f"t_est = {_fmt(report.classification.t_est)}")
    for name in sorted(report.norm_traces):
        print(f"final_{name} = {_fmt(report.norm_traces[name][-1])}")
    for key in sorted(report.diagnostics):
        print(f"{key} = {_fmt(report.diagnostics[key])}")
    return 0


def _scan_row(cfg: ExperimentConfig, p: float, sigma: float) -> list[str]:
    m = cfg.model
    start = time.perf_counter()
    try:
        mm = max(sigma, 0.0)
        es = exponents(m.N, m.d, m.alpha, sigma, mm, p)
        params = build_params(cfg, p=p, sigma=sigma if sigma <= 0 else None)
        if isinstance(params.forcing, ZeroForcing):
            pass
        elif sigma > 0:
            # growing-forcing regime: integrable t^sigma start, t^m tail
            params = replace(
                params, forcing=TwoRegime(m.forcing.sigma, sigma, m.forcing.crossover)
            )
        else:
            params = replace(params, forcing=PurePower(sigma))
        report = run(params, cfg.run.horizon, build_control(cfg))
        label = _classification_label(report.classification)
        t_col = (
            report.classification.t_est
            if isinstance(report.classification, BlowUp)
            else cfg.run.horizon
        )
        final_sup = report.norm_traces["sup"][-1]
        final_weak = report.norm_traces.get("weak_pc", [float("nan")])[-1]
    except Exception as exc:  # recorded, scan continues
        label = f"Inconclusive:{type(exc).__name__}"
        t_col = cfg.run.horizon
        final_sup = final_weak = float("nan")
        try:
            es = exponents(m.N, m.d, m.alpha, sigma, max(sigma, 0.0), p)
        except Exception:
            es = None
    wall = time.perf_counter() - start
    return [
        _fmt(p), _fmt(sigma), _fmt(m.d), _fmt(m.alpha), str(m.N),
        _fmt(es.p_c) if es else "nan",
        _fmt(es.p_F_sigma) if es else "nan",
        _fmt(es.ell) if es else "nan",
        label, _fmt(t_col), _fmt(final_sup), _fmt(final_weak), "%.3f" % wall,
    ]


def scan(cfg: ExperimentConfig, out_path, jobs: int | None = None) -> int:
    pairs = sorted((s, p) for s in cfg.scan.sigma_values for p in cfg.scan.p_values)
    limit = os.environ.get("FUJITA_THREADS")
    workers = jobs if jobs else (os.cpu_count() or 1)
    if limit:
        workers = min(workers, max(1, int(limit)))
    workers = max(1, min(workers, max(1, len(pairs))))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda sp: _scan_row(cfg, sp[1], sp[0]), pairs))
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCAN_COLUMNS)
        writer.writerows(rows)
    return 0


def cmd_scan(args) -> int:
    cfg = parse_config(args.config)
    os.makedirs(cfg.output, exist_ok=True)
    out_path = args.out or os.path.join(cfg.output, "scan.csv")
    return scan(cfg, out_path, jobs=args.jobs)


def cmd_certify(args) -> int:
    cfg = parse_config(args.config)
    times, fields, meta = fieldio.read_trajectory(args.traj)
    params = build_params(cfg)
    gp = params.grid
    gf = fields[0].grid
    if (gp.dim, gp.half_width, gp.points_per_axis) != (gf.dim, gf.half_width, gf.points_per_axis):
        print("trajectory grid does not match config grid", file=sys.stderr)
        return 1
    if (meta.d, meta.p, meta.alpha) != (params.d, params.p, params.alpha):
        print("trajectory model parameters do not match config", file=sys.stderr)
        return 1
    rep = certifier.certificate(
        (times, fields), params, args.T, allow_fractional=args.allow_fractional
    )
    header = ["T", "lhs_nonlinear", "forcing_term", "I1", "I2", "theta", "verdict"]
    values = [rep.T, rep.lhs_nonlinear, rep.forcing_term, rep.I1, rep.I2, rep.theta,
              rep.verdict]
    print(",".join(header))
    print(",".join(_fmt(v) for v in values))
    print(
        f"verdict {rep.verdict}: lhs {_fmt(rep.lhs_nonlinear + rep.forcing_term)} vs "
        f"rhs {_fmt(rep.I1 + rep.I2)} at T={_fmt(rep.T)} (theta={_fmt(rep.theta)})"
    )
    return 0


_CLASS_CODE = {"BlowUp": 1, "GlobalCandidate": 0}


def report_csv(csv_path, plot_path) -> tuple[str, int]:
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration as exc:
            raise ValueError("empty file, expected a header row") from exc
        if header != SCAN_COLUMNS:
            raise ValueError(f"unexpected header {header}")
        rows = list(reader)
    for row in rows:
        if len(row) != len(SCAN_COLUMNS):
            raise ValueError(f"short row {row}")
    if not rows:
        return "no rows\n", 0
    by_sigma: dict[float, list] = {}
    for row in rows:
        by_sigma.setdefault(float(row[1]), []).append(row)
    lines = ["sigma  p_F(sigma)  blowup<=p  global>=p  boundary"]
    plot_rows = []
    for sigma in sorted(by_sigma):
        group = sorted(by_sigma[sigma], key=lambda r: float(r[0]))
        N, d, alpha = int(group[0][4]), float(group[0][2]), float(group[0][3])
        p_f = fujita_exponent(N, d, alpha, sigma)
        blow = [float(r[0]) for r in group if r[8] == "BlowUp"]
        glob = [float(r[0]) for r in group if r[8] == "GlobalCandidate"]
        lo = _fmt(max(blow)) if blow else "-"
        hi = _fmt(min(glob)) if glob else "-"
        if blow and glob:
            bracket = f"[{_fmt(max(blow))}, {_fmt(min(glob))}]"
        elif blow:
            bracket = "all BlowUp"
        elif glob:
            bracket = "all GlobalCandidate"
        else:
            bracket = "inconclusive"
        lines.append(f"{_fmt(sigma)}  {_fmt(p_f)}  {lo}  {hi}  {bracket}")
        for r in group:
            code = _CLASS_CODE.get(r[8], -1)
            plot_rows.append([r[0], r[1], str(code)])
    with open(plot_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p", "sigma", "classification_code"])
        writer.writerows(plot_rows)
    return "\n".join(lines) + "\n", 0


def cmd_report(args) -> int:
    plot_path = args.plot_out or (os.path.splitext(args.csv)[0] + "_plot.csv")
    try:
        text, code = report_csv(args.csv, plot_path)
    except (OSError, ValueError) as exc:
        print(f"malformed scan CSV: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(text)
    return code


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fujita", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_exp = sub.add_parser("exponents", help="print the exponent set")
    p_exp.add_argument("--N", type=int, required=True)
    p_exp.add_argument("--d", type=float, required=True)
    p_exp.add_argument("--alpha", type=float, default=0.0)
    p_exp.add_argument("--sigma", type=float, default=0.0)
    p_exp.add_argument("--m", type=float, default=0.0)
    p_exp.add_argument("--p", type=float, required=True)
    p_exp.set_defaults(func=cmd_exponents)

    p_ker = sub.add_parser("kernel", help="dump the unit-time kernel profile as CSV")
    p_ker.add_argument("--d", type=float, required=True)
    p_ker.add_argument("--grid", required=True, help="dim,half_width,points e.g. 1,40,1024")
    p_ker.add_argument("--out", default=None)
    p_ker.set_defaults(func=cmd_kernel)

    p_sol = sub.add_parser("solve", help="run one model from a config file")
    p_sol.add_argument("--config", required=True)
    p_sol.add_argument("--csv", default=None, help="norm-trace CSV output path")
    p_sol.add_argument("--traj", default=None, help="binary trajectory output path")
    p_sol.add_argument("--frames", type=int, default=0,
                       help="cap on trajectory frames (0 = every step)")
    p_sol.set_defaults(func=cmd_solve)

    p_scan = sub.add_parser("scan", help="dichotomy parameter scan -> CSV")
    p_scan.add_argument("--config", required=True)
    p_scan.add_argument("--jobs", type=int, default=None)
    p_scan.add_argument("--out", default=None, help="CSV path (default output/scan.csv)")
    p_scan.set_defaults(func=cmd_scan)

    p_cert = sub.add_parser("certify", help="evaluate the blow-up certificate")
    p_cert.add_argument("--traj", required=True)
    p_cert.add_argument("--T", type=float, required=True)
    p_cert.add_argument("--config", required=True)
    p_cert.add_argument("--allow-fractional", action="store_true")
    p_cert.set_defaults(func=cmd_certify)

    p_rep = sub.add_parser("report", help="dichotomy summary from a scan CSV")
    p_rep.add_argument("--csv", required=True)
    p_rep.add_argument("--plot-out", default=None)
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, fieldio.FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
