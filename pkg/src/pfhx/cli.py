"""Command-line interface: run, sweep, freqresp, and check subcommands.

All numeric CSV output uses scientific notation with 17 significant
digits (lossless for doubles), comma separation, '.' decimals, and LF
line endings, so identical configurations produce byte-identical files.
Exit codes: 0 success, 2 configuration error, 3 numerical failure
(non-finite values), 4 output I/O failure.
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import (
    condition_report,
    measure_frequency_response,
    render_condition,
    transfer_function,
)
from .config import Config, parse_config
from .errors import ConfigError
from .grid import Grid
from .loop import RunResult, Scenario, run_scenario
from .params import sano_window

_FLAG_MAP = {
    "h1": "params.h1",
    "h2": "params.h2",
    "l": "params.l",
    "tau": "params.tau",
    "k1": "params.k1",
    "k2": "params.k2",
    "T": "run.T",
    "n_cells": "grid.n_cells",
    "controller": "run.controller",
    "sano_k": "run.sano_k",
    "seed": "run.seed",
    "solver": "run.solver",
    "cfl": "run.cfl",
    "snapshot_stride": "run.snapshot_stride",
    "out": "output.dir",
    "workers": "sweep.workers",
    "omega": "freqresp.omega",
    "cycles": "freqresp.cycles",
}


def _fmt(value: float) -> str:
    return format(float(value), ".16e")


def _bool(value: bool) -> str:
    return "true" if value else "false"


def _write_lines(path: Path, lines: list[str]) -> None:
    with open(path, "w", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def _write_norms(path: Path, result: RunResult) -> None:
    traj = result.trajectory
    lines = ["t,plant_l2,obs_err_l2,pred_err1_at_l,pred_err2_at_l,u1,u2,theta1_at_l,theta2_at_l"]
    for j in range(len(traj.t)):
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    traj.t[j],
                    traj.plant_l2[j],
                    traj.obs_err_l2[j],
                    traj.pred_err_at_l[j, 0],
                    traj.pred_err_at_l[j, 1],
                    traj.u[j, 0],
                    traj.u[j, 1],
                    traj.exit_values[j, 0],
                    traj.exit_values[j, 1],
                )
            )
        )
    _write_lines(path, lines)


def _write_snapshots(path: Path, result: RunResult, grid: Grid) -> None:
    traj = result.trajectory
    lines = ["t,x,theta1,theta2"]
    nodes = grid.nodes
    for idx in range(len(traj.snapshot_t)):
        t = traj.snapshot_t[idx]
        snap = traj.snapshots[idx]
        for i in range(len(nodes)):
            lines.append(
                ",".join(_fmt(v) for v in (t, nodes[i], snap[i, 0], snap[i, 1]))
            )
    _write_lines(path, lines)


def _decay_text(label: str, decay) -> str:
    return (
        f"{label}: gamma_hat={decay.gamma_hat:.6g}, r_squared={decay.r_squared:.6g}, "
        f"window=[{decay.window[0]:g}, {decay.window[1]:g}], "
        f"floor_hit={_bool(decay.floor_hit)}, extinct={_bool(decay.extinct)}, "
        f"samples={decay.n_used}"
    )


def _write_summary(path: Path, result: RunResult, warnings: list[str]) -> None:
    s = result.summary
    lines = [
        "run summary",
        f"controller: {s.controller}",
        f"T: requested {s.T_requested:g}, used {s.T_used:g}",
        f"tau: requested {s.tau_requested:g}, used {s.tau_used:g}"
        + (" (snapped)" if s.tau_snapped else ""),
        render_condition(s.condition),
        _decay_text("plant decay", s.plant_decay),
    ]
    if s.obs_err_decay is not None:
        lines.append(_decay_text("observer-error decay", s.obs_err_decay))
    if warnings:
        lines.append("warnings:")
        lines.extend(f"  - {w}" for w in warnings)
    lines.append(f"finite: {_bool(s.finite)}")
    lines.append(f"wall time: {s.wall_time_s:.3f} s")
    _write_lines(path, lines)


def _emit_warnings(warnings: list[str]) -> None:
    for message in warnings:
        print(f"warning: {message}", file=sys.stderr)


def cmd_run(cfg: Config) -> int:
    scenario = cfg.to_scenario()
    result = run_scenario(scenario)
    outdir = Path(cfg.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    grid = Grid(cfg.n_cells, cfg.l)
    # tau/T snapping is reported both at parse and run time; show it once
    warnings = list(dict.fromkeys(cfg.warnings + result.summary.warnings))
    _write_norms(outdir / "norms.csv", result)
    _write_snapshots(outdir / "snapshots.csv", result, grid)
    _write_summary(outdir / "summary.txt", result, warnings)
    _emit_warnings(warnings)
    if not result.summary.finite:
        print("numerical failure: trajectory contains non-finite values", file=sys.stderr)
        return 3
    return 0


def _sweep_worker(payload: tuple[int, Scenario]) -> tuple[int, dict]:
    index, scenario = payload
    result = run_scenario(scenario)
    s = result.summary
    p = scenario.params
    sano = (
        sano_window(p, scenario.sano_k)
        if scenario.controller == "sano_static" and scenario.sano_k is not None
        else None
    )
    return index, {
        "h1": p.h1,
        "h2": p.h2,
        "l": p.l,
        "tau": p.tau,
        "k1": p.k1,
        "k2": p.k2,
        "n_cells": scenario.n_cells,
        "T": scenario.T,
        "controller": scenario.controller,
        "sano_k": scenario.sano_k,
        "theorem_valid": s.condition.gains.theorem_valid,
        "sano_in_window": None if sano is None else sano.in_window,
        "gamma_hat": s.plant_decay.gamma_hat,
        "r_squared": s.plant_decay.r_squared,
        "floor_hit": s.plant_decay.floor_hit,
        "extinct": s.plant_decay.extinct,
        "finite": s.finite,
    }


def cmd_sweep(cfg: Config) -> int:
    if not cfg.sweep_axes:
        raise ConfigError("sweep requires at least one non-empty axis in [sweep]")
    axes = list(cfg.sweep_axes.items())  # declaration order
    names = [name for name, _ in axes]
    combos = list(itertools.product(*(values for _, values in axes)))
    payloads = []
    for index, combo in enumerate(combos):
        overrides = dict(zip(names, combo))
        payloads.append((index, cfg.to_scenario(**overrides)))

    workers = cfg.workers if cfg.workers > 0 else (os.cpu_count() or 1)
    workers = min(workers, len(payloads))
    if workers <= 1:
        results = [_sweep_worker(payload) for payload in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, payloads))
    results.sort(key=lambda item: item[0])

    header = (
        "index,h1,h2,l,tau,k1,k2,n_cells,T,controller,sano_k,theorem_valid,"
        "sano_in_window,gamma_hat,r_squared,floor_hit,extinct"
    )
    lines = [header]
    all_finite = True
    for index, row in results:
        all_finite &= row["finite"]
        lines.append(
            ",".join(
                [
                    str(index),
                    _fmt(row["h1"]),
                    _fmt(row["h2"]),
                    _fmt(row["l"]),
                    _fmt(row["tau"]),
                    _fmt(row["k1"]),
                    _fmt(row["k2"]),
                    str(row["n_cells"]),
                    _fmt(row["T"]),
                    row["controller"],
                    "" if row["sano_k"] is None else _fmt(row["sano_k"]),
                    _bool(row["theorem_valid"]),
                    "" if row["sano_in_window"] is None else _bool(row["sano_in_window"]),
                    _fmt(row["gamma_hat"]),
                    _fmt(row["r_squared"]),
                    _bool(row["floor_hit"]),
                    _bool(row["extinct"]),
                ]
            )
        )
    outdir = Path(cfg.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_lines(outdir / "sweep.csv", lines)
    _emit_warnings(cfg.warnings)
    if not all_finite:
        print("numerical failure: at least one sweep row is non-finite", file=sys.stderr)
        return 3
    return 0


def cmd_freqresp(cfg: Config) -> int:
    params = cfg.params()
    grid = Grid(cfg.n_cells, cfg.l)
    header = ["omega"]
    for i in (1, 2):
        for j in (1, 2):
            header += [
                f"g{i}{j}_formula_re",
                f"g{i}{j}_formula_im",
                f"g{i}{j}_measured_re",
                f"g{i}{j}_measured_im",
            ]
    header.append("rel_err")
    lines = [",".join(header)]
    start = time.perf_counter()
    for omega in cfg.freq_omegas:
        formula = transfer_function(1j * omega, params).matrix
        measured = measure_frequency_response(
            omega, params, grid, cycles=cfg.freq_cycles, cfl=cfg.freq_cfl
        )
        rel_err = float(np.linalg.norm(measured - formula) / np.linalg.norm(formula))
        row = [_fmt(omega)]
        for i in range(2):
            for j in range(2):
                row += [
                    _fmt(formula[i, j].real),
                    _fmt(formula[i, j].imag),
                    _fmt(measured[i, j].real),
                    _fmt(measured[i, j].imag),
                ]
        row.append(_fmt(rel_err))
        lines.append(",".join(row))
    outdir = Path(cfg.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_lines(outdir / "freqresp.csv", lines)
    _emit_warnings(cfg.warnings)
    print(f"freqresp: {len(cfg.freq_omegas)} frequencies in {time.perf_counter() - start:.3f} s")
    return 0


def cmd_check(cfg: Config) -> int:
    report = condition_report(cfg.params(), k_sano=cfg.sano_k)
    print(render_condition(report))
    _emit_warnings(cfg.warnings)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", required=True, help="path to INI config file")
    common.add_argument("-o", "--out", help="output directory (overrides output.dir)")
    for flag in ("h1", "h2", "l", "tau", "k1", "k2", "T", "cfl", "snapshot-stride", "sano-k"):
        common.add_argument(f"--{flag}", type=float, dest=flag.replace("-", "_"))
    common.add_argument("--n-cells", type=int, dest="n_cells")
    common.add_argument("--seed", type=int)
    common.add_argument("--controller")
    common.add_argument("--solver")

    parser = argparse.ArgumentParser(
        prog="pfhx",
        description="Delay-compensated boundary control of a parallel-flow heat exchanger",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="single simulation run")
    sweep = sub.add_parser("sweep", parents=[common], help="Cartesian parameter sweep")
    sweep.add_argument("--workers", type=int, help="worker processes (0 = all cores)")
    freq = sub.add_parser("freqresp", parents=[common], help="formula vs measured frequency response")
    freq.add_argument("--omega", help="comma-separated frequencies")
    freq.add_argument("--cycles", type=int)
    sub.add_parser("check", parents=[common], help="condition report only, no simulation")
    return parser


def _collect_overrides(args: argparse.Namespace) -> dict[str, object]:
    overrides: dict[str, object] = {}
    for attr, dotted in _FLAG_MAP.items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[dotted] = value
    return overrides


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        cfg = parse_config(text, overrides=_collect_overrides(args))
        handler = {
            "run": cmd_run,
            "sweep": cmd_sweep,
            "freqresp": cmd_freqresp,
            "check": cmd_check,
        }[args.command]
        return handler(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4


def entry() -> None:
    sys.exit(main())
