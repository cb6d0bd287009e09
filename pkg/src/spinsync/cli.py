"""Command line for spin-pair synchronization and correlation runs.

Subcommands ``evolve``, ``sync-map``, ``spectrum``, ``correlations`` and
``reproduce FIG`` write CSV files plus ``manifest.json`` into ``--out``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (including
failed sweep cells), 4 positivity violation beyond ``positivity.hard_cap``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bath import QuadratureError
from .config import ConfigError, RunConfig, apply_overrides, config_from_dict, config_to_dict, load_config
from .recipes import RECIPES
from .redfield import DefectiveSpectrumError
from .runs import (PositivityLog, Table, correlations_table, discord_sync_table, entanglement_map_table,
                   evolve_table, long_time_table, spectrum_table, sync_map_table, sync_series_table)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_POSITIVITY = 0, 2, 3, 4


def format_value(v) -> str:
    """12 significant digits, locale-free; ``-0`` printed as ``0``."""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    x = float(v)
    if math.isnan(x):
        return "nan"
    if x == 0.0:
        return "0"
    return format(x, ".12g")


def write_csv(path: Path, table: Table) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.header)
        for row in table.rows:
            w.writerow([format_value(v) for v in row])


def sha256_of(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_routine(routine: str, cfg: RunConfig, log: PositivityLog, workers: int) -> Table:
    if routine == "evolve":
        return evolve_table(cfg, log)
    if routine == "sync-series":
        return sync_series_table(cfg, log)
    if routine == "sync-map":
        return sync_map_table(cfg, log, workers)
    if routine == "spectrum":
        return spectrum_table(cfg, log)
    if routine == "correlations":
        return correlations_table(cfg, log)
    if routine == "entanglement-map-t100":
        return entanglement_map_table(cfg, log, 100.0, workers)
    if routine == "long-time-t800":
        return long_time_table(cfg, log, 800.0, workers)
    if routine == "discord-sync-t300":
        return discord_sync_table(cfg, log, 300.0, workers)
    raise ValueError(f"unknown routine {routine!r}")


def _resolve(data: dict, overrides: list[str], source: str | None, origin: str) -> tuple[RunConfig, dict]:
    raw = apply_overrides(data, overrides)
    text = source if not overrides else None
    return config_from_dict(raw, text, origin), raw


def _plan(args) -> list[tuple[str, str, RunConfig]]:
    """(output stem, routine, config) for every run the command asks for."""
    overrides = args.override or []
    if args.command == "reproduce":
        if args.config:
            raise ConfigError("reproduce takes its parameters from the recipe; use --override to adjust")
        plan = []
        for run in RECIPES[args.figure]:
            cfg, _ = _resolve(run.patch, overrides, None, f"recipe {args.figure}")
            plan.append((run.stem, run.routine, cfg))
        return plan
    cfg, raw = load_config(args.config)
    if overrides:
        cfg, _ = _resolve(raw, overrides, None, args.config or "<defaults>")
    stem = {"evolve": "trajectory", "sync-map": "sync_map", "spectrum": "spectrum",
            "correlations": "correlations"}[args.command]
    return [(stem, args.command, cfg)]


def execute(args) -> int:
    t0 = time.perf_counter()
    plan = _plan(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log = PositivityLog(warn_tol=min(c.positivity.warn_tol for _, _, c in plan))
    files, cells, configs = [], [], []
    for stem, routine, cfg in plan:
        cfg.resolved_engine()
        table = run_routine(routine, cfg, log, args.workers)
        path = out / f"{stem}.csv"
        write_csv(path, table)
        files.append({"path": path.name, "sha256": sha256_of(path), "rows": len(table.rows), "routine": routine})
        configs.append({"stem": stem, "routine": routine, "config": config_to_dict(cfg)})
        for c in table.cells:
            cells.append({"file": path.name, "delta": c.delta, "g": c.g, "status": "ok" if c.ok else "failed",
                          **({} if c.ok else {"error": c.error})})
    failed = [c for c in cells if c["status"] != "ok"]
    hard_cap = min(c.positivity.hard_cap for _, _, c in plan)
    code = EXIT_OK
    if failed:
        code = EXIT_NUMERICAL
    elif log.worst < -hard_cap:
        code = EXIT_POSITIVITY
    manifest = {
        "tool": "spinsync",
        "version": __version__,
        "command": args.command if args.command != "reproduce" else f"reproduce {args.figure}",
        "runs": configs,
        "files": files,
        "cells": {"total": len(cells), "failed": failed},
        "positivity": {**log.summary(), "hard_cap": hard_cap, "exceeded": log.worst < -hard_cap},
        "exit_code": code,
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if failed:
        print(f"{len(failed)} of {len(cells)} cells failed; see manifest.json", file=sys.stderr)
    elif code == EXIT_POSITIVITY:
        print(f"positivity violated: min eigenvalue {log.worst:.3e} ({log.where}) beyond cap {hard_cap:g}",
              file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration (defaults if omitted)")
    common.add_argument("--out", metavar="DIR", default="out", help="output directory (default: out)")
    common.add_argument("--workers", metavar="N", type=int, default=1, help="process pool size for sweeps")
    common.add_argument("--seed-free", action="store_true",
                        help="accepted for compatibility; runs are deterministic and use no random numbers")
    common.add_argument("--override", metavar="KEY=VALUE", action="append",
                        help="set a config entry by dotted key, e.g. model.g=-0.5 (repeatable)")
    p = argparse.ArgumentParser(prog="spinsync", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("evolve", parents=[common], help="trajectory of local observables")
    sub.add_parser("sync-map", parents=[common], help="synchronization time over a (delta, g) grid")
    sub.add_parser("spectrum", parents=[common], help="Redfield generator eigenvalues and mode weights")
    sub.add_parser("correlations", parents=[common], help="entanglement, discord and classical correlations")
    rp = sub.add_parser("reproduce", parents=[common], help="run a figure recipe")
    rp.add_argument("figure", choices=sorted(RECIPES))
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return execute(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, DefectiveSpectrumError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
