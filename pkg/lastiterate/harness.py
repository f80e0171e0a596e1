#!/usr/bin/env python3
"""
Command-line harness for lastiterate experiments

Usage:
    python -m lastiterate run --config config.json [--workers N]
    python -m lastiterate sweep --config config-extended.json [--workers N]
    python -m lastiterate verify SUITE
    python -m lastiterate preset NAME --out PATH

Exit status: 0 success, 1 config error, 2 runtime/oracle failure,
3 verification failure.
"""

import argparse
import itertools
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from dotenv import load_dotenv

from .algorithms import Run, SolverKind
from .config import (
    ExperimentConfig,
    RunConfig,
    default_workers,
    expand_runs,
    load_config,
)
from .errors import (
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_VERIFY,
    ConfigError,
    LastIterateError,
    MetricError,
)
from .games import GameSpec
from .metrics import RegretHook, StationaryMonitor, TangentHook, slope_fit
from .presets import TUNED, preset_document
from .records import (
    AOG_CALLS,
    OG_VARIANT,
    SUMMARY_COLUMNS,
    RunRecord,
    write_records,
    write_table,
)

logger = logging.getLogger(__name__)


@dataclass
class RunOutcome:
    stem: str
    game: str
    solver: str
    feedback: str
    seed: int
    final_gap: Optional[float]
    slope: Optional[float]
    wall_ms: float
    status: str
    error: Optional[str] = None


def build_hooks(run_cfg: RunConfig, game: GameSpec) -> list:
    metrics = set(run_cfg.metrics)
    hooks = []
    if "tangent" in metrics:
        hooks.append(TangentHook(game))
    if metrics & {"dynamic_regret", "external_regret"}:
        hooks.append(
            RegretHook(
                game,
                dynamic="dynamic_regret" in metrics,
                external="external_regret" in metrics,
            )
        )
    wants_oracle = metrics & {"potential", "stationary_distance"}
    if run_cfg.solver.kind.anchored and wants_oracle:
        hooks.append(
            StationaryMonitor(
                game,
                run_cfg.solver.mu,
                track_distance="stationary_distance" in metrics,
                track_potential="potential" in metrics,
            )
        )
    return hooks


def prepare_run(run_cfg: RunConfig) -> Run:
    game = run_cfg.game.build(run_cfg.seed)
    solver = run_cfg.solver
    return Run(
        game,
        solver.kind,
        solver.build_schedule(game),
        run_cfg.T,
        T_sigma=solver.resolve_tsigma(run_cfg.T, game),
        mu=solver.mu,
        noise=run_cfg.feedback.noise(),
        seed=run_cfg.seed,
        hooks=build_hooks(run_cfg, game),
        record_every=run_cfg.record_every,
        run_index=run_cfg.run_index,
        check_feasibility=run_cfg.check_feasibility,
    )


def run_metadata(run_cfg: RunConfig, runner: Run) -> Dict[str, Any]:
    return {
        "experiment": run_cfg.experiment,
        "game": run_cfg.game.family,
        "solver": run_cfg.solver.kind.value,
        "feedback": run_cfg.feedback.label,
        "sigma": run_cfg.feedback.sigma if run_cfg.feedback.kind != "full" else 0.0,
        "seed": run_cfg.seed,
        "T": run_cfg.T,
        "T_sigma": runner.T_sigma if runner.T_sigma is not None else "",
        "mu": runner.mu if runner.mu is not None else "",
        "og_variant": OG_VARIANT,
        "aog_calls": AOG_CALLS,
    }


def slope_window(T: int) -> Tuple[int, int]:
    return max(1, T // 100), T


def execute_run(run_cfg: RunConfig, out_dir: str) -> RunOutcome:
    """Run one (solver, seed) unit and write its CSV; never raises."""
    started = time.perf_counter()
    outcome = RunOutcome(
        stem=run_cfg.stem,
        game=run_cfg.game.family,
        solver=run_cfg.solver.kind.value,
        feedback=run_cfg.feedback.label,
        seed=run_cfg.seed,
        final_gap=None,
        slope=None,
        wall_ms=0.0,
        status="ok",
    )
    try:
        runner = prepare_run(run_cfg)
        path = Path(out_dir) / f"{run_cfg.stem}.csv"
        records: List[RunRecord] = []
        with open(path, "w", encoding="utf-8", newline="") as f:
            metadata = run_metadata(run_cfg, runner)
            write_records(f, _collecting(runner, records), metadata)
        if records:
            outcome.final_gap = records[-1].gap
            try:
                outcome.slope = slope_fit(records, *slope_window(run_cfg.T))
            except MetricError:
                outcome.slope = None
        logger.info(f"✅ {run_cfg.stem}: {len(records)} records -> {path}")
    except LastIterateError as e:
        outcome.status = "failed"
        outcome.error = str(e)
        logger.error(f"run {run_cfg.stem} failed: {e}")
    except OSError as e:
        outcome.status = "failed"
        outcome.error = f"cannot write trajectory: {e}"
        logger.error(f"run {run_cfg.stem} failed: {outcome.error}")
    except Exception as e:
        outcome.status = "failed"
        outcome.error = f"{type(e).__name__}: {e}"
        logger.exception(f"run {run_cfg.stem} crashed")
    outcome.wall_ms = (time.perf_counter() - started) * 1000.0
    return outcome


def _collecting(records_iter, sink: List[RunRecord]):
    for record in records_iter:
        sink.append(record)
        yield record


def execute_all(
    runs: Sequence[RunConfig], out_dirs: Sequence[str], workers: int
) -> List[RunOutcome]:
    """Run every unit; `out_dirs[i]` receives the CSV of `runs[i]`."""
    for out_dir in set(out_dirs):
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    if workers <= 1 or len(runs) <= 1:
        return [execute_run(r, d) for r, d in zip(runs, out_dirs)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(execute_run, runs, out_dirs))


def summarize(outcomes: Sequence[RunOutcome]) -> List[Dict[str, Any]]:
    groups: Dict[Tuple[str, str, str], List[RunOutcome]] = {}
    for outcome in outcomes:
        key = (outcome.game, outcome.solver, outcome.feedback)
        groups.setdefault(key, []).append(outcome)
    rows = []
    for (game, solver, feedback), members in groups.items():
        good = [m for m in members if m.status == "ok" and m.final_gap is not None]
        gaps = np.array([m.final_gap for m in good])
        slopes = [m.slope for m in good if m.slope is not None]
        failed = len(members) - len(good)
        rows.append(
            {
                "game": game,
                "solver": solver,
                "feedback": feedback,
                "n_seeds": len(good),
                "final_gap_mean": float(gaps.mean()) if len(gaps) else None,
                "final_gap_se": (
                    float(gaps.std(ddof=1) / math.sqrt(len(gaps)))
                    if len(gaps) > 1
                    else (0.0 if len(gaps) else None)
                ),
                "slope_fit": float(np.median(slopes)) if slopes else None,
                "wall_ms": float(sum(m.wall_ms for m in members)),
                "status": "ok" if failed == 0 else f"failed:{failed}",
            }
        )
    return rows


PLOT_SCRIPT = '''#!/usr/bin/env python3
"""Plot GAP against iteration (log scale) for every solver in this directory."""

import csv
import glob
import os
from collections import defaultdict

import matplotlib.pyplot as plt
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))


def load(path):
    with open(path) as f:
        rows = list(csv.DictReader(line for line in f if not line.startswith("#")))
    return np.array([float(r["t"]) for r in rows]), np.array(
        [float(r["gap"]) for r in rows]
    )


curves = defaultdict(list)
for path in sorted(glob.glob(os.path.join(HERE, "*.csv"))):
    name = os.path.basename(path)
    if name == "summary.csv":
        continue
    game, solver, feedback, _ = name[:-4].split("_")
    curves[(game, solver, feedback)].append(load(path))

plt.figure(figsize=(6, 4))
for (game, solver, feedback), runs in sorted(curves.items()):
    t = runs[0][0]
    gaps = np.vstack([g for _, g in runs])
    mean = gaps.mean(axis=0)
    se = gaps.std(axis=0, ddof=1) / np.sqrt(len(runs)) if len(runs) > 1 else 0 * mean
    plt.plot(t, mean, label=solver.upper())
    plt.fill_between(t, np.maximum(mean - se, 1e-300), mean + se, alpha=0.2)
plt.xscale("log")
plt.yscale("log")
plt.xlabel("Iteration")
plt.ylabel("GAP")
plt.legend()
plt.grid(True)
plt.tight_layout()
plt.savefig(os.path.join(HERE, "gap.png"))
'''


def write_plot_script(out_dir: str) -> Path:
    path = Path(out_dir) / "plot_summary.py"
    path.write_text(PLOT_SCRIPT, encoding="utf-8")
    return path


def _exit_status(outcomes: Sequence[RunOutcome]) -> int:
    return EXIT_RUNTIME if any(o.status != "ok" for o in outcomes) else EXIT_OK


def cmd_run(config_path: str, workers: Optional[int] = None) -> int:
    config = load_config(config_path)
    workers = workers or default_workers()
    runs = expand_runs(config)
    logger.info(f"running {len(runs)} runs of '{config.name}' with {workers} workers")
    outcomes = execute_all(runs, [config.out_dir] * len(runs), workers)
    summary = Path(config.out_dir) / "summary.csv"
    write_table(summary, SUMMARY_COLUMNS, summarize(outcomes))
    write_plot_script(config.out_dir)
    logger.info(f"summary written to {Path(config.out_dir) / 'summary.csv'}")
    return _exit_status(outcomes)


GRID_AXES = ("eta", "mu", "T_sigma", "c")


def apply_cell(config: ExperimentConfig, cell: Dict[str, Any]) -> ExperimentConfig:
    """Overlay one grid cell onto every solver that has the parameter."""
    solvers = []
    for solver in config.solvers:
        data = solver.model_dump(mode="json")
        if "eta" in cell and data["schedule"]["kind"] == "constant":
            data["schedule"]["eta"] = cell["eta"]
        if SolverKind(data["kind"]).anchored:
            if "mu" in cell:
                data["mu"] = cell["mu"]
            tsig = data["T_sigma"]
            if "T_sigma" in cell and tsig["kind"] == "manual":
                tsig["value"] = cell["T_sigma"]
            if "c" in cell and tsig["kind"] != "manual":
                tsig["c"] = cell["c"]
        solvers.append(data)
    return config.model_copy(
        update={"solvers": [type(config.solvers[0]).model_validate(s) for s in solvers]}
    )


def grid_cells(config: ExperimentConfig) -> List[Dict[str, Any]]:
    if config.grid is None:
        raise ConfigError("sweep config needs a 'grid' section")
    axes = config.grid.axes()
    names = [name for name in GRID_AXES if name in axes]
    count = math.prod(len(axes[n]) for n in names) if names else 1
    if count > config.max_cells:
        raise ConfigError(
            f"grid has {count} cells, more than max_cells={config.max_cells}"
        )
    combos = itertools.product(*[axes[n] for n in names])
    return [dict(zip(names, values)) for values in combos]


def cmd_sweep(config_path: str, workers: Optional[int] = None) -> int:
    config = load_config(config_path)
    workers = workers or default_workers()
    cells = grid_cells(config)
    cell_runs = [expand_runs(apply_cell(config, cell)) for cell in cells]
    flat = [run for runs in cell_runs for run in runs]
    logger.info(f"sweeping {len(cells)} cells, {len(flat)} runs, {workers} workers")
    dirs = [
        _cell_dir(config.out_dir, index)
        for index, runs in enumerate(cell_runs)
        for _ in runs
    ]
    outcomes = execute_all(flat, dirs, workers)
    rows = []
    offset = 0
    for index, (cell, runs) in enumerate(zip(cells, cell_runs)):
        chunk = outcomes[offset : offset + len(runs)]
        offset += len(runs)
        for row in summarize(chunk):
            row.update({"cell": index})
            row.update({axis: cell.get(axis) for axis in GRID_AXES})
            rows.append(row)
    columns = ["cell", *GRID_AXES, *SUMMARY_COLUMNS]
    Path(config.out_dir).mkdir(parents=True, exist_ok=True)
    write_table(Path(config.out_dir) / "sweep_summary.csv", columns, rows)
    return _exit_status(outcomes)


def _cell_dir(out_dir: str, index: int) -> str:
    return str(Path(out_dir) / "runs" / f"cell_{index}")


def cmd_preset(name: str, out: str) -> int:
    document = preset_document(name)
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2)
        f.write("\n")
    logger.info(f"preset '{name}' written to {out}")
    return EXIT_OK


def cmd_verify(suite: str) -> int:
    from .verify import SUITE_NAMES, format_report, run_suite

    if suite not in SUITE_NAMES:
        choices = ", ".join(SUITE_NAMES)
        raise ConfigError(f"unknown suite '{suite}'; choose from {choices}")
    results = run_suite(suite)
    print(format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lastiterate", description="Last-iterate learning in monotone games"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--workers", type=int, default=None)
    p = sub.add_parser("verify")
    p.add_argument("suite")
    p = sub.add_parser("preset")
    p.add_argument("name", choices=sorted(TUNED))
    p.add_argument("--out", required=True)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    logging.basicConfig(
        level=os.getenv("LASTITERATE_LOG_LEVEL", "INFO").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config, args.workers)
        if args.command == "sweep":
            return cmd_sweep(args.config, args.workers)
        if args.command == "verify":
            return cmd_verify(args.suite)
        return cmd_preset(args.name, args.out)
    except LastIterateError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
