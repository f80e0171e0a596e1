#!/usr/bin/env python3
"""
Test suite for the command-line harness: runs, sweeps, presets, exit codes
"""

import csv
import json
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from lastiterate.config import expand_runs, parse_config
from lastiterate.errors import ConfigError
from lastiterate.harness import (
    RunOutcome,
    _exit_status,
    apply_cell,
    cmd_run,
    cmd_sweep,
    execute_run,
    grid_cells,
    main,
    summarize,
)
from lastiterate.records import read_records


def tiny_document(out_dir, **overrides):
    document = {
        "name": "tiny",
        "game": {"family": "random", "dim": 3},
        "T": 40,
        "seeds": [0],
        "metrics": ["gap", "tangent", "potential", "stationary_distance"],
        "out_dir": str(out_dir),
        "solvers": [
            {"kind": "og", "schedule": {"kind": "constant", "eta": 0.05}},
            {
                "kind": "gabp",
                "schedule": {"kind": "constant", "eta": 0.05},
                "T_sigma": 10,
                "mu": 1.0,
            },
        ],
    }
    document.update(overrides)
    return document


def outcome(solver, gap, status="ok"):
    return RunOutcome(
        stem=f"random_{solver}_full_0",
        game="random",
        solver=solver,
        feedback="full",
        seed=0,
        final_gap=gap,
        slope=None,
        wall_ms=1.0,
        status=status,
    )


class HarnessTestCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.out = self.dir / "out"

    def tearDown(self):
        self.tmp.cleanup()

    def write_config(self, document, name="config.json"):
        path = self.dir / name
        path.write_text(json.dumps(document, indent=2), encoding="utf-8")
        return str(path)


class TestRunCommand(HarnessTestCase):
    def test_writes_trajectories_and_summary(self):
        status = cmd_run(self.write_config(tiny_document(self.out)), workers=1)
        self.assertEqual(status, 0)
        self.assertTrue((self.out / "plot_summary.py").exists())

        gabp = read_records(self.out / "random_gabp_full_0.csv")
        self.assertEqual(len(gabp), 40)
        self.assertEqual(gabp[-1].k, 4)
        self.assertIsNotNone(gabp[-1].potential)
        self.assertIsNotNone(gabp[-1].dist_stationary)

        og = read_records(self.out / "random_og_full_0.csv")
        self.assertIsNone(og[-1].k)
        self.assertIsNone(og[-1].dist_stationary)
        self.assertIsNotNone(og[-1].tangent_residual)

        header = (self.out / "random_og_full_0.csv").read_text().splitlines()[:3]
        self.assertIn("# solver=og", header)

        with open(self.out / "summary.csv") as f:
            rows = list(csv.DictReader(f))
        self.assertEqual([r["solver"] for r in rows], ["og", "gabp"])
        self.assertTrue(all(r["status"] == "ok" for r in rows))

    def test_trajectories_are_reproducible(self):
        path = self.write_config(tiny_document(self.out))
        cmd_run(path, workers=1)
        first = (self.out / "random_gabp_full_0.csv").read_bytes()
        cmd_run(path, workers=1)
        self.assertEqual((self.out / "random_gabp_full_0.csv").read_bytes(), first)

    def test_bad_config_exits_with_config_status(self):
        document = tiny_document(self.out, T=-1)
        status = main(["run", "--config", self.write_config(document)])
        self.assertEqual(status, 1)
        self.assertFalse(self.out.exists())


class TestSummary(unittest.TestCase):
    def test_mean_and_standard_error(self):
        rows = summarize([outcome("og", 1.0), outcome("og", 3.0)])
        self.assertEqual(len(rows), 1)
        self.assertAlmostEqual(rows[0]["final_gap_mean"], 2.0)
        self.assertAlmostEqual(rows[0]["final_gap_se"], 1.0)
        self.assertEqual(rows[0]["n_seeds"], 2)

    def test_failed_runs_are_counted(self):
        members = [outcome("og", 1.0), outcome("og", None, status="failed")]
        rows = summarize(members)
        self.assertEqual(rows[0]["status"], "failed:1")
        self.assertEqual(rows[0]["final_gap_se"], 0.0)
        self.assertEqual(_exit_status(members), 2)
        self.assertEqual(_exit_status(members[:1]), 0)


class TestRunFailures(HarnessTestCase):
    def run_config(self):
        config = parse_config(json.dumps(tiny_document(self.out, T=5)))
        return expand_runs(config)[0]

    def test_unexpected_exception_marks_run_failed(self):
        with patch("lastiterate.harness.prepare_run", side_effect=RuntimeError("x")):
            with self.assertLogs("lastiterate.harness", level="ERROR"):
                outcome = execute_run(self.run_config(), str(self.dir))
        self.assertEqual(outcome.status, "failed")
        self.assertEqual(outcome.error, "RuntimeError: x")

    def test_unwritable_output_marks_run_failed(self):
        blocker = self.dir / "not_a_dir"
        blocker.write_text("")
        with self.assertLogs("lastiterate.harness", level="ERROR"):
            outcome = execute_run(self.run_config(), str(blocker))
        self.assertEqual(outcome.status, "failed")
        self.assertTrue(outcome.error.startswith("cannot write trajectory"))


class TestSweep(HarnessTestCase):
    def test_cell_overlay(self):
        config = parse_config(json.dumps(tiny_document(self.out)))
        cell = apply_cell(config, {"eta": 0.2, "mu": 0.5, "T_sigma": 7})
        og, gabp = cell.solvers
        self.assertEqual(og.schedule.eta, 0.2)
        self.assertIsNone(og.mu)
        self.assertEqual((gabp.schedule.eta, gabp.mu), (0.2, 0.5))
        self.assertEqual(gabp.T_sigma.value, 7)
        self.assertEqual(config.solvers[1].T_sigma.value, 10)

    def test_grid_size_cap(self):
        document = tiny_document(
            self.out, grid={"eta": [0.01, 0.02, 0.05], "mu": [0.1, 1.0]}, max_cells=4
        )
        with self.assertRaises(ConfigError):
            grid_cells(parse_config(json.dumps(document)))

    def test_grid_order(self):
        document = tiny_document(self.out, grid={"mu": [0.1, 1.0], "eta": [0.05]})
        cells = grid_cells(parse_config(json.dumps(document)))
        self.assertEqual(cells, [{"eta": 0.05, "mu": 0.1}, {"eta": 0.05, "mu": 1.0}])

    def test_missing_grid(self):
        with self.assertRaises(ConfigError):
            grid_cells(parse_config(json.dumps(tiny_document(self.out))))

    def test_sweep_summary(self):
        document = tiny_document(self.out, T=10, grid={"eta": [0.05, 0.1]})
        status = cmd_sweep(self.write_config(document), workers=1)
        self.assertEqual(status, 0)
        with open(self.out / "sweep_summary.csv") as f:
            rows = list(csv.DictReader(f))
        self.assertEqual([r["cell"] for r in rows], ["0", "0", "1", "1"])
        self.assertEqual(rows[2]["eta"], "0.10000000000000001")

    def test_one_trajectory_per_cell_solver_and_seed(self):
        document = tiny_document(
            self.out, T=10, seeds=[0, 1], grid={"eta": [0.01, 0.5]}
        )
        cmd_sweep(self.write_config(document), workers=1)
        files = sorted(p.relative_to(self.out) for p in self.out.rglob("*.csv"))
        trajectories = [p for p in files if p.name != "sweep_summary.csv"]
        self.assertEqual(len(trajectories), 2 * 2 * 2)
        first = read_records(self.out / "runs" / "cell_0" / "random_og_full_0.csv")
        second = read_records(self.out / "runs" / "cell_1" / "random_og_full_0.csv")
        self.assertEqual((first[0].eta_t, second[0].eta_t), (0.01, 0.5))


class TestCommands(HarnessTestCase):
    def test_preset_round_trips_through_config(self):
        out = self.dir / "presets" / "random_full.json"
        self.assertEqual(main(["preset", "random_full", "--out", str(out)]), 0)
        config = parse_config(out.read_text(encoding="utf-8"))
        self.assertEqual(config.name, "random_full")
        self.assertEqual(config.T, 100_000)

    def test_unknown_suite(self):
        self.assertEqual(main(["verify", "nonexistent"]), 1)


if __name__ == "__main__":
    unittest.main()
