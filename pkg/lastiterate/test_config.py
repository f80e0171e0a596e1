#!/usr/bin/env python3
"""
Test suite for JSON experiment configuration and presets
"""

import json
import os
import tempfile
import unittest
from unittest.mock import patch

from lastiterate.algorithms import SolverKind
from lastiterate.config import (
    ExperimentConfig,
    default_workers,
    expand_runs,
    load_config,
    parse_config,
)
from lastiterate.errors import ConfigError
from lastiterate.presets import TUNED, preset, preset_document


def document(**overrides):
    base = {
        "name": "small",
        "game": {"family": "random", "dim": 4},
        "T": 50,
        "seeds": [0, 1],
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
    base.update(overrides)
    return base


def parse(data):
    return parse_config(json.dumps(data, indent=2))


class TestParsing(unittest.TestCase):
    def test_defaults(self):
        config = parse(document())
        self.assertEqual(config.feedback.kind, "full")
        self.assertEqual(config.metrics, ["gap", "tangent"])
        self.assertEqual(config.resolved_record_every, 1)
        self.assertEqual(config.solvers[1].T_sigma.value, 10)

    def test_record_every_default_scales_with_horizon(self):
        self.assertEqual(parse(document(T=100_000)).resolved_record_every, 100)

    def test_optimistic_solvers_reject_anchor_parameters(self):
        solvers = [
            {"kind": "og", "schedule": {"kind": "constant", "eta": 0.05}, "mu": 1.0}
        ]
        with self.assertRaises(ConfigError):
            parse(document(solvers=solvers))

    def test_anchored_solvers_need_tsigma(self):
        solvers = [
            {"kind": "apga", "schedule": {"kind": "constant", "eta": 0.05}, "mu": 1.0}
        ]
        with self.assertRaises(ConfigError) as ctx:
            parse(document(solvers=solvers))
        self.assertIn("solvers.0", str(ctx.exception))

    def test_unknown_keys_rejected(self):
        with self.assertRaises(ConfigError):
            parse(document(horizon=10))

    def test_cournot_needs_parameters(self):
        with self.assertRaises(ConfigError):
            parse(document(game={"family": "cournot", "n_firms": 2}))

    def test_malformed_json_reports_position(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config('{\n  "T": 10,\n}', "bad.json")
        self.assertTrue(str(ctx.exception).startswith("bad.json:3:1"))

    def test_error_line_follows_the_full_location(self):
        solvers = [
            {"kind": "og", "schedule": {"kind": "constant", "eta": 0.05}},
            {"kind": "og", "schedule": {"kind": "constant", "eta": -1.0}},
        ]
        text = json.dumps(document(solvers=solvers), indent=2)
        eta_lines = [
            number
            for number, line in enumerate(text.splitlines(), 1)
            if '"eta"' in line
        ]
        with self.assertRaises(ConfigError) as ctx:
            parse_config(text, "two.json")
        message = str(ctx.exception)
        self.assertTrue(message.startswith(f"two.json:{eta_lines[1]}: solvers.1"))

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_config("/nonexistent/config.json")

    def test_theory_tsigma(self):
        solver = {
            "kind": "gabp",
            "schedule": {"kind": "constant", "eta": 0.05},
            "T_sigma": {"kind": "theory_full"},
            "mu": 1.0,
        }
        config = parse(document(T=100, solvers=[solver]))
        game = config.game.build(0)
        resolved = config.solvers[0].resolve_tsigma(config.T, game)
        self.assertEqual(resolved, 703)

    def test_noisy_schedule_only_for_anchored_solvers(self):
        solvers = [{"kind": "og", "schedule": {"kind": "noisy_theory"}}]
        with self.assertRaises(ConfigError):
            parse(document(solvers=solvers))


class TestExpansion(unittest.TestCase):
    def test_one_run_per_solver_and_seed(self):
        runs = expand_runs(parse(document()))
        self.assertEqual(len(runs), 4)
        self.assertEqual(
            [r.stem for r in runs],
            [
                "random_og_full_0",
                "random_og_full_1",
                "random_gabp_full_0",
                "random_gabp_full_1",
            ],
        )
        self.assertTrue(all(r.run_index == 0 for r in runs))

    def test_random_game_seed(self):
        config = parse(document())
        self.assertFalse(
            (config.game.build(0).data["A"] == config.game.build(1).data["A"]).all()
        )
        pinned = parse(document(game={"family": "random", "dim": 4, "seed": 9}))
        a, b = pinned.game.build(0), pinned.game.build(1)
        self.assertTrue((a.data["A"] == b.data["A"]).all())

    def test_load_from_file(self):
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
            json.dump(document(), f)
        try:
            self.assertEqual(load_config(f.name).name, "small")
        finally:
            os.unlink(f.name)


class TestPresets(unittest.TestCase):
    def test_every_preset_validates(self):
        for name in TUNED:
            config = preset(name)
            self.assertIsInstance(config, ExperimentConfig)
            kinds = {s.kind for s in config.solvers}
            self.assertEqual(kinds, set(SolverKind))

    def test_noisy_preset(self):
        doc = preset_document("hard_noisy")
        self.assertEqual(doc["feedback"], {"kind": "gaussian", "sigma": 0.1})
        self.assertEqual(len(doc["seeds"]), 10)
        gabp = next(s for s in doc["solvers"] if s["kind"] == "gabp")
        self.assertEqual((gabp["schedule"]["eta"], gabp["mu"]), (0.1, 0.1))

    def test_unknown_preset(self):
        with self.assertRaises(ConfigError):
            preset_document("cournot_full")


class TestEnvironment(unittest.TestCase):
    @patch.dict(os.environ, {"LASTITERATE_WORKERS": "4"})
    def test_workers_from_environment(self):
        self.assertEqual(default_workers(), 4)

    @patch.dict(os.environ, {"LASTITERATE_WORKERS": "many"})
    def test_bad_workers_value(self):
        with self.assertRaises(ConfigError):
            default_workers()

    @patch.dict(os.environ, {}, clear=True)
    def test_default_single_worker(self):
        self.assertEqual(default_workers(), 1)


if __name__ == "__main__":
    unittest.main()
