#!/usr/bin/env python3
"""
Test suite for solver update rules, anchoring and schedules
"""

import unittest

import numpy as np

from lastiterate.algorithms import (
    AnchorState,
    APGAState,
    AOGState,
    ConstantSchedule,
    GABPState,
    NoisyTheorySchedule,
    OGState,
    Run,
    SolverKind,
    aog_project,
    aog_project_centered,
    aog_step,
    apga_step,
    compute_k,
    gabp_step,
    gabp_step_centered,
    og_step,
    tsigma_full,
    tsigma_noisy,
)
from lastiterate.errors import ConfigError, InputError
from lastiterate.feedback import FeedbackSample, FeedbackStreams, Gaussian, NoNoise
from lastiterate.games import (
    GameSpec,
    StrategyProfile,
    build_matrix_game,
    build_random_payoff,
)
from lastiterate.geometry import Box


def still_game():
    """One player on [-200, 200] with V = 0."""
    return GameSpec(
        name="still",
        sets=(Box(1, -200.0, 200.0),),
        gradient=lambda profile: [np.zeros(1)],
        lipschitz_L=1.0,
        diameter_D=400.0,
        grad_bound_zeta=0.0,
        initial=StrategyProfile.of([1.0]),
    )


def scalar(value):
    return StrategyProfile.of([value])


ZERO_FEEDBACK = FeedbackSample((np.zeros(1),), 1)


class TestEpochs(unittest.TestCase):
    """k(t) and the anchoring-interval formulas."""

    def test_compute_k(self):
        self.assertEqual(compute_k(1, 10), 1)
        self.assertEqual(compute_k(10, 10), 1)
        self.assertEqual(compute_k(11, 10), 2)
        with self.assertRaises(InputError):
            compute_k(0, 10)

    def test_tsigma_full(self):
        self.assertEqual(tsigma_full(100, 0.05, 1.0), 703)
        self.assertEqual(tsigma_full(100, 1e10, 1e10), 1)
        self.assertEqual(tsigma_full(100, 1e10, 1e10, c=3.0), 3)
        doubled = tsigma_full(100, 0.05, 1.0, c=2.0)
        self.assertLessEqual(abs(doubled - 2 * 703), 1)
        with self.assertRaises(InputError):
            tsigma_full(100, 0.0, 1.0)

    def test_tsigma_noisy(self):
        self.assertEqual(tsigma_noisy(128), 64)
        self.assertEqual(tsigma_noisy(1), 1)
        self.assertEqual(tsigma_noisy(100_000), 19307)

    def test_anchor_state_machine(self):
        anchor = AnchorState.start(scalar(0.0), T_sigma=3)
        for step in range(1, 7):
            anchor = anchor.advance(scalar(float(step)))
        # re-anchored after steps 3 and 6
        self.assertEqual(anchor.k, 3)
        self.assertEqual(anchor.tau, 0)
        np.testing.assert_array_equal(anchor.sigma_k.flat(), [6.0])
        np.testing.assert_array_equal(anchor.sigma_1.flat(), [0.0])

    def test_anchor_rejects_zero_interval(self):
        with self.assertRaises(ConfigError):
            AnchorState.start(scalar(0.0), T_sigma=0)


class TestSchedules(unittest.TestCase):
    def test_constant(self):
        schedule = ConstantSchedule(0.05)
        self.assertEqual(schedule.eta_at(7), 0.05)
        self.assertTrue(schedule.within_theory(1.0, 1.0))
        self.assertFalse(ConstantSchedule(0.5).within_theory(1.0, 1.0))
        with self.assertRaises(ConfigError):
            ConstantSchedule(0.0)

    def test_noisy_theory_restarts_each_epoch(self):
        schedule = NoisyTheorySchedule(mu=1.0, L=2.0)
        self.assertEqual(schedule.kappa, 0.5)
        self.assertEqual(schedule.theta, (3.0 + 32.0) / 2.0)
        first = 1.0 / (schedule.kappa + 2.0 * schedule.theta)
        for k in range(1, 5):
            self.assertEqual(schedule.eta_at(10 * (k - 1) + 1, 10), first)
        self.assertLess(schedule.eta_at(10, 10), first)


class TestUpdateRules(unittest.TestCase):
    """Single steps of GABP, APGA, OG and AOG."""

    def setUp(self):
        self.game = still_game()

    def test_gabp_first_epoch_pull(self):
        anchor = AnchorState.start(scalar(0.0), T_sigma=100)
        state = GABPState(pi=scalar(1.0), anchor=anchor, mu=1.0)
        out = gabp_step(self.game, state, ZERO_FEEDBACK, 0.1)
        self.assertAlmostEqual(out.pi.flat()[0], 0.9)
        self.assertEqual(out.anchor.tau, 1)

    def test_gabp_fixed_point_at_initial_anchor(self):
        anchor = AnchorState.start(scalar(1.0), T_sigma=100)
        state = GABPState(pi=scalar(1.0), anchor=anchor, mu=1.0)
        out = gabp_step(self.game, state, ZERO_FEEDBACK, 0.1)
        self.assertEqual(out.pi.flat()[0], 1.0)

    def test_gabp_centred_form(self):
        anchor = AnchorState(sigma_k=scalar(2.0), sigma_1=scalar(-1.0), T_sigma=50, k=3)
        state = GABPState(pi=scalar(0.5), anchor=anchor, mu=0.7)
        fb = FeedbackSample((np.array([0.3]),), 1)
        a = gabp_step(self.game, state, fb, 0.2).pi.flat()
        b = gabp_step_centered(self.game, state, fb, 0.2).pi.flat()
        self.assertAlmostEqual(a[0], b[0], places=12)
        np.testing.assert_allclose(anchor.sigma_hat().flat(), [(3 * 2.0 - 1.0) / 4])

    def test_apga_pull(self):
        anchor = AnchorState.start(scalar(0.5), T_sigma=100)
        state = APGAState(pi=scalar(1.0), anchor=anchor, mu=1.0)
        out = apga_step(self.game, state, ZERO_FEEDBACK, 0.1)
        self.assertAlmostEqual(out.pi.flat()[0], 0.95)

    def test_gabp_equals_apga_in_first_epoch(self):
        anchor = AnchorState.start(scalar(0.2), T_sigma=100)
        fb = FeedbackSample((np.array([1.5]),), 1)
        a = gabp_step(self.game, GABPState(scalar(1.0), anchor, 0.4), fb, 0.1)
        b = apga_step(self.game, APGAState(scalar(1.0), anchor, 0.4), fb, 0.1)
        np.testing.assert_array_equal(a.pi.flat(), b.pi.flat())

    def test_og_first_step_doubles_gradient(self):
        fb = FeedbackSample((np.array([1.0]),), 1)
        out = og_step(self.game, OGState(pi=scalar(0.0)), fb, 0.1)
        self.assertAlmostEqual(out.pi.flat()[0], 0.2)

    def test_og_constant_field_is_gradient_step(self):
        fb = FeedbackSample((np.array([1.0]),), 2)
        state = OGState(pi=scalar(0.0), prev_grad=fb)
        out = og_step(self.game, state, fb, 0.1)
        self.assertAlmostEqual(out.pi.flat()[0], 0.1)

    def test_og_matching_pennies(self):
        game = build_matrix_game(np.array([[1.0, -1.0], [-1.0, 1.0]]))
        pi = StrategyProfile.of([1.0, 0.0], [1.0, 0.0])
        fb = FeedbackSample(tuple(game.gradient(pi)), 1)
        out = og_step(game, OGState(pi=pi), fb, 0.1)
        np.testing.assert_allclose(out.pi.players[0], [1.0, 0.0])
        np.testing.assert_allclose(out.pi.players[1], [0.8, 0.2])

    def test_aog_anchor_pull(self):
        grads = (np.zeros(1),)
        out = aog_project(self.game, scalar(4.0), scalar(0.0), 3, grads, 0.1)
        self.assertAlmostEqual(out.flat()[0], 4.0 + (0.0 - 4.0) / 4)
        same = aog_project(self.game, scalar(1.0), scalar(1.0), 1, grads, 0.1)
        self.assertEqual(same.flat()[0], 1.0)

    def test_aog_forms_agree(self):
        rng = np.random.default_rng(0)
        game = build_random_payoff(5, 0)
        for _ in range(100):
            pi, first = game.sample_profile(rng), game.sample_profile(rng)
            grads = tuple(rng.normal(size=d) for d in game.dims)
            t = int(rng.integers(1, 1000))
            a = aog_project(game, pi, first, t, grads, 0.05).flat()
            b = aog_project_centered(game, pi, first, t, grads, 0.05).flat()
            np.testing.assert_allclose(a, b, atol=1e-12)

    def test_aog_observes_half_point_once_per_step(self):
        game = build_random_payoff(3, 0)
        streams = FeedbackStreams(0, 2)
        state = AOGState(pi=game.initial, pi_initial=game.initial)
        state = aog_step(game, state, NoNoise(), streams, 0.1)
        self.assertEqual(streams.calls, 2)
        state = aog_step(game, state, NoNoise(), streams, 0.1)
        self.assertEqual(streams.calls, 3)
        self.assertEqual(state.t, 3)


class TestRun(unittest.TestCase):
    """The run loop: records, validation, determinism."""

    def setUp(self):
        self.game = build_random_payoff(5, 0)
        self.schedule = ConstantSchedule(0.05)

    def gabp(self, T, **kwargs):
        options = dict(T_sigma=10, mu=1.0)
        options.update(kwargs)
        return Run(self.game, SolverKind.GABP, self.schedule, T, **options)

    def test_zero_iterations(self):
        runner = self.gabp(0)
        self.assertEqual(list(runner), [])
        self.assertIs(runner.profile, self.game.initial)

    def test_record_interval_keeps_last_iteration(self):
        records = list(self.gabp(25, record_every=10))
        self.assertEqual([r.t for r in records], [10, 20, 25])
        self.assertEqual([r.k for r in records], [1, 2, 3])
        self.assertEqual(records[-1].gradient_calls, 25)

    def test_same_seed_same_records(self):
        noise = Gaussian(0.1)
        a = [r.gap for r in self.gabp(50, noise=noise, seed=3)]
        b = [r.gap for r in self.gabp(50, noise=noise, seed=3)]
        c = [r.gap for r in self.gabp(50, noise=noise, seed=4)]
        self.assertEqual(a, b)
        self.assertNotEqual(a, c)

    def test_optimistic_records_have_no_epoch(self):
        runner = Run(self.game, SolverKind.OG, self.schedule, 5)
        self.assertTrue(all(r.k is None for r in runner))

    def test_aog_counts_every_observation(self):
        runner = Run(self.game, "aog", self.schedule, 5)
        self.assertEqual(list(runner)[-1].gradient_calls, 6)

    def test_configuration_errors(self):
        with self.assertRaises(ConfigError):
            Run(self.game, SolverKind.OG, self.schedule, 10, mu=1.0)
        with self.assertRaises(ConfigError):
            Run(self.game, SolverKind.GABP, self.schedule, 10, mu=1.0)
        with self.assertRaises(ConfigError):
            Run(self.game, SolverKind.APGA, self.schedule, 10, T_sigma=5, mu=0.0)
        noisy = NoisyTheorySchedule(mu=0.5, L=self.game.lipschitz_L)
        with self.assertRaises(ConfigError):
            Run(self.game, SolverKind.GABP, noisy, 10, T_sigma=5, mu=1.0)
        with self.assertRaises(ConfigError):
            Run(self.game, SolverKind.OG, noisy, 10)

    def test_feasibility_check_mode(self):
        records = list(self.gabp(20, check_feasibility=True))
        self.assertEqual(len(records), 20)
        self.assertTrue(self.gabp(5, check_feasibility=True).streams.check)
        self.assertFalse(self.gabp(5).streams.check)

    def test_gap_decreases_on_full_feedback(self):
        records = list(self.gabp(2000, record_every=100))
        self.assertLess(records[-1].gap, records[0].gap)


if __name__ == "__main__":
    unittest.main()
