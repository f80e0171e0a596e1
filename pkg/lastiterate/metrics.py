"""
Convergence and regret measurements.

Includes the stationary-point oracle for the perturbed game (pi^{mu,k}), the
anchor potential P^k, external and dynamic regret accounting, log-log slope
fitting, and the closed-form bounds the verification suites compare against.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .algorithms import AnchorState, MetricHook, StepView
from .errors import InputError, MetricError, OracleError, UnsupportedMetricError
from .games import (
    GameSpec,
    StrategyProfile,
    best_response_value,
    deviation_payoffs,
)
from .geometry import Simplex, check_profile, tangent_residual
from .records import RunRecord

logger = logging.getLogger(__name__)

ORACLE_TOL = 1e-10
ORACLE_MAX_ITER = 10_000_000
MIN_SLOPE_POINTS = 20


# --- stationary point of the perturbed game ---------------------------------


@dataclass(frozen=True, eq=False)
class OracleResult:
    profile: StrategyProfile
    residual: float
    iterations: int


def default_oracle_tol(game: GameSpec) -> float:
    return ORACLE_TOL * (game.diameter_D if game.diameter_D > 0 else 1.0)


def solve_stationary(
    game: GameSpec,
    sigma_hat: StrategyProfile,
    mu: float,
    tol: Optional[float] = None,
    max_iter: int = ORACLE_MAX_ITER,
    start: Optional[StrategyProfile] = None,
) -> OracleResult:
    """Projected gradient iteration on V(pi) - mu (pi - sigma_hat)."""
    if not mu > 0:
        raise InputError(f"mu must be positive, got {mu}")
    check_profile(game.sets, sigma_hat.players)
    tol = default_oracle_tol(game) if tol is None else tol
    step = mu / (game.lipschitz_L + mu) ** 2
    pi = list((start if start is not None else sigma_hat).players)
    centers = sigma_hat.players
    moved = math.inf
    for n in range(1, max_iter + 1):
        grads = game.gradient(StrategyProfile(tuple(pi)))
        moved_sq = 0.0
        for i, (s, x, g, c) in enumerate(zip(game.sets, pi, grads, centers)):
            x_new = s.project(x + step * (g - mu * (x - c)))
            moved_sq += float(np.dot(x_new - x, x_new - x))
            pi[i] = x_new
        moved = math.sqrt(moved_sq)
        if moved < tol:
            return OracleResult(StrategyProfile(tuple(pi)), moved, n)
    raise OracleError("stationary-point oracle did not converge", moved, max_iter)


def stationary_point(
    game: GameSpec,
    sigma_hat: StrategyProfile,
    mu: float,
    tol: Optional[float] = None,
) -> StrategyProfile:
    """The unique equilibrium of the mu-perturbed game anchored at sigma_hat."""
    return solve_stationary(game, sigma_hat, mu, tol).profile


# --- potential --------------------------------------------------------------


def potential(
    k: int,
    pi_mu_prev: StrategyProfile,
    sigma_hat_prev: StrategyProfile,
    sigma_hat_cur: StrategyProfile,
) -> float:
    """
    P^k = k(k+1) (|p - s^{k-1}|^2 / 2 + <s^k - p, p - s^{k-1}>)

    with p = pi^{mu,k-1} and s the centred anchors.
    """
    if k < 2:
        raise InputError(f"potential is defined for k >= 2, got {k}")
    p = pi_mu_prev.flat()
    prev = sigma_hat_prev.flat()
    cur = sigma_hat_cur.flat()
    diff = p - prev
    return k * (k + 1) * (0.5 * float(diff @ diff) + float((cur - p) @ diff))


@dataclass(frozen=True, eq=False)
class PotentialSnapshot:
    k: int
    pi_mu_prev: StrategyProfile
    sigma_hat_prev: StrategyProfile
    sigma_hat_cur: StrategyProfile
    value: float


@dataclass(frozen=True, eq=False)
class EpochSnapshot:
    """Anchor of epoch k and the stationary point it induces."""

    k: int
    start_t: int
    sigma_k: StrategyProfile
    sigma_hat: StrategyProfile
    pi_mu: StrategyProfile
    residual: float

    def anchor_distance(self) -> float:
        return self.pi_mu.distance(self.sigma_k)


class StationaryMonitor(MetricHook):
    """Solves for pi^{mu,k} once per epoch; reports distance and potential."""

    def __init__(
        self,
        game: GameSpec,
        mu: float,
        tol: Optional[float] = None,
        track_distance: bool = True,
        track_potential: bool = True,
    ):
        self.game = game
        self.mu = mu
        self.tol = default_oracle_tol(game) if tol is None else tol
        self.track_distance = track_distance
        self.track_potential = track_potential
        self.epochs: List[EpochSnapshot] = []
        self.potentials: List[PotentialSnapshot] = []
        self.max_residual = 0.0

    def _open_epoch(self, anchor: AnchorState, start_t: int) -> None:
        sigma_hat = anchor.sigma_hat()
        warm = self.epochs[-1].pi_mu if self.epochs else None
        result = solve_stationary(self.game, sigma_hat, self.mu, self.tol, start=warm)
        self.max_residual = max(self.max_residual, result.residual)
        logger.debug(
            f"epoch {anchor.k}: oracle residual {result.residual:.2e} "
            f"after {result.iterations} iterations"
        )
        self.epochs.append(
            EpochSnapshot(
                k=anchor.k,
                start_t=start_t,
                sigma_k=anchor.sigma_k,
                sigma_hat=sigma_hat,
                pi_mu=result.profile,
                residual=result.residual,
            )
        )
        if anchor.k >= 2:
            prev, cur = self.epochs[-2], self.epochs[-1]
            value = potential(anchor.k, prev.pi_mu, prev.sigma_hat, cur.sigma_hat)
            self.potentials.append(
                PotentialSnapshot(
                    anchor.k, prev.pi_mu, prev.sigma_hat, cur.sigma_hat, value
                )
            )

    def on_step(self, view: StepView) -> None:
        if view.anchor is None:
            return
        if not self.epochs:
            self._open_epoch(view.anchor, view.t)
        after = view.state.anchor
        if after.k != self.epochs[-1].k:
            self._open_epoch(after, view.t + 1)

    def epoch(self, k: int) -> EpochSnapshot:
        return self.epochs[k - 1]

    def fields(self, view: StepView) -> Dict[str, Any]:
        if view.anchor is None or not self.epochs:
            return {}
        values: Dict[str, Any] = {}
        current = self.epoch(view.k)
        if self.track_distance:
            values["dist_stationary"] = current.pi_mu.distance(view.profile)
        if self.track_potential and view.k >= 2:
            values["potential"] = self.potentials[view.k - 2].value
        return values


class TangentHook(MetricHook):
    def __init__(self, game: GameSpec):
        self.game = game

    def fields(self, view: StepView) -> Dict[str, Any]:
        return {"tangent_residual": tangent_residual(self.game, view.profile)}


# --- regret -----------------------------------------------------------------


class RegretLedger:
    """
    Cumulative realized payoff, per-round best responses, fixed-strategy totals.

    Box players cannot enumerate their fixed strategies. For them the ledger
    accumulates the payoff of one reference strategy z_i against the actual
    play and values any fixed x through
    sum_t v_i(x, pi^t) = sum_t v_i(z_i, pi^t) + T (v_i(x, avg) - v_i(z_i, avg)),
    exact whenever v_i(x, .) - v_i(z, .) is affine in the opponents. The
    matrix, hard and Cournot families all satisfy this.
    """

    def __init__(self, game: GameSpec, track_external: bool = True):
        if game.payoff is None:
            raise UnsupportedMetricError(f"game '{game.name}' has no payoff evaluator")
        n = game.n_players
        self.game = game
        self.track_external = track_external
        self.t = 0
        self.realized = np.zeros(n)
        self.best = np.zeros(n)
        self.vertex_totals: List[Optional[np.ndarray]] = [
            np.zeros(s.dim) if isinstance(s, Simplex) else None for s in game.sets
        ]
        self.references: List[Optional[np.ndarray]] = [
            None if isinstance(s, Simplex) else game.initial.players[i]
            for i, s in enumerate(game.sets)
        ]
        self.reference_totals = np.zeros(n)
        self.profile_total = np.zeros(sum(game.dims))
        self.non_converged = 0
        self._warm: List[Optional[np.ndarray]] = [None] * n

    def _payoff_of(self, player: int, x: np.ndarray, profile: StrategyProfile):
        deviated = self.game.with_deviation(profile, player, x)
        return float(self.game.payoff(deviated)[player])

    def record(self, profile: StrategyProfile) -> "RegretLedger":
        game = self.game
        self.realized += game.payoff(profile)
        for i in range(game.n_players):
            br = best_response_value(game, i, profile, start=self._warm[i])
            self.best[i] += br.value
            self._warm[i] = br.argmax
            if not br.converged:
                self.non_converged += 1
            if not self.track_external:
                continue
            if self.vertex_totals[i] is not None:
                self.vertex_totals[i] += deviation_payoffs(game, i, profile)
            else:
                ref = self.references[i]
                self.reference_totals[i] += self._payoff_of(i, ref, profile)
        if self.track_external:
            self.profile_total += profile.flat()
        self.t += 1
        return self

    def dynamic(self) -> np.ndarray:
        return self.best - self.realized

    def external(self) -> np.ndarray:
        """max over fixed strategies of the cumulative payoff, minus realized."""
        if not self.track_external:
            raise MetricError("external regret was not tracked for this ledger")
        regrets = np.zeros(self.game.n_players)
        if self.t == 0:
            return regrets
        average = StrategyProfile.from_flat(self.profile_total / self.t, self.game.dims)
        for i, totals in enumerate(self.vertex_totals):
            if totals is not None:
                regrets[i] = float(np.max(totals)) - self.realized[i]
                continue
            br = best_response_value(self.game, i, average, start=self._warm[i])
            shift = br.value - self._payoff_of(i, self.references[i], average)
            fixed_total = self.reference_totals[i] + self.t * shift
            regrets[i] = fixed_total - self.realized[i]
        return regrets


def record_regret(
    ledger: RegretLedger, game: GameSpec, profile: StrategyProfile, t: int
) -> RegretLedger:
    if ledger.game is not game:
        raise InputError("ledger belongs to a different game")
    if t != ledger.t + 1:
        raise InputError(f"expected iteration {ledger.t + 1}, got {t}")
    return ledger.record(profile)


class RegretHook(MetricHook):
    def __init__(self, game: GameSpec, dynamic: bool = True, external: bool = False):
        self.ledger = RegretLedger(game, track_external=external)
        self.dynamic = dynamic
        self.external = external

    def on_step(self, view: StepView) -> None:
        record_regret(self.ledger, self.ledger.game, view.played, view.t)

    def fields(self, view: StepView) -> Dict[str, Any]:
        values: Dict[str, Any] = {}
        if self.dynamic:
            values["dyn_regret"] = self.ledger.dynamic().tolist()
        if self.external:
            values["ext_regret"] = self.ledger.external().tolist()
        return values


# --- trajectory fits --------------------------------------------------------


def slope_fit(
    records: Sequence[Union[RunRecord, Tuple[float, float]]],
    t_lo: float,
    t_hi: float,
) -> float:
    """Least-squares slope of log(gap) against log(t) over [t_lo, t_hi]."""
    points = []
    for r in records:
        t, g = (r.t, r.gap) if isinstance(r, RunRecord) else r
        if t_lo <= t <= t_hi and g is not None and g > 0:
            points.append((t, g))
    if len(points) < MIN_SLOPE_POINTS:
        raise MetricError(
            f"slope fit needs {MIN_SLOPE_POINTS} positive points in "
            f"[{t_lo}, {t_hi}], found {len(points)}"
        )
    arr = np.log(np.array(points, dtype=float))
    slope, _ = np.polyfit(arr[:, 0], arr[:, 1], 1)
    return float(slope)


# --- closed-form bounds -----------------------------------------------------


def full_feedback_gap_bound(
    t: int, T: int, eta: float, mu: float, L: float, D: float, c: float = 1.0
) -> float:
    """GAP and D * r_tan of the (t+1)-th iterate under the constant-rate schedule."""
    ratio = 6.0 * math.log(3.0 * (T + 1)) / math.log1p(eta * mu)
    return 17.0 * c * D**2 * (ratio + 1.0) / t * (mu + (1.0 + eta * L) / eta)


def inner_loop_bound(initial_sq: float, eta: float, mu: float, steps: int) -> float:
    """|pi^{mu,k} - pi^{t+1}|^2 <= (1 + eta mu)^-steps |pi^{mu,k} - sigma^k|^2."""
    return initial_sq * (1.0 + eta * mu) ** (-steps)


def anchor_distance_bound(D: float, k: int) -> float:
    return 8.0 * D / (k + 1)


def telescoping_slack(k: int, D: float, dist_next: float, dist_prev: float) -> float:
    """(k+1)^2 * 2D * (|pi^{mu,k} - sigma^{k+1}| + |pi^{mu,k-1} - sigma^k|)."""
    return (k + 1) ** 2 * 2.0 * D * (dist_next + dist_prev)


def gap_decomposition_bound(
    mu: float,
    D: float,
    L: float,
    zeta: float,
    K: int,
    anchor_dist: float,
    iterate_dist: float,
) -> float:
    return mu * D * (D / (K + 1) + anchor_dist) + (L * D + zeta) * iterate_dist
