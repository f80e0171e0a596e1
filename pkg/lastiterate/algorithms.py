"""
Learning dynamics: GABP, APGA, OG and AOG.

Each solver has an immutable state and a step function returning the next
state. GABP and APGA share the anchoring state machine (re-anchor every
T_sigma steps); their learning rate comes from a Schedule. `run` drives a
solver for T iterations against a feedback model and emits RunRecords.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Iterator, NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import ConfigError, ConsistencyError, InputError
from .feedback import FeedbackSample, FeedbackStreams, NoiseModel, NoNoise, observe
from .games import GameSpec, StrategyProfile
from .geometry import check_profile, gap
from .records import RunRecord

logger = logging.getLogger(__name__)

ROUNDING_GUARD = 1e-9


class SolverKind(str, Enum):
    GABP = "gabp"
    APGA = "apga"
    OG = "og"
    AOG = "aog"

    @property
    def anchored(self) -> bool:
        return self in (SolverKind.GABP, SolverKind.APGA)


# --- anchoring epochs and T_sigma -------------------------------------------


def compute_k(t: int, T_sigma: int) -> int:
    """Number of anchor updates in effect at iteration t: floor((t-1)/T_sigma)+1."""
    if t < 1 or T_sigma < 1:
        raise InputError(f"need t >= 1 and T_sigma >= 1, got t={t}, T_sigma={T_sigma}")
    return (t - 1) // T_sigma + 1


def _ceil(value: float) -> int:
    # values that are integers up to floating error must not round up
    nearest = round(value)
    if abs(value - nearest) <= ROUNDING_GUARD * max(1.0, abs(value)):
        return int(nearest)
    return int(math.ceil(value))


def tsigma_full(T: int, eta: float, mu: float, c: float = 1.0) -> int:
    """c * max(1, 6 ln(3(T+1)) / ln(1 + eta mu)), rounded up."""
    if eta * mu <= 0:
        raise InputError(f"eta * mu must be positive, got {eta * mu}")
    if c < 1:
        raise InputError(f"c must be >= 1, got {c}")
    ratio = 6.0 * math.log(3.0 * (T + 1)) / math.log1p(eta * mu)
    return max(1, _ceil(c * max(1.0, ratio)))


def tsigma_noisy(T: int, c: float = 1.0) -> int:
    """c * max(T^(6/7), 1), rounded up."""
    if T < 1:
        raise InputError(f"T must be >= 1, got {T}")
    if c < 1:
        raise InputError(f"c must be >= 1, got {c}")
    return max(1, _ceil(c * max(T ** (6.0 / 7.0), 1.0)))


# --- learning-rate schedules ------------------------------------------------


@dataclass(frozen=True)
class ConstantSchedule:
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigError(f"learning rate must be positive, got {self.eta}")

    def eta_at(self, t: int, T_sigma: Optional[int] = None) -> float:
        return self.eta

    def theory_limit(self, mu: float, L: float) -> float:
        """Upper end of the constant-rate range mu / (L + mu)^2."""
        return mu / (L + mu) ** 2

    def within_theory(self, mu: float, L: float) -> bool:
        return self.eta < self.theory_limit(mu, L)


@dataclass(frozen=True)
class NoisyTheorySchedule:
    """eta_t = 1 / (kappa (t - T_sigma (k(t) - 1)) + 2 theta)."""

    mu: float
    L: float

    def __post_init__(self):
        if self.mu is None or not self.mu > 0:
            raise ConfigError("noisy_theory schedule needs a positive mu")
        if not self.L > 0:
            raise ConfigError("noisy_theory schedule needs a positive L")

    @property
    def kappa(self) -> float:
        return self.mu / 2.0

    @property
    def theta(self) -> float:
        return (3.0 * self.mu**2 + 8.0 * self.L**2) / (2.0 * self.mu)

    def eta_at(self, t: int, T_sigma: Optional[int] = None) -> float:
        if T_sigma is None:
            raise ConfigError("noisy_theory schedule needs an anchoring interval")
        local = t - T_sigma * (compute_k(t, T_sigma) - 1)
        return 1.0 / (self.kappa * local + 2.0 * self.theta)


Schedule = Union[ConstantSchedule, NoisyTheorySchedule]


# --- solver states ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AnchorState:
    sigma_k: StrategyProfile
    sigma_1: StrategyProfile
    T_sigma: int
    k: int = 1
    tau: int = 0

    @classmethod
    def start(cls, initial: StrategyProfile, T_sigma: int) -> "AnchorState":
        if T_sigma < 1:
            raise ConfigError(f"T_sigma must be >= 1, got {T_sigma}")
        return cls(sigma_k=initial, sigma_1=initial, T_sigma=T_sigma)

    def advance(self, new_pi: StrategyProfile) -> "AnchorState":
        """tau += 1; every T_sigma steps move to the next anchor."""
        tau = self.tau + 1
        if tau == self.T_sigma:
            return replace(self, sigma_k=new_pi, k=self.k + 1, tau=0)
        return replace(self, tau=tau)

    def sigma_hat(self) -> StrategyProfile:
        """(k sigma^k + sigma^1) / (k + 1)."""
        k = self.k
        return self.sigma_k.map(lambda s, s1: (k * s + s1) / (k + 1), self.sigma_1)


@dataclass(frozen=True, eq=False)
class GABPState:
    pi: StrategyProfile
    anchor: AnchorState
    mu: float


@dataclass(frozen=True, eq=False)
class APGAState:
    pi: StrategyProfile
    anchor: AnchorState
    mu: float


@dataclass(frozen=True, eq=False)
class OGState:
    pi: StrategyProfile
    prev_grad: Optional[FeedbackSample] = None


@dataclass(frozen=True, eq=False)
class AOGState:
    pi: StrategyProfile
    pi_initial: StrategyProfile
    half_grad: Optional[FeedbackSample] = None
    t: int = 1


SolverState = Union[GABPState, APGAState, OGState, AOGState]


# --- update rules -----------------------------------------------------------


def gabp_step(
    game: GameSpec, state: GABPState, fb: FeedbackSample, eta_t: float
) -> GABPState:
    """Perturbed gradient step with the boosting term, then anchor bookkeeping."""
    anchor, mu = state.anchor, state.mu
    k = anchor.k
    new = []
    for s, x, g, sk, s1 in zip(
        game.sets,
        state.pi.players,
        fb.grads,
        anchor.sigma_k.players,
        anchor.sigma_1.players,
    ):
        direction = g - mu * (sk - s1) / (k + 1) - mu * (x - sk)
        new.append(s.project(x + eta_t * direction))
    pi = StrategyProfile(tuple(new))
    return GABPState(pi=pi, anchor=anchor.advance(pi), mu=mu)


def gabp_step_centered(
    game: GameSpec, state: GABPState, fb: FeedbackSample, eta_t: float
) -> GABPState:
    """Same update written as a pull towards sigma_hat = (k sigma^k + sigma^1)/(k+1)."""
    center = state.anchor.sigma_hat()
    mu = state.mu
    new = [
        s.project(x + eta_t * (g - mu * (x - c)))
        for s, x, g, c in zip(game.sets, state.pi.players, fb.grads, center.players)
    ]
    pi = StrategyProfile(tuple(new))
    return GABPState(pi=pi, anchor=state.anchor.advance(pi), mu=mu)


def apga_step(
    game: GameSpec, state: APGAState, fb: FeedbackSample, eta_t: float
) -> APGAState:
    anchor, mu = state.anchor, state.mu
    new = [
        s.project(x + eta_t * (g - mu * (x - sk)))
        for s, x, g, sk in zip(
            game.sets, state.pi.players, fb.grads, anchor.sigma_k.players
        )
    ]
    pi = StrategyProfile(tuple(new))
    return APGAState(pi=pi, anchor=anchor.advance(pi), mu=mu)


def og_step(game: GameSpec, state: OGState, fb: FeedbackSample, eta: float) -> OGState:
    """Single-call optimistic step pi + eta (2 g^t - g^{t-1}), with g^0 = 0."""
    prev = (
        state.prev_grad.grads
        if state.prev_grad is not None
        else tuple(np.zeros_like(g) for g in fb.grads)
    )
    new = [
        s.project(x + eta * (2.0 * g - gp))
        for s, x, g, gp in zip(game.sets, state.pi.players, fb.grads, prev)
    ]
    return OGState(pi=StrategyProfile(tuple(new)), prev_grad=fb)


def aog_project(
    game: GameSpec,
    pi: StrategyProfile,
    pi_initial: StrategyProfile,
    t: int,
    grads: Sequence[np.ndarray],
    eta: float,
) -> StrategyProfile:
    """argmax <eta g + (pi^1 - pi^t)/(t+1), x> - |x - pi^t|^2 / 2."""
    return StrategyProfile(
        tuple(
            s.project(x + eta * g + (x1 - x) / (t + 1))
            for s, x, x1, g in zip(game.sets, pi.players, pi_initial.players, grads)
        )
    )


def aog_project_centered(
    game: GameSpec,
    pi: StrategyProfile,
    pi_initial: StrategyProfile,
    t: int,
    grads: Sequence[np.ndarray],
    eta: float,
) -> StrategyProfile:
    """Same step with proximal centre (t pi^t + pi^1)/(t+1)."""
    return StrategyProfile(
        tuple(
            s.project((t * x + x1) / (t + 1) + eta * g)
            for s, x, x1, g in zip(game.sets, pi.players, pi_initial.players, grads)
        )
    )


def aog_step(
    game: GameSpec,
    state: AOGState,
    model: NoiseModel,
    streams: FeedbackStreams,
    eta: float,
) -> AOGState:
    """Half step with the previous half-point feedback, full step with the new one."""
    half_grad = state.half_grad
    if half_grad is None:
        # pi^{1/2} := pi^1
        half_grad = observe(game, state.pi, model, streams, state.t)
    half = aog_project(game, state.pi, state.pi_initial, state.t, half_grad.grads, eta)
    fb = observe(game, half, model, streams, state.t)
    pi = aog_project(game, state.pi, state.pi_initial, state.t, fb.grads, eta)
    return AOGState(pi=pi, pi_initial=state.pi_initial, half_grad=fb, t=state.t + 1)


def init_state(
    kind: SolverKind,
    initial: StrategyProfile,
    T_sigma: Optional[int] = None,
    mu: Optional[float] = None,
) -> SolverState:
    kind = SolverKind(kind)
    if kind is SolverKind.GABP:
        return GABPState(pi=initial, anchor=AnchorState.start(initial, T_sigma), mu=mu)
    if kind is SolverKind.APGA:
        return APGAState(pi=initial, anchor=AnchorState.start(initial, T_sigma), mu=mu)
    if kind is SolverKind.OG:
        return OGState(pi=initial)
    return AOGState(pi=initial, pi_initial=initial)


# --- run loop ---------------------------------------------------------------


class StepView(NamedTuple):
    """What a metric hook sees after iteration t."""

    t: int
    played: StrategyProfile
    profile: StrategyProfile
    state: Any
    anchor: Optional[AnchorState]
    eta_t: float
    k: Optional[int]
    gradient_calls: int


class MetricHook:
    """Observes every iteration; contributes fields to emitted records."""

    def on_step(self, view: StepView) -> None:
        pass

    def fields(self, view: StepView) -> Dict[str, Any]:
        return {}


class Run:
    """One seeded execution of a solver; iterate it to get the record stream."""

    def __init__(
        self,
        game: GameSpec,
        solver_kind: Union[SolverKind, str],
        schedule: Schedule,
        T: int,
        T_sigma: Optional[int] = None,
        mu: Optional[float] = None,
        noise: Optional[NoiseModel] = None,
        seed: int = 0,
        hooks: Sequence[MetricHook] = (),
        record_every: int = 1,
        run_index: int = 0,
        check_feasibility: bool = False,
        initial: Optional[StrategyProfile] = None,
    ):
        self.kind = SolverKind(solver_kind)
        self.game = game
        self.schedule = schedule
        self.T = T
        self.T_sigma = T_sigma
        self.mu = mu
        self.noise = noise if noise is not None else NoNoise()
        self.seed = seed
        self.hooks = list(hooks)
        self.record_every = record_every
        self.check_feasibility = check_feasibility
        self._validate()
        start = initial if initial is not None else game.initial
        check_profile(game.sets, start.players)
        self.initial = start
        self.streams = FeedbackStreams(
            seed, game.n_players, run_index, check=check_feasibility
        )
        self.state = init_state(self.kind, start, T_sigma, mu)

    def _validate(self) -> None:
        if self.T < 0:
            raise ConfigError(f"T must be >= 0, got {self.T}")
        if self.record_every < 1:
            raise ConfigError(f"record_every must be >= 1, got {self.record_every}")
        if self.kind.anchored:
            if self.mu is None or not self.mu > 0:
                raise ConfigError(f"{self.kind.value} needs a positive mu")
            if self.T_sigma is None or self.T_sigma < 1:
                raise ConfigError(f"{self.kind.value} needs T_sigma >= 1")
        elif self.mu is not None or self.T_sigma is not None:
            raise ConfigError(f"{self.kind.value} takes neither mu nor T_sigma")
        if isinstance(self.schedule, NoisyTheorySchedule):
            if not self.kind.anchored:
                raise ConfigError("noisy_theory schedule needs an anchored solver")
            if self.schedule.mu != self.mu:
                raise ConfigError(
                    f"schedule mu={self.schedule.mu} differs from solver mu={self.mu}"
                )

    @property
    def profile(self) -> StrategyProfile:
        return self.state.pi

    def _step(self, t: int, eta_t: float) -> None:
        game, state = self.game, self.state
        if self.kind is SolverKind.AOG:
            self.state = aog_step(game, state, self.noise, self.streams, eta_t)
            return
        fb = observe(game, state.pi, self.noise, self.streams, t)
        if self.kind is SolverKind.GABP:
            self.state = gabp_step(game, state, fb, eta_t)
        elif self.kind is SolverKind.APGA:
            self.state = apga_step(game, state, fb, eta_t)
        else:
            self.state = og_step(game, state, fb, eta_t)

    def __iter__(self) -> Iterator[RunRecord]:
        for t in range(1, self.T + 1):
            played = self.state.pi
            anchor = getattr(self.state, "anchor", None)
            k = compute_k(t, self.T_sigma) if self.kind.anchored else None
            if anchor is not None and anchor.k != k:
                raise ConsistencyError(f"anchor epoch {anchor.k} != k({t}) = {k}")
            eta_t = self.schedule.eta_at(t, self.T_sigma)
            self._step(t, eta_t)
            if self.check_feasibility:
                try:
                    check_profile(self.game.sets, self.state.pi.players)
                except InputError as e:
                    raise ConsistencyError(f"iterate {t + 1} is infeasible: {e}")
            view = StepView(
                t=t,
                played=played,
                profile=self.state.pi,
                state=self.state,
                anchor=anchor,
                eta_t=eta_t,
                k=k,
                gradient_calls=self.streams.calls,
            )
            for hook in self.hooks:
                hook.on_step(view)
            if t % self.record_every == 0 or t == self.T:
                yield self._record(view)

    def _record(self, view: StepView) -> RunRecord:
        values: Dict[str, Any] = {}
        for hook in self.hooks:
            values.update(hook.fields(view))
        return RunRecord(
            t=view.t,
            gradient_calls=view.gradient_calls,
            gap=gap(self.game, view.profile),
            eta_t=view.eta_t,
            k=view.k,
            **values,
        )


def run(game: GameSpec, solver_kind, schedule: Schedule, T: int, **kwargs) -> Run:
    """Configure a run; iterating the result executes it."""
    return Run(game, solver_kind, schedule, T, **kwargs)
