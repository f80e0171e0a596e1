"""
Full and noisy gradient feedback.

Randomness discipline: every generator is a Philox (counter-based, 64-bit key)
stream keyed by ``SeedSequence(entropy=master_seed, spawn_key=(tag, ...))``.
Game construction uses ``(GAME_STREAM,)``; the noise of player i in run r uses
``(NOISE_STREAM, r, i)``. Metrics never draw from these streams, so enabling a
metric cannot perturb the noise sequence.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, Tuple

import numpy as np

from .errors import InputError
from .geometry import check_profile

if TYPE_CHECKING:  # pragma: no cover
    from .games import GameSpec, StrategyProfile

GAME_STREAM = 0
NOISE_STREAM = 1
SAMPLE_STREAM = 2


def make_rng(seed: int, *key: int) -> np.random.Generator:
    if seed < 0:
        raise InputError(f"seeds must be non-negative, got {seed}")
    seq = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(seq))


class NoiseModel:
    """Additive zero-mean noise on the gradient feedback."""

    def perturb(self, grad: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def variance_bound(self, total_dim: int) -> float:
        """C^2 in the bounded-variance assumption."""
        raise NotImplementedError


@dataclass(frozen=True)
class NoNoise(NoiseModel):
    def perturb(self, grad: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return grad

    def variance_bound(self, total_dim: int) -> float:
        return 0.0


@dataclass(frozen=True)
class Gaussian(NoiseModel):
    """i.i.d. N(0, sigma^2) per coordinate and per iteration."""

    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise InputError(f"noise sigma must be >= 0, got {self.sigma}")

    def perturb(self, grad: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.sigma == 0.0:
            return grad
        return grad + rng.normal(0.0, self.sigma, size=grad.shape)

    def variance_bound(self, total_dim: int) -> float:
        return self.sigma**2 * total_dim


@dataclass(frozen=True, eq=False)
class FeedbackSample:
    grads: Tuple[np.ndarray, ...]
    t: int


class FeedbackStreams:
    """Per-player noise generators owned by a single run.

    With `check` set, every queried profile must be feasible.
    """

    def __init__(
        self, seed: int, n_players: int, run_index: int = 0, check: bool = False
    ):
        self.seed = seed
        self.run_index = run_index
        self.check = check
        self.rngs = [
            make_rng(seed, NOISE_STREAM, run_index, i) for i in range(n_players)
        ]
        self.calls = 0


def observe(
    game: "GameSpec",
    profile: "StrategyProfile",
    model: NoiseModel,
    streams: FeedbackStreams,
    t: int = 0,
) -> FeedbackSample:
    """V(pi) plus a fresh noise draw for every player."""
    if len(streams.rngs) != game.n_players:
        raise InputError("feedback streams do not match the number of players")
    if streams.check:
        check_profile(game.sets, profile.players)
    grads = game.gradient(profile)
    noisy = tuple(
        model.perturb(np.asarray(g, dtype=float), rng)
        for g, rng in zip(grads, streams.rngs)
    )
    streams.calls += 1
    return FeedbackSample(noisy, t)
