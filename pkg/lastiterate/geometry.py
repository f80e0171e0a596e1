"""
Feasible sets, Euclidean projections and equilibrium proximity measures.

Every solver step ends in `project`; `gap` and `tangent_residual` measure how
far a strategy profile is from a Nash equilibrium. The joint feasible set is
always a product of per-player sets, so everything here decomposes per player.
"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Sequence

import numpy as np

from .errors import ConsistencyError, InputError

if TYPE_CHECKING:  # pragma: no cover
    from .games import GameSpec, StrategyProfile

FEASIBILITY_TOL = 1e-9
ACTIVE_TOL = 1e-9
GAP_ROUNDING = 1e-12


class FeasibleSet:
    """Compact convex strategy space of a single player."""

    dim: int

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    @property
    def active_tol(self) -> float:
        return ACTIVE_TOL * self.diameter

    def project(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x: np.ndarray, tol: float = FEASIBILITY_TOL) -> bool:
        raise NotImplementedError

    def support(self, g: np.ndarray) -> float:
        """max over the set of <g, x>."""
        raise NotImplementedError

    def tangent_project(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Projection of v onto the tangent cone at x."""
        raise NotImplementedError

    def in_normal_cone(self, x: np.ndarray, n: np.ndarray, tol: float) -> bool:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """A random feasible point."""
        raise NotImplementedError

    def vertices(self) -> np.ndarray:
        raise NotImplementedError

    def check_vector(self, v: np.ndarray) -> np.ndarray:
        arr = np.asarray(v, dtype=float)
        if arr.shape != (self.dim,):
            raise InputError(f"expected length {self.dim}, got shape {arr.shape}")
        return arr


@dataclass(frozen=True)
class Simplex(FeasibleSet):
    """Probability simplex {x >= 0, sum(x) = 1} in R^dim."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise InputError(f"simplex dimension must be >= 1, got {self.dim}")

    @property
    def diameter(self) -> float:
        return math.sqrt(2.0) if self.dim >= 2 else 0.0

    @property
    def active_tol(self) -> float:
        return ACTIVE_TOL * math.sqrt(2.0)

    def project(self, v: np.ndarray) -> np.ndarray:
        v = self.check_vector(v)
        if v.sum() == 1.0 and np.all(v >= 0.0):
            return v.copy()
        # sort-based threshold: largest rho with u_rho > (sum_{j<=rho} u_j - 1)/rho
        u = np.sort(v)[::-1]
        cssv = np.cumsum(u) - 1.0
        ind = np.arange(1, self.dim + 1)
        rho = np.nonzero(u * ind > cssv)[0][-1]
        theta = cssv[rho] / (rho + 1.0)
        return np.maximum(v - theta, 0.0)

    def contains(self, x: np.ndarray, tol: float = FEASIBILITY_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            return False
        return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol * max(1, self.dim))

    def support(self, g: np.ndarray) -> float:
        return float(np.max(g))

    def tangent_project(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        # cone {d : sum(d) = 0, d_j >= 0 where x_j = 0}; active-set over the
        # zero coordinates, each pass re-centres the free block to mean zero
        x = self.check_vector(x)
        v = self.check_vector(v)
        zero = x <= self.active_tol
        clamped = np.zeros(self.dim, dtype=bool)
        for _ in range(self.dim + 1):
            free = ~clamped
            lam = v[free].mean()
            newly = zero & free & (v - lam < 0.0)
            if not newly.any():
                break
            clamped |= newly
        return np.where(clamped, 0.0, v - lam)

    def in_normal_cone(self, x: np.ndarray, n: np.ndarray, tol: float) -> bool:
        # normal cone {c*1 - s : s >= 0, s_j = 0 where x_j > 0}
        zero = np.asarray(x) <= self.active_tol
        if zero.all():
            return False
        c = n[~zero].mean()
        if np.any(np.abs(n[~zero] - c) > tol):
            return False
        return bool(np.all(n[zero] <= c + tol))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.dirichlet(np.ones(self.dim))

    def vertices(self) -> np.ndarray:
        return np.eye(self.dim)


@dataclass(frozen=True)
class Box(FeasibleSet):
    """Axis-aligned box [lo, hi]^dim."""

    dim: int
    lo: float
    hi: float

    def __post_init__(self):
        if self.dim < 1:
            raise InputError(f"box dimension must be >= 1, got {self.dim}")
        if not self.lo < self.hi:
            raise InputError(f"box needs lo < hi, got lo={self.lo}, hi={self.hi}")

    @property
    def diameter(self) -> float:
        return (self.hi - self.lo) * math.sqrt(self.dim)

    def project(self, v: np.ndarray) -> np.ndarray:
        return np.clip(self.check_vector(v), self.lo, self.hi)

    def contains(self, x: np.ndarray, tol: float = FEASIBILITY_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            return False
        slack = tol * (self.hi - self.lo)
        return bool(np.all(x >= self.lo - slack) and np.all(x <= self.hi + slack))

    def support(self, g: np.ndarray) -> float:
        return float(np.sum(np.where(g > 0.0, self.hi, self.lo) * g))

    def _active(self, x: np.ndarray):
        tol = self.active_tol
        return x >= self.hi - tol, x <= self.lo + tol

    def tangent_project(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        x = self.check_vector(x)
        v = self.check_vector(v)
        upper, lower = self._active(x)
        d = v.copy()
        d[upper] = np.minimum(d[upper], 0.0)
        d[lower] = np.maximum(d[lower], 0.0)
        return d

    def in_normal_cone(self, x: np.ndarray, n: np.ndarray, tol: float) -> bool:
        upper, lower = self._active(np.asarray(x))
        interior = ~(upper | lower)
        return bool(
            np.all(np.abs(n[interior]) <= tol)
            and np.all(n[upper] >= -tol)
            and np.all(n[lower] <= tol)
        )

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=self.dim)


def project(feasible_set: FeasibleSet, v: np.ndarray) -> np.ndarray:
    """Euclidean projection of v onto the set."""
    return feasible_set.project(v)


def product_diameter(sets: Sequence[FeasibleSet]) -> float:
    return math.sqrt(sum(s.diameter**2 for s in sets))


def check_profile(sets: Sequence[FeasibleSet], players: Sequence[np.ndarray]) -> None:
    if len(players) != len(sets):
        raise InputError(f"profile has {len(players)} players, game has {len(sets)}")
    for i, (s, x) in enumerate(zip(sets, players)):
        if not s.contains(x):
            raise InputError(f"strategy of player {i} is not feasible for {s}")


def gap(game: "GameSpec", profile: "StrategyProfile") -> float:
    """GAP(pi) = max over feasible deviations of <V(pi), pi' - pi>."""
    check_profile(game.sets, profile.players)
    grads = game.gradient(profile)
    value = 0.0
    for s, g, x in zip(game.sets, grads, profile.players):
        value += s.support(g) - float(np.dot(g, x))
    v_norm = math.sqrt(sum(float(np.dot(g, g)) for g in grads))
    eps = GAP_ROUNDING * (1.0 + v_norm * game.diameter_D)
    if value < -eps:
        raise ConsistencyError(f"gap {value:.3e} is below rounding level -{eps:.3e}")
    return max(value, 0.0)


def tangent_projection(
    sets: Sequence[FeasibleSet], players: Sequence[np.ndarray], v: Sequence[np.ndarray]
) -> List[np.ndarray]:
    return [s.tangent_project(x, g) for s, x, g in zip(sets, players, v)]


def tangent_residual(game: "GameSpec", profile: "StrategyProfile") -> float:
    """Distance of V(pi) to the normal cone at pi (Moreau decomposition)."""
    check_profile(game.sets, profile.players)
    grads = game.gradient(profile)
    parts = tangent_projection(game.sets, profile.players, grads)
    return math.sqrt(sum(float(np.dot(d, d)) for d in parts))
