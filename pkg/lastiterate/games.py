"""
Benchmark monotone games as gradient oracles.

Three families: two-player zero-sum matrix games on simplices (random payoff
matrices), the hard concave-convex quadratic game on boxes, and Cournot
competition with linear price. Each builder returns an immutable GameSpec with
declared constants (L, D, zeta), a payoff evaluator and a best-response oracle.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError, UnsupportedMetricError
from .feedback import GAME_STREAM, make_rng
from .geometry import Box, FeasibleSet, Simplex, product_diameter

logger = logging.getLogger(__name__)

HARD_GAME_BOUND = 200.0
INNER_TOL = 1e-10
INNER_MAX_ITER = 1_000_000


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """One strategy vector per player."""

    players: Tuple[np.ndarray, ...]

    @classmethod
    def of(cls, *vectors: Sequence[float]) -> "StrategyProfile":
        return cls(tuple(np.asarray(v, dtype=float) for v in vectors))

    @classmethod
    def from_flat(cls, flat: np.ndarray, dims: Sequence[int]) -> "StrategyProfile":
        cuts = np.cumsum(dims)[:-1]
        return cls(tuple(np.array(part) for part in np.split(flat, cuts)))

    @property
    def n_players(self) -> int:
        return len(self.players)

    def flat(self) -> np.ndarray:
        return np.concatenate(self.players)

    def map(self, fn: Callable[..., np.ndarray], *others: "StrategyProfile"):
        """Apply fn player-wise to this profile and others."""
        columns = zip(self.players, *(o.players for o in others))
        return StrategyProfile(tuple(fn(*xs) for xs in columns))

    def distance(self, other: "StrategyProfile") -> float:
        return float(np.linalg.norm(self.flat() - other.flat()))

    def __repr__(self) -> str:
        parts = ", ".join(np.array2string(x, precision=4) for x in self.players)
        return f"StrategyProfile({parts})"


@dataclass(frozen=True, eq=False)
class BestResponse:
    value: float
    argmax: np.ndarray
    converged: bool = True


@dataclass(frozen=True, eq=False)
class HardGameMatrices:
    A: np.ndarray
    H: np.ndarray
    b: np.ndarray
    h: np.ndarray


Gradient = Callable[[StrategyProfile], List[np.ndarray]]
Payoff = Callable[[StrategyProfile], np.ndarray]
BestResponseFn = Callable[[int, StrategyProfile, Optional[np.ndarray]], BestResponse]


@dataclass(frozen=True, eq=False)
class GameSpec:
    """A smooth monotone game given through its gradient operator V."""

    name: str
    sets: Tuple[FeasibleSet, ...]
    gradient: Gradient
    lipschitz_L: float
    diameter_D: float
    grad_bound_zeta: float
    initial: StrategyProfile
    payoff: Optional[Payoff] = None
    best_response: Optional[BestResponseFn] = None
    # payoff of each simplex vertex against pi_{-i}; fast path for external regret
    vertex_payoffs: Optional[Callable[[int, StrategyProfile], np.ndarray]] = None
    zero_sum: bool = False
    data: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_players(self) -> int:
        return len(self.sets)

    @property
    def dims(self) -> List[int]:
        return [s.dim for s in self.sets]

    def sample_profile(self, rng: np.random.Generator) -> StrategyProfile:
        return StrategyProfile(tuple(s.sample(rng) for s in self.sets))

    def with_deviation(self, profile: StrategyProfile, player: int, x: np.ndarray):
        players = list(profile.players)
        players[player] = np.asarray(x, dtype=float)
        return StrategyProfile(tuple(players))


def maximize_over_box(
    grad: Callable[[np.ndarray], np.ndarray],
    box: FeasibleSet,
    start: np.ndarray,
    step: float,
    tol: float = INNER_TOL,
    max_iter: int = INNER_MAX_ITER,
) -> Tuple[np.ndarray, bool, int]:
    """Projected gradient ascent on a concave function until the update stalls."""
    x = box.project(start)
    for n in range(1, max_iter + 1):
        x_new = box.project(x + step * grad(x))
        moved = float(np.linalg.norm(x_new - x))
        x = x_new
        if moved < tol:
            return x, True, n
    return x, False, max_iter


# --- two-player zero-sum matrix games ---------------------------------------


def build_matrix_game(A: np.ndarray, name: str = "matrix") -> GameSpec:
    """Zero-sum game v1 = pi1^T A pi2, v2 = -v1 over two simplices."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise InputError(f"payoff matrix must be 2-D, got shape {A.shape}")
    n, m = A.shape
    sets = (Simplex(n), Simplex(m))

    def gradient(profile: StrategyProfile) -> List[np.ndarray]:
        x, y = profile.players
        return [A @ y, -(A.T @ x)]

    def payoff(profile: StrategyProfile) -> np.ndarray:
        x, y = profile.players
        v = float(x @ A @ y)
        return np.array([v, -v])

    def vertex_payoffs(player: int, profile: StrategyProfile) -> np.ndarray:
        # own payoff is linear in own strategy with no constant term
        return gradient(profile)[player]

    def best_response(player, profile, start=None) -> BestResponse:
        g = vertex_payoffs(player, profile)
        j = int(np.argmax(g))
        return BestResponse(float(g[j]), sets[player].vertices()[j])

    max_row = float(np.max(np.linalg.norm(A, axis=1)))
    max_col = float(np.max(np.linalg.norm(A, axis=0)))
    initial = StrategyProfile((np.full(n, 1.0 / n), np.full(m, 1.0 / m)))
    return GameSpec(
        name=name,
        sets=sets,
        gradient=gradient,
        lipschitz_L=float(np.linalg.norm(A, "fro")),
        diameter_D=product_diameter(sets),
        grad_bound_zeta=math.sqrt(2.0) * max(max_row, max_col),
        initial=initial,
        payoff=payoff,
        best_response=best_response,
        vertex_payoffs=vertex_payoffs,
        zero_sum=True,
        data={"A": A},
    )


def build_random_payoff(dim: int, seed: int) -> GameSpec:
    """Random payoff game: entries of A drawn i.i.d. from U[-1, 1]."""
    if dim < 1:
        raise InputError(f"dim must be >= 1, got {dim}")
    rng = make_rng(seed, GAME_STREAM)
    A = rng.uniform(-1.0, 1.0, size=(dim, dim))
    return build_matrix_game(A, name="random")


# --- hard concave-convex game -----------------------------------------------


def hard_game_matrices(dim: int) -> HardGameMatrices:
    """Anti-diagonal band A, H = 2 A^T A, b = 1/4, h = e_n / 4."""
    if dim < 2:
        raise InputError(f"hard game needs dim >= 2, got {dim}")
    A = np.zeros((dim, dim))
    for r in range(1, dim):
        A[r - 1, dim - r - 1] = -0.25
        A[r - 1, dim - r] = 0.25
    A[dim - 1, 0] = 0.25
    h = np.zeros(dim)
    h[-1] = 0.25
    return HardGameMatrices(A=A, H=2.0 * A.T @ A, b=np.full(dim, 0.25), h=h)


def build_hard_game(dim: int) -> GameSpec:
    """max_x min_y f(x, y) = -x^T H x / 2 + h^T x + <A x - b, y> on [-200, 200]^d."""
    mats = hard_game_matrices(dim)
    A, H, b, h = mats.A, mats.H, mats.b, mats.h
    box = Box(dim, -HARD_GAME_BOUND, HARD_GAME_BOUND)
    sets = (box, box)

    def f(x: np.ndarray, y: np.ndarray) -> float:
        return float(-0.5 * x @ H @ x + h @ x + (A @ x - b) @ y)

    def gradient(profile: StrategyProfile) -> List[np.ndarray]:
        x, y = profile.players
        return [-H @ x + h + A.T @ y, -(A @ x - b)]

    def payoff(profile: StrategyProfile) -> np.ndarray:
        v = f(*profile.players)
        return np.array([v, -v])

    h_norm = float(np.linalg.norm(H, 2))

    def best_response(player, profile, start=None) -> BestResponse:
        x, y = profile.players
        if player == 1:
            # -f is linear in y: maximise coordinate-wise over the box
            g = -(A @ x - b)
            y_star = np.where(g > 0.0, box.hi, box.lo)
            return BestResponse(-f(x, y_star), y_star)
        linear = h + A.T @ y
        x0 = x if start is None else start
        x_star, converged, n = maximize_over_box(
            lambda z: -H @ z + linear, box, x0, 1.0 / h_norm
        )
        if not converged:
            logger.warning(f"hard-game best response stopped after {n} iterations")
        return BestResponse(f(x_star, y), x_star, converged)

    a_fro = float(np.linalg.norm(A, "fro"))
    h_fro = float(np.linalg.norm(H, "fro"))
    radius = HARD_GAME_BOUND * math.sqrt(dim)
    zeta_x = (h_fro + a_fro) * radius + float(np.linalg.norm(h))
    zeta_y = a_fro * radius + float(np.linalg.norm(b))
    initial = StrategyProfile((np.full(dim, 1.0 / dim), np.full(dim, 1.0 / dim)))
    return GameSpec(
        name="hard",
        sets=sets,
        gradient=gradient,
        lipschitz_L=h_fro + a_fro,
        diameter_D=2.0 * HARD_GAME_BOUND * math.sqrt(2.0 * dim),
        grad_bound_zeta=math.hypot(zeta_x, zeta_y),
        initial=initial,
        payoff=payoff,
        best_response=best_response,
        zero_sum=True,
        data={"matrices": mats},
    )


# --- Cournot competition ----------------------------------------------------


def build_cournot(
    n_firms: int,
    a: float,
    b: float,
    costs: Sequence[float],
    caps: Sequence[float],
) -> GameSpec:
    """N firms choose quantities in [0, C_i]; price a - b * total quantity."""
    costs = np.asarray(costs, dtype=float)
    caps = np.asarray(caps, dtype=float)
    if n_firms < 1:
        raise InputError(f"need at least one firm, got {n_firms}")
    if a <= 0 or b <= 0:
        raise InputError(f"price parameters must be positive, got a={a}, b={b}")
    if costs.shape != (n_firms,) or caps.shape != (n_firms,):
        raise InputError("costs and caps need one entry per firm")
    if np.any(caps <= 0):
        raise InputError("capacities must be positive")
    sets = tuple(Box(1, 0.0, float(c)) for c in caps)

    def quantities(profile: StrategyProfile) -> np.ndarray:
        return np.array([float(q[0]) for q in profile.players])

    def gradient(profile: StrategyProfile) -> List[np.ndarray]:
        q = quantities(profile)
        g = a - b * q.sum() - b * q - costs
        return [np.array([gi]) for gi in g]

    def payoff(profile: StrategyProfile) -> np.ndarray:
        q = quantities(profile)
        return q * (a - b * q.sum()) - costs * q

    def best_response(player, profile, start=None) -> BestResponse:
        q = quantities(profile)
        rest = q.sum() - q[player]
        unconstrained = (a - costs[player] - b * rest) / (2.0 * b)
        x = float(np.clip(unconstrained, 0.0, caps[player]))
        value = x * (a - b * (rest + x)) - costs[player] * x
        return BestResponse(value, np.array([x]))

    total = float(caps.sum())
    per_firm = np.abs(a - costs) + b * (total + caps)
    return GameSpec(
        name="cournot",
        sets=sets,
        gradient=gradient,
        lipschitz_L=b * (n_firms + 1),
        diameter_D=product_diameter(sets),
        grad_bound_zeta=float(np.linalg.norm(per_firm)),
        initial=StrategyProfile(tuple(np.array([c / 2.0]) for c in caps)),
        payoff=payoff,
        best_response=best_response,
        data={"a": a, "b": b, "costs": costs, "caps": caps},
    )


# --- queries ----------------------------------------------------------------


def best_response_value(
    game: GameSpec,
    player: int,
    profile: StrategyProfile,
    start: Optional[np.ndarray] = None,
) -> BestResponse:
    """max over the player's set of v_i(x, pi_{-i})."""
    if game.payoff is None:
        raise UnsupportedMetricError(f"game '{game.name}' has no payoff evaluator")
    if not 0 <= player < game.n_players:
        raise InputError(f"player index {player} out of range")
    if game.best_response is not None:
        return game.best_response(player, profile, start)
    feasible = game.sets[player]
    if isinstance(feasible, Simplex):
        values = deviation_payoffs(game, player, profile)
        j = int(np.argmax(values))
        return BestResponse(float(values[j]), feasible.vertices()[j])

    def own_gradient(x: np.ndarray) -> np.ndarray:
        return game.gradient(game.with_deviation(profile, player, x))[player]

    x0 = profile.players[player] if start is None else start
    x, converged, _ = maximize_over_box(
        own_gradient, feasible, x0, 1.0 / game.lipschitz_L
    )
    value = float(game.payoff(game.with_deviation(profile, player, x))[player])
    return BestResponse(value, x, converged)


def deviation_payoffs(game: GameSpec, player: int, profile: StrategyProfile):
    """Payoff of every vertex of a simplex player's set against pi_{-i}."""
    if game.vertex_payoffs is not None:
        return game.vertex_payoffs(player, profile)
    if game.payoff is None:
        raise UnsupportedMetricError(f"game '{game.name}' has no payoff evaluator")
    return np.array(
        [
            game.payoff(game.with_deviation(profile, player, e))[player]
            for e in game.sets[player].vertices()
        ]
    )


def monotonicity_product(game: GameSpec, p: StrategyProfile, q: StrategyProfile):
    """<V(p) - V(q), p - q>; nonpositive for a monotone game."""
    vp = np.concatenate(game.gradient(p))
    vq = np.concatenate(game.gradient(q))
    return float(np.dot(vp - vq, p.flat() - q.flat()))


def lipschitz_ratio(game: GameSpec, p: StrategyProfile, q: StrategyProfile):
    vp = np.concatenate(game.gradient(p))
    vq = np.concatenate(game.gradient(q))
    dist = p.distance(q)
    return float(np.linalg.norm(vp - vq)) / dist if dist > 0 else 0.0
