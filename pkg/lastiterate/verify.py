"""
Property suites behind `python -m lastiterate verify SUITE`.

Each check measures a margin (bound minus measured value, so positive is good)
and reports it together with the quantity that was measured.
"""

import functools
import io
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence

import numpy as np

from .algorithms import (
    AnchorState,
    ConstantSchedule,
    GABPState,
    NoisyTheorySchedule,
    Run,
    SolverKind,
    aog_project,
    aog_project_centered,
    compute_k,
    gabp_step,
    gabp_step_centered,
    tsigma_full,
)
from .config import ExperimentConfig, expand_runs
from .errors import MetricError
from .feedback import (
    SAMPLE_STREAM,
    FeedbackSample,
    FeedbackStreams,
    Gaussian,
    NoNoise,
    make_rng,
    observe,
)
from .games import (
    GameSpec,
    StrategyProfile,
    build_cournot,
    build_hard_game,
    build_matrix_game,
    build_random_payoff,
    lipschitz_ratio,
    monotonicity_product,
)
from .geometry import Box, Simplex, gap, tangent_residual
from .harness import prepare_run, slope_window
from .metrics import (
    RegretHook,
    StationaryMonitor,
    anchor_distance_bound,
    default_oracle_tol,
    full_feedback_gap_bound,
    gap_decomposition_bound,
    inner_loop_bound,
    slope_fit,
    solve_stationary,
    telescoping_slack,
)
from .presets import preset_document
from .records import RunRecord, write_records

logger = logging.getLogger(__name__)

GEOMETRY_CASES = 10_000
SAMPLED_CASES = 1_000
GRADIENT_CASES = 1_000
PAIR_CASES = 10_000
NOISE_DRAWS = 100_000
EQUIVALENCE_STEPS = 1_000
CONTRACTION_STEPS = 500
MIN_EPOCHS = 8
VERIFY_SEED = 2024
ACCEPTANCE_T = 100_000
ACCEPTANCE_SEEDS = 10
ACCEPTANCE_SLOPE = -0.8


@dataclass
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str = ""


def check(name: str, margin: float, detail: str = "") -> CheckResult:
    return CheckResult(name, bool(margin >= 0.0), float(margin), detail)


def holds(name: str, ok: bool, detail: str = "") -> CheckResult:
    return check(name, 0.0 if ok else -1.0, detail)


def _rng(*key: int) -> np.random.Generator:
    return make_rng(VERIFY_SEED, SAMPLE_STREAM, *key)


def benchmark_games() -> Dict[str, GameSpec]:
    return {
        "random": build_random_payoff(50, 0),
        "hard": build_hard_game(100),
        "cournot": build_cournot(3, 10.0, 1.0, [1.0, 2.0, 3.0], [5.0, 5.0, 5.0]),
    }


def rock_paper_scissors() -> GameSpec:
    A = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])
    return build_matrix_game(A, name="rps")


def theory_eta(game: GameSpec, mu: float) -> float:
    return 0.9 * mu / (game.lipschitz_L + mu) ** 2


# --- geometry ---------------------------------------------------------------


def _check_set(label: str, s, rng: np.random.Generator) -> List[CheckResult]:
    idem = nonexp = moreau = 0.0
    cone_failures = 0
    sum_err = lowest = 0.0
    for n in range(GEOMETRY_CASES):
        v = rng.normal(scale=3.0, size=s.dim)
        w = rng.normal(scale=3.0, size=s.dim)
        pv, pw = s.project(v), s.project(w)
        idem = max(idem, float(np.max(np.abs(s.project(pv) - pv))))
        stretch = np.linalg.norm(pv - pw) - np.linalg.norm(v - w)
        nonexp = max(nonexp, float(stretch))
        sum_err = max(sum_err, abs(float(pv.sum()) - 1.0))
        lowest = min(lowest, float(pv.min()))
        # alternate interior samples and boundary points
        x = s.sample(rng) if n % 2 == 0 else pw
        d = s.tangent_project(x, v)
        normal = v - d
        vv = float(v @ v)
        split = abs(float(d @ d + normal @ normal) - vv) / max(vv, 1e-300)
        moreau = max(moreau, split)
        if not s.in_normal_cone(x, normal, 1e-9 * (1.0 + math.sqrt(vv))):
            cone_failures += 1
    results = [
        check(f"{label}: projection idempotence", 1e-12 - idem, f"max {idem:.2e}"),
        check(f"{label}: non-expansiveness", 1e-12 - nonexp, f"max {nonexp:.2e}"),
        check(f"{label}: Moreau norm split", 1e-9 - moreau, f"max {moreau:.2e}"),
        check(
            f"{label}: residual lies in normal cone",
            -float(cone_failures),
            f"{cone_failures} failures",
        ),
    ]
    if isinstance(s, Simplex):
        results.append(
            check("simplex: sums to one", 1e-12 - sum_err, f"max {sum_err:.2e}")
        )
        results.append(
            check("simplex: nonnegative", lowest + 1e-15, f"min {lowest:.2e}")
        )
    return results


def suite_geometry() -> List[CheckResult]:
    results = []
    families = {"simplex": Simplex(6), "box": Box(4, -1.0, 2.0)}
    for label, s in families.items():
        results.extend(_check_set(label, s, _rng(1, s.dim)))

    rps = rock_paper_scissors()
    rps_gap = gap(rps, rps.initial)
    results.append(
        check("gap zero at the rock-paper-scissors equilibrium", 1e-12 - rps_gap)
    )

    for name, game in benchmark_games().items():
        rng = _rng(2, len(name))
        worst = lowest_gap = math.inf
        for _ in range(SAMPLED_CASES):
            profile = game.sample_profile(rng)
            g = gap(game, profile)
            r = tangent_residual(game, profile)
            bound = game.diameter_D * r * (1.0 + 1e-9)
            worst = min(worst, bound + 1e-12 * (1.0 + bound) - g)
            lowest_gap = min(lowest_gap, g)
        results.append(
            check(f"{name}: GAP <= D * tangent residual", worst, f"{worst:.3e}")
        )
        results.append(check(f"{name}: GAP nonnegative", lowest_gap))
    return results


# --- games ------------------------------------------------------------------


def _directional_error(game: GameSpec, profile: StrategyProfile, rng) -> float:
    grads = game.gradient(profile)
    worst = 0.0
    for i, s in enumerate(game.sets):
        step = 1e-5 * (s.diameter if s.diameter > 0 else 1.0)
        direction = rng.normal(size=s.dim)
        direction /= np.linalg.norm(direction)
        x = profile.players[i]
        up = game.with_deviation(profile, i, x + step * direction)
        down = game.with_deviation(profile, i, x - step * direction)
        fd = (game.payoff(up)[i] - game.payoff(down)[i]) / (2.0 * step)
        exact = float(grads[i] @ direction)
        scale = max(1.0, float(np.linalg.norm(grads[i])))
        worst = max(worst, abs(fd - exact) / scale)
    return worst


def _hard_grid_check() -> CheckResult:
    game = build_hard_game(2)
    mats = game.data["matrices"]
    zero = np.zeros(2)
    br = game.best_response(0, StrategyProfile((zero, zero)), None)
    axis = np.arange(-200.0, 200.0 + 1e-9, 0.05)
    best = -math.inf
    for x0 in axis:
        xs = np.stack([np.full_like(axis, x0), axis], axis=1)
        values = -0.5 * np.einsum("ij,jk,ik->i", xs, mats.H, xs) + xs @ mats.h
        best = max(best, float(values.max()))
    # grid points lie within delta of the maximiser
    grad = float(np.linalg.norm(-mats.H @ br.argmax + mats.h))
    delta = 0.05 * math.sqrt(2.0) / 2.0
    slack = grad * delta + float(np.linalg.norm(mats.H, 2)) * delta**2
    margin = min(br.value - best + 1e-9 * (1.0 + abs(best)), best + slack - br.value)
    return check(
        "hard d=2: inner best response vs grid search",
        margin,
        f"solver {br.value:.6g}, grid {best:.6g}",
    )


def suite_games() -> List[CheckResult]:
    results = []
    for name, game in benchmark_games().items():
        rng = _rng(3, len(name))
        fd = max(
            _directional_error(game, game.sample_profile(rng), rng)
            for _ in range(GRADIENT_CASES)
        )
        results.append(
            check(f"{name}: gradient matches finite differences", 1e-6 - fd)
        )

        mono = -math.inf
        ratio = 0.0
        for _ in range(PAIR_CASES):
            p, q = game.sample_profile(rng), game.sample_profile(rng)
            excess = monotonicity_product(game, p, q) - 1e-9 * p.distance(q) ** 2
            mono = max(mono, excess)
            ratio = max(ratio, lipschitz_ratio(game, p, q))
        results.append(check(f"{name}: monotone", -mono, f"max {mono:.2e}"))
        L = game.lipschitz_L
        results.append(
            check(
                f"{name}: declared L dominates",
                L * (1.0 + 1e-9) - ratio,
                f"max ratio {ratio:.4g}, L {L:.4g}",
            )
        )
        if game.zero_sum:
            worst = max(
                abs(float(game.payoff(game.sample_profile(rng)).sum()))
                for _ in range(SAMPLED_CASES)
            )
            results.append(check(f"{name}: zero-sum", 1e-9 - worst))
    results.append(_hard_grid_check())
    return results


# --- feedback ---------------------------------------------------------------


def suite_feedback() -> List[CheckResult]:
    game = build_random_payoff(5, 0)
    profile = game.initial
    exact = np.concatenate(game.gradient(profile))
    sigma = 0.1
    model = Gaussian(sigma)
    streams = FeedbackStreams(7, game.n_players)
    draws = np.empty((NOISE_DRAWS, exact.size))
    for t in range(NOISE_DRAWS):
        draws[t] = np.concatenate(observe(game, profile, model, streams, t).grads)

    mean_err = float(np.max(np.abs(draws.mean(axis=0) - exact)))
    var = draws.var(axis=0, ddof=1)
    centred = draws - draws.mean(axis=0)
    lag1 = (centred[1:] * centred[:-1]).sum(axis=0) / (centred**2).sum(axis=0)
    auto = float(np.max(np.abs(lag1)))
    band = 4.0 / math.sqrt(NOISE_DRAWS)
    results = [
        check("gaussian: sample mean", sigma * band - mean_err, f"{mean_err:.2e}"),
        check(
            "gaussian: sample variance",
            min(var.min() - 0.009, 0.011 - var.max()),
            f"[{var.min():.5f}, {var.max():.5f}]",
        ),
        check("gaussian: lag-1 autocorrelation", band - auto, f"max {auto:.2e}"),
    ]

    def sequence(noise, seed, run_index=0):
        s = FeedbackStreams(seed, game.n_players, run_index)
        return np.concatenate(
            [
                np.concatenate(observe(game, profile, noise, s, t).grads)
                for t in range(100)
            ]
        )

    base = sequence(model, 3)
    same = np.array_equal(base, sequence(model, 3))
    results.append(holds("gaussian: deterministic in seed", same))
    other = sequence(model, 3, run_index=1)
    distinct = not np.array_equal(base, other)
    results.append(holds("gaussian: runs own their streams", distinct))
    zero = np.array_equal(sequence(Gaussian(0.0), 3), sequence(NoNoise(), 3))
    results.append(holds("gaussian(0) equals exact feedback", zero))
    return results


# --- update rules -----------------------------------------------------------


def _profiles(runner: Run) -> List[np.ndarray]:
    out = []
    for _ in runner:
        out.append(runner.profile.flat().copy())
    return out


def _equivalence_checks(game: GameSpec) -> List[CheckResult]:
    rng = _rng(4)
    worst_gabp = worst_aog = 0.0
    for _ in range(EQUIVALENCE_STEPS):
        pi, s_k, s_1 = (game.sample_profile(rng) for _ in range(3))
        k = int(rng.integers(1, 50))
        anchor = AnchorState(sigma_k=s_k, sigma_1=s_1, T_sigma=10**9, k=k)
        fb = FeedbackSample(tuple(rng.normal(size=d) for d in game.dims), 1)
        eta = float(rng.uniform(0.001, 0.5))
        state = GABPState(pi=pi, anchor=anchor, mu=float(rng.uniform(0.01, 2.0)))
        a = gabp_step(game, state, fb, eta).pi.flat()
        b = gabp_step_centered(game, state, fb, eta).pi.flat()
        worst_gabp = max(worst_gabp, float(np.max(np.abs(a - b))))
        t = int(rng.integers(1, 10_000))
        a = aog_project(game, pi, s_1, t, fb.grads, eta).flat()
        b = aog_project_centered(game, pi, s_1, t, fb.grads, eta).flat()
        worst_aog = max(worst_aog, float(np.max(np.abs(a - b))))
    return [
        check("gabp: boosted and centred forms agree", 1e-12 - worst_gabp),
        check("aog: both proximal forms agree", 1e-12 - worst_aog),
    ]


def _anchor_replay(game: GameSpec) -> CheckResult:
    runner = Run(game, SolverKind.GABP, ConstantSchedule(0.05), 200, T_sigma=7, mu=1.0)
    iterates = [runner.profile.flat().copy()]
    mismatches = 0
    for _ in runner:
        iterates.append(runner.profile.flat().copy())
        anchor = runner.state.anchor
        expected = iterates[runner.T_sigma * (anchor.k - 1)]
        if not np.array_equal(anchor.sigma_k.flat(), expected):
            mismatches += 1
    return check(
        "anchors replay from the iterate log", -float(mismatches), f"{mismatches}"
    )


def _csv_text(game: GameSpec) -> str:
    buf = io.StringIO()
    runner = Run(
        game,
        SolverKind.GABP,
        ConstantSchedule(0.05),
        300,
        T_sigma=20,
        mu=1.0,
        noise=Gaussian(0.1),
        seed=5,
    )
    write_records(buf, runner, {"seed": 5})
    return buf.getvalue()


def suite_algorithms() -> List[CheckResult]:
    game = build_random_payoff(10, 0)
    results = _equivalence_checks(game)

    T_sigma = 50
    shared = dict(T_sigma=T_sigma, mu=0.5, noise=Gaussian(0.1), seed=11)
    schedule = ConstantSchedule(0.05)
    gabp = _profiles(Run(game, SolverKind.GABP, schedule, T_sigma, **shared))
    apga = _profiles(Run(game, SolverKind.APGA, schedule, T_sigma, **shared))
    same = all(np.array_equal(a, b) for a, b in zip(gabp, apga))
    results.append(holds("gabp and apga agree on the first epoch", same))

    results.append(_anchor_replay(game))

    noisy = NoisyTheorySchedule(1.0, game.lipschitz_L)
    first = 1.0 / (noisy.kappa + 2.0 * noisy.theta)
    restarts = [noisy.eta_at(T_sigma * (k - 1) + 1, T_sigma) for k in range(1, 6)]
    results.append(
        holds(
            "noisy schedule restarts every epoch",
            all(eta == first for eta in restarts),
            f"first eta {first:.6g}",
        )
    )

    same = _csv_text(game) == _csv_text(game)
    results.append(holds("identical runs give identical CSV", same))

    big = build_random_payoff(50, 0)
    runner = Run(big, SolverKind.GABP, schedule, 10_000, T_sigma=10, mu=1.0)
    gaps = {r.t: r.gap for r in runner if r.t in (100, 10_000)}
    ratio = gaps[10_000] / gaps[100] if gaps[100] > 0 else 0.0
    results.append(
        check("gabp d=50: gap falls tenfold by t=1e4", 0.1 - ratio, f"{ratio:.3g}")
    )
    return results


# --- inner loop contraction -------------------------------------------------


def suite_contraction() -> List[CheckResult]:
    game = build_random_payoff(10, 0)
    mu = 1.0
    eta = theory_eta(game, mu)
    tol = default_oracle_tol(game)
    oracle = solve_stationary(game, game.initial, mu, tol)
    initial_sq = oracle.profile.distance(game.initial) ** 2
    runner = Run(
        game,
        SolverKind.GABP,
        ConstantSchedule(eta),
        CONTRACTION_STEPS,
        T_sigma=CONTRACTION_STEPS + 1,
        mu=mu,
    )
    worst = math.inf
    for record in runner:
        measured = oracle.profile.distance(runner.profile) ** 2
        bound = inner_loop_bound(initial_sq, eta, mu, record.t)
        worst = min(worst, bound * (1.0 + 1e-6) + 10.0 * tol - measured)
    return [
        check(
            "frozen anchor: geometric contraction to the stationary point",
            worst,
            f"eta {eta:.4g}, oracle residual {oracle.residual:.1e}",
        )
    ]


# --- theory-schedule run shared by the decomposition and potential suites ---


@dataclass
class TheoryRun:
    game: GameSpec
    eta: float
    mu: float
    T: int
    T_sigma: int
    records: list
    monitor: StationaryMonitor
    final: StrategyProfile


@functools.lru_cache(maxsize=1)
def theory_run() -> TheoryRun:
    """Full-feedback GABP with the constant-rate T_sigma, long enough for 8 epochs."""
    game = build_random_payoff(10, 0)
    mu = 1.0
    eta = theory_eta(game, mu)
    T = 1000
    while T < MIN_EPOCHS * tsigma_full(T, eta, mu):
        T = MIN_EPOCHS * tsigma_full(T, eta, mu)
    T_sigma = tsigma_full(T, eta, mu)
    monitor = StationaryMonitor(game, mu)
    runner = Run(
        game,
        SolverKind.GABP,
        ConstantSchedule(eta),
        T,
        T_sigma=T_sigma,
        mu=mu,
        hooks=[monitor],
    )
    logger.info(f"theory run: T={T}, T_sigma={T_sigma}, eta={eta:.4g}")
    records = list(runner)
    return TheoryRun(game, eta, mu, T, T_sigma, records, monitor, runner.profile)


def suite_decomposition() -> List[CheckResult]:
    run = theory_run()
    game, monitor = run.game, run.monitor
    tol = monitor.tol
    D = game.diameter_D
    epochs = run.T // run.T_sigma
    results = [check(f"at least {MIN_EPOCHS} epochs", epochs - MIN_EPOCHS)]

    worst = math.inf
    for snap in monitor.epochs:
        bound = anchor_distance_bound(D, snap.k) + 10.0 * tol
        worst = min(worst, bound - snap.anchor_distance())
    results.append(
        check(
            "anchor distance <= 8D/(k+1)",
            worst,
            f"max oracle residual {monitor.max_residual:.1e}",
        )
    )

    worst = math.inf
    for record in run.records:
        start = monitor.epoch(record.k)
        steps = record.t - run.T_sigma * (record.k - 1)
        bound = inner_loop_bound(start.anchor_distance() ** 2, run.eta, run.mu, steps)
        measured = record.dist_stationary**2
        worst = min(worst, bound * (1.0 + 1e-6) + 10.0 * tol - measured)
    results.append(check("every epoch contracts to its stationary point", worst))

    final = run.records[-1]
    bound = full_feedback_gap_bound(
        final.t, run.T, run.eta, run.mu, game.lipschitz_L, D
    )
    scaled = D * tangent_residual(game, run.final)
    results.append(
        check(
            "final GAP within the full-feedback bound",
            bound - final.gap,
            f"gap {final.gap:.3e}, bound {bound:.3e}",
        )
    )
    results.append(
        check("final D * tangent residual within the bound", bound - scaled)
    )
    return results


def suite_potential() -> List[CheckResult]:
    run = theory_run()
    game, monitor = run.game, run.monitor
    D = game.diameter_D
    worst = math.inf
    compared = 0
    for prev, cur in zip(monitor.potentials, monitor.potentials[1:]):
        k = prev.k
        ahead = monitor.epoch(k).pi_mu.distance(monitor.epoch(k + 1).sigma_k)
        behind = monitor.epoch(k - 1).pi_mu.distance(monitor.epoch(k).sigma_k)
        slack = telescoping_slack(k, D, ahead, behind) + 10.0 * monitor.tol
        worst = min(worst, slack - (cur.value - prev.value))
        compared += 1
    results = [
        check(
            "potential is approximately non-increasing",
            worst if compared else -1.0,
            f"{compared} epoch pairs, max oracle residual {monitor.max_residual:.1e}",
        )
    ]

    K = compute_k(run.T, run.T_sigma)
    snap = monitor.epoch(K)
    final_gap = run.records[-1].gap
    zeta = game.grad_bound_zeta
    bound = gap_decomposition_bound(
        run.mu,
        D,
        game.lipschitz_L,
        zeta,
        K,
        snap.anchor_distance(),
        snap.pi_mu.distance(run.final),
    )
    results.append(
        check(
            "final GAP within the anchor decomposition",
            bound + 1e-9 * (1.0 + D * zeta) - final_gap,
            f"gap {final_gap:.3e}, bound {bound:.3e}",
        )
    )
    return results


# --- regret -----------------------------------------------------------------


def _regret_run(game: GameSpec, T: int, mu: float):
    eta = theory_eta(game, mu)
    runner = Run(
        game,
        SolverKind.GABP,
        ConstantSchedule(eta),
        T,
        T_sigma=tsigma_full(T, eta, mu),
        mu=mu,
        hooks=[RegretHook(game, dynamic=True, external=True)],
        record_every=max(1, T // 100),
    )
    return list(runner)


def suite_regret() -> List[CheckResult]:
    game = build_random_payoff(10, 0)
    short = _regret_run(game, 1_000, 1.0)
    long = _regret_run(game, 100_000, 1.0)
    results = []
    for i in range(game.n_players):
        r_short = short[-1].dyn_regret[i] / math.log(1_000) ** 2
        r_long = long[-1].dyn_regret[i] / math.log(100_000) ** 2
        results.append(
            check(
                f"player {i}: dynamic regret grows like (ln T)^2",
                2.0 * r_short - r_long,
                f"T=1e3 {r_short:.4g}, T=1e5 {r_long:.4g}",
            )
        )
    worst = math.inf
    for record in short + long:
        for dyn, ext in zip(record.dyn_regret, record.ext_regret):
            worst = min(worst, dyn - ext + 1e-9 * (1.0 + abs(dyn)))
    results.append(check("dynamic regret dominates external regret", worst))
    return results


# --- tuned-preset acceptance runs -------------------------------------------


def preset_trajectories(name: str, kind: SolverKind) -> List[List[RunRecord]]:
    """Records of one solver of a tuned preset, one list per seed."""
    document = preset_document(name)
    document.update(
        T=ACCEPTANCE_T,
        seeds=list(range(ACCEPTANCE_SEEDS)),
        metrics=["gap"],
        record_every=max(1, ACCEPTANCE_T // 1000),
    )
    document["solvers"] = [s for s in document["solvers"] if s["kind"] == kind.value]
    trajectories = []
    for run_cfg in expand_runs(ExperimentConfig.model_validate(document)):
        records = list(prepare_run(run_cfg))
        logger.info(f"{run_cfg.stem}: final gap {records[-1].gap:.3e}")
        trajectories.append(records)
    return trajectories


def _gap_at(records: Sequence[RunRecord], t: int) -> float:
    return next(r.gap for r in records if r.t >= t)


def suite_acceptance() -> List[CheckResult]:
    start, end = slope_window(ACCEPTANCE_T)
    full = preset_trajectories("random_full", SolverKind.GABP)
    try:
        slopes = [slope_fit(records, start, end) for records in full]
    except MetricError as e:
        results = [holds("full feedback: gabp GAP slope", False, str(e))]
    else:
        median = float(np.median(slopes))
        results = [
            check(
                f"full feedback: median gabp GAP slope <= {ACCEPTANCE_SLOPE}",
                ACCEPTANCE_SLOPE - median,
                f"median {median:.3f} over t in [{start}, {end}], {len(slopes)} seeds",
            )
        ]

    gabp = preset_trajectories("random_noisy", SolverKind.GABP)
    apga = preset_trajectories("random_noisy", SolverKind.APGA)
    gabp_final = float(np.mean([records[-1].gap for records in gabp]))
    apga_final = float(np.mean([records[-1].gap for records in apga]))
    results.append(
        check(
            "noisy feedback: mean final GAP of gabp <= apga",
            apga_final - gabp_final,
            f"gabp {gabp_final:.3e}, apga {apga_final:.3e}",
        )
    )
    early = float(np.mean([_gap_at(records, start) for records in gabp]))
    results.append(
        check(
            f"noisy feedback: gabp GAP halves between t={start} and t={end}",
            0.5 * early - gabp_final,
            f"{early:.3e} -> {gabp_final:.3e}",
        )
    )
    return results


SUITES: Dict[str, Callable[[], List[CheckResult]]] = {
    "geometry": suite_geometry,
    "games": suite_games,
    "feedback": suite_feedback,
    "algorithms": suite_algorithms,
    "contraction": suite_contraction,
    "decomposition": suite_decomposition,
    "potential": suite_potential,
    "regret": suite_regret,
    "acceptance": suite_acceptance,
}
# accepted on the command line for the gap decomposition suite
SUITE_ALIASES = {"lemma3": "decomposition"}
SUITE_NAMES = [*SUITES, *SUITE_ALIASES, "all"]


def run_suite(name: str) -> List[CheckResult]:
    name = SUITE_ALIASES.get(name, name)
    names = list(SUITES) if name == "all" else [name]
    results = []
    for suite in names:
        outcome = SUITES[suite]()
        failed = sum(not r.passed for r in outcome)
        logger.info(f"suite {suite}: {len(outcome) - failed}/{len(outcome)} passed")
        results.extend(
            CheckResult(f"{suite}/{r.name}", r.passed, r.margin, r.detail)
            for r in outcome
        )
    return results


def format_report(results: Sequence[CheckResult]) -> str:
    lines = []
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        detail = f"  ({r.detail})" if r.detail else ""
        lines.append(f"{mark}  {r.name}  margin={r.margin:.3e}{detail}")
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed} passed, {failed} failed")
    return "\n".join(lines)
