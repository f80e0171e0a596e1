"""
Experiment configuration: JSON documents validated with pydantic.

An ExperimentConfig lists one game, one feedback model and several solvers;
`expand_runs` turns it into RunConfig units, one per (solver, seed).
"""

import json
import logging
import os
import re
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from pydantic import model_validator

from .algorithms import (
    ConstantSchedule,
    NoisyTheorySchedule,
    Schedule,
    SolverKind,
    tsigma_full,
    tsigma_noisy,
)
from .errors import ConfigError
from .feedback import Gaussian, NoiseModel, NoNoise
from .games import GameSpec, build_cournot, build_hard_game, build_random_payoff

logger = logging.getLogger(__name__)

MetricName = Literal[
    "gap",
    "tangent",
    "dynamic_regret",
    "external_regret",
    "potential",
    "stationary_distance",
]
DEFAULT_DIMS = {"random": 50, "hard": 100}


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GameConfig(StrictModel):
    family: Literal["random", "hard", "cournot"]
    dim: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)
    n_firms: Optional[int] = Field(default=None, ge=1)
    a: Optional[float] = Field(default=None, gt=0)
    b: Optional[float] = Field(default=None, gt=0)
    costs: Optional[List[float]] = None
    caps: Optional[List[float]] = None

    @model_validator(mode="after")
    def check_family(self):
        if self.family == "cournot":
            missing = [
                name
                for name in ("n_firms", "a", "b", "costs", "caps")
                if getattr(self, name) is None
            ]
            if missing:
                raise ValueError(f"cournot game needs {', '.join(missing)}")
            if len(self.costs) != self.n_firms or len(self.caps) != self.n_firms:
                raise ValueError("costs and caps need one entry per firm")
        elif self.family == "hard" and self.dim is not None and self.dim < 2:
            raise ValueError("hard game needs dim >= 2")
        return self

    def build(self, run_seed: int) -> GameSpec:
        if self.family == "random":
            seed = self.seed if self.seed is not None else run_seed
            return build_random_payoff(self.dim or DEFAULT_DIMS["random"], seed)
        if self.family == "hard":
            return build_hard_game(self.dim or DEFAULT_DIMS["hard"])
        return build_cournot(self.n_firms, self.a, self.b, self.costs, self.caps)


class FeedbackConfig(StrictModel):
    kind: Literal["full", "gaussian"] = "full"
    sigma: float = Field(default=0.1, ge=0)

    def noise(self) -> NoiseModel:
        return NoNoise() if self.kind == "full" else Gaussian(self.sigma)

    @property
    def label(self) -> str:
        return "full" if self.kind == "full" else "noisy"


class ScheduleConfig(StrictModel):
    kind: Literal["constant", "noisy_theory"] = "constant"
    eta: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def check_eta(self):
        if self.kind == "constant" and self.eta is None:
            raise ValueError("constant schedule needs eta")
        if self.kind == "noisy_theory" and self.eta is not None:
            raise ValueError("noisy_theory schedule derives eta; do not set it")
        return self


class TSigmaConfig(StrictModel):
    kind: Literal["manual", "theory_full", "theory_noisy"] = "manual"
    value: Optional[int] = Field(default=None, ge=1)
    c: float = Field(default=1.0, ge=1)

    @model_validator(mode="after")
    def check_value(self):
        if self.kind == "manual" and self.value is None:
            raise ValueError("manual T_sigma needs value")
        if self.kind != "manual" and self.value is not None:
            raise ValueError(f"{self.kind} T_sigma is computed; do not set value")
        return self


class SolverConfig(StrictModel):
    kind: SolverKind
    schedule: ScheduleConfig
    T_sigma: Optional[TSigmaConfig] = None
    mu: Optional[float] = Field(default=None, gt=0)

    @field_validator("T_sigma", mode="before")
    @classmethod
    def shorthand_tsigma(cls, value: Any) -> Any:
        if isinstance(value, int) and not isinstance(value, bool):
            return {"kind": "manual", "value": value}
        return value

    @model_validator(mode="after")
    def check_solver(self):
        if self.kind.anchored:
            if self.mu is None or self.T_sigma is None:
                raise ValueError(f"{self.kind.value} needs both mu and T_sigma")
        elif self.mu is not None or self.T_sigma is not None:
            raise ValueError(f"{self.kind.value} does not take mu or T_sigma")
        if self.schedule.kind == "noisy_theory" and not self.kind.anchored:
            raise ValueError("noisy_theory schedule is only defined for gabp/apga")
        if (
            self.T_sigma is not None
            and self.T_sigma.kind == "theory_full"
            and self.schedule.kind != "constant"
        ):
            raise ValueError("theory_full T_sigma needs a constant schedule")
        return self

    def build_schedule(self, game: GameSpec) -> Schedule:
        if self.schedule.kind == "constant":
            return ConstantSchedule(self.schedule.eta)
        return NoisyTheorySchedule(self.mu, game.lipschitz_L)

    def resolve_tsigma(self, T: int, game: GameSpec) -> Optional[int]:
        spec = self.T_sigma
        if spec is None:
            return None
        if spec.kind == "manual":
            return spec.value
        if spec.kind == "theory_noisy":
            return tsigma_noisy(max(T, 1), spec.c)
        schedule = ConstantSchedule(self.schedule.eta)
        if not schedule.within_theory(self.mu, game.lipschitz_L):
            logger.warning(
                f"eta={schedule.eta} is outside the constant-rate range "
                f"(0, {schedule.theory_limit(self.mu, game.lipschitz_L):.4g})"
            )
        value = tsigma_full(max(T, 1), self.schedule.eta, self.mu, spec.c)
        if value > T:
            logger.warning(f"theory T_sigma={value} exceeds T={T}: a single epoch")
        return value


class GridConfig(StrictModel):
    eta: Optional[List[float]] = None
    mu: Optional[List[float]] = None
    T_sigma: Optional[List[int]] = None
    c: Optional[List[float]] = None

    def axes(self) -> Dict[str, List[Union[int, float]]]:
        return {
            name: values
            for name, values in self.model_dump().items()
            if values is not None
        }


class ExperimentConfig(StrictModel):
    name: str = "experiment"
    game: GameConfig
    feedback: FeedbackConfig = FeedbackConfig()
    T: int = Field(ge=0)
    seeds: List[int] = Field(min_length=1)
    record_every: Optional[int] = Field(default=None, ge=1)
    metrics: List[MetricName] = ["gap", "tangent"]
    out_dir: str = "out"
    solvers: List[SolverConfig] = Field(min_length=1)
    grid: Optional[GridConfig] = None
    max_cells: int = Field(default=256, ge=1)
    check_feasibility: bool = False

    @field_validator("seeds")
    @classmethod
    def non_negative_seeds(cls, seeds: List[int]) -> List[int]:
        if any(s < 0 for s in seeds):
            raise ValueError("seeds must be non-negative")
        return seeds

    @property
    def resolved_record_every(self) -> int:
        if self.record_every is not None:
            return self.record_every
        return max(1, self.T // 1000)


class RunConfig(StrictModel):
    """One (solver, seed) unit of an experiment."""

    experiment: str
    game: GameConfig
    feedback: FeedbackConfig
    solver: SolverConfig
    seed: int
    T: int
    record_every: int
    metrics: List[MetricName]
    check_feasibility: bool = False
    run_index: int = 0

    @property
    def stem(self) -> str:
        parts = (self.game.family, self.solver.kind.value, self.feedback.label)
        return "_".join(parts) + f"_{self.seed}"


def expand_runs(config: ExperimentConfig) -> List[RunConfig]:
    return [
        RunConfig(
            experiment=config.name,
            game=config.game,
            feedback=config.feedback,
            solver=solver,
            seed=seed,
            T=config.T,
            record_every=config.resolved_record_every,
            metrics=config.metrics,
            check_feasibility=config.check_feasibility,
            run_index=0,
        )
        for solver in config.solvers
        for seed in config.seeds
    ]


_WHITESPACE = re.compile(r"\s*")
_DECODER = json.JSONDecoder()


def _skip(text: str, pos: int) -> int:
    return _WHITESPACE.match(text, pos).end()


def _member(text: str, pos: int, key: str) -> Optional[Tuple[int, int]]:
    """(key offset, value offset) of `key` in the object opening at pos."""
    pos = _skip(text, pos + 1)
    while pos < len(text) and text[pos] == '"':
        start = pos
        name, pos = _DECODER.raw_decode(text, pos)
        pos = _skip(text, _skip(text, pos) + 1)
        if name == key:
            return start, pos
        _, pos = _DECODER.raw_decode(text, pos)
        pos = _skip(text, pos)
        if text.startswith(",", pos):
            pos = _skip(text, pos + 1)
    return None


def _element(text: str, pos: int, index: int) -> Optional[int]:
    """Offset of element `index` in the array opening at pos."""
    pos = _skip(text, pos + 1)
    for _ in range(index):
        if text.startswith("]", pos):
            return None
        _, pos = _DECODER.raw_decode(text, pos)
        pos = _skip(text, pos)
        if not text.startswith(",", pos):
            return None
        pos = _skip(text, pos + 1)
    return None if text.startswith("]", pos) else pos


def _locate(text: str, loc: Sequence[Union[str, int]]) -> Optional[int]:
    """Line of the deepest part of a pydantic error location found in the text.

    Location parts that name no key (union tags, validator names) are skipped.
    """
    pos, found = _skip(text, 0), None
    try:
        for part in loc:
            if isinstance(part, int) and text.startswith("[", pos):
                element = _element(text, pos, part)
                if element is None:
                    break
                pos = found = element
            elif isinstance(part, str) and text.startswith("{", pos):
                member = _member(text, pos, part)
                if member is not None:
                    found, pos = member
    except (json.JSONDecodeError, IndexError):
        pass
    return None if found is None else text.count("\n", 0, found) + 1


def format_validation_error(source: str, text: str, error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        field = ".".join(str(part) for part in item["loc"]) or "<root>"
        line = _locate(text, item["loc"])
        where = f"{source}:{line}" if line else source
        lines.append(f"{where}: {field}: {item['msg']}")
    return "\n".join(lines)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}:{e.lineno}:{e.colno}: {e.msg}")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(format_validation_error(source, text, e))


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return parse_config(f.read(), str(path))


def default_workers() -> int:
    value = os.getenv("LASTITERATE_WORKERS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        raise ConfigError(f"LASTITERATE_WORKERS must be an integer, got {value!r}")
