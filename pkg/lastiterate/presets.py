"""
Tuned hyperparameter bundles for the two benchmark games under full and
noisy feedback.
"""

from typing import Any, Dict, List

from .config import ExperimentConfig
from .errors import ConfigError

NOISE_SIGMA = 0.1
DEFAULT_T = 100_000

# (eta, T_sigma, mu) per solver; None where the solver has no such parameter
TUNED = {
    "random_full": {
        "og": (0.05, None, None),
        "aog": (0.05, None, None),
        "apga": (0.05, 20, 1.0),
        "gabp": (0.05, 10, 1.0),
    },
    "random_noisy": {
        "og": (0.001, None, None),
        "aog": (0.001, None, None),
        "apga": (0.001, 2000, 1.0),
        "gabp": (0.001, 1000, 1.0),
    },
    "hard_full": {
        "og": (1.0, None, None),
        "aog": (1.0, None, None),
        "apga": (1.0, 20, 0.1),
        "gabp": (1.0, 20, 0.1),
    },
    "hard_noisy": {
        "og": (0.5, None, None),
        "aog": (0.5, None, None),
        "apga": (0.5, 50, 0.1),
        "gabp": (0.1, 100, 0.1),
    },
}


def _solvers(name: str) -> List[Dict[str, Any]]:
    entries = []
    for kind, (eta, t_sigma, mu) in TUNED[name].items():
        entry: Dict[str, Any] = {
            "kind": kind,
            "schedule": {"kind": "constant", "eta": eta},
        }
        if t_sigma is not None:
            entry["T_sigma"] = {"kind": "manual", "value": t_sigma}
            entry["mu"] = mu
        entries.append(entry)
    return entries


def preset_document(name: str) -> Dict[str, Any]:
    if name not in TUNED:
        raise ConfigError(f"unknown preset '{name}'; choose from {', '.join(TUNED)}")
    family, feedback = name.split("_")
    random_game = family == "random"
    document: Dict[str, Any] = {
        "name": name,
        "game": {"family": family, "dim": 50 if random_game else 100},
        "feedback": (
            {"kind": "full"}
            if feedback == "full"
            else {"kind": "gaussian", "sigma": NOISE_SIGMA}
        ),
        "T": DEFAULT_T,
        "seeds": list(range(50 if random_game else 10)),
        "metrics": ["gap", "tangent"] if random_game else ["gap", "dynamic_regret"],
        "out_dir": f"out/{name}",
        "solvers": _solvers(name),
    }
    return document


def preset(name: str) -> ExperimentConfig:
    return ExperimentConfig.model_validate(preset_document(name))
