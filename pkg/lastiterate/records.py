"""
Per-iteration records and their CSV serialization.

Schema: metadata lines prefixed with '#', then a fixed header. Floats are
written with 17 significant digits; absent optional metrics are empty fields;
per-player values are joined with ';'.
"""

import csv
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, TextIO

RECORD_COLUMNS = [
    "t",
    "gradient_calls",
    "gap",
    "tangent_residual",
    "dyn_regret",
    "ext_regret",
    "potential",
    "dist_stationary",
    "eta_t",
    "k",
]

SUMMARY_COLUMNS = [
    "game",
    "solver",
    "feedback",
    "n_seeds",
    "final_gap_mean",
    "final_gap_se",
    "slope_fit",
    "wall_ms",
    "status",
]

OG_VARIANT = "single-call past-gradient: pi + eta*(2 g^t - g^{t-1}), g^0 = 0"
AOG_CALLS = "one observation per iteration plus one at pi^(1/2) := pi^1"


@dataclass
class RunRecord:
    t: int
    gradient_calls: int
    gap: float
    eta_t: float
    k: Optional[int] = None
    tangent_residual: Optional[float] = None
    dyn_regret: Optional[List[float]] = None
    ext_regret: Optional[List[float]] = None
    potential: Optional[float] = None
    dist_stationary: Optional[float] = None


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return format(value, ".17g")
    if isinstance(value, (list, tuple)):
        return ";".join(format_value(float(v)) for v in value)
    return str(value)


def record_row(record: RunRecord) -> List[str]:
    values = asdict(record)
    return [format_value(values[name]) for name in RECORD_COLUMNS]


def write_records(
    handle: TextIO, records: Iterable[RunRecord], metadata: Mapping[str, object]
) -> int:
    for key, value in metadata.items():
        handle.write(f"# {key}={value}\n")
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(RECORD_COLUMNS)
    count = 0
    for record in records:
        writer.writerow(record_row(record))
        count += 1
    return count


def _parse(name: str, text: str):
    if text == "":
        return None
    if name in ("t", "gradient_calls", "k"):
        return int(text)
    if name in ("dyn_regret", "ext_regret"):
        return [float(v) for v in text.split(";")]
    return float(text)


def read_records(path: Path) -> List[RunRecord]:
    with open(path, "r", encoding="utf-8") as f:
        lines = [line for line in f if not line.startswith("#")]
    reader = csv.DictReader(lines)
    known = {f.name for f in fields(RunRecord)}
    return [
        RunRecord(**{k: _parse(k, v) for k, v in row.items() if k in known})
        for row in reader
    ]


def write_table(path: Path, columns: Sequence[str], rows: Iterable[Dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(c)) for c in columns])
