"""Readers for the versioned training CSV formats.

Curve files:  "# macrorts-curves v1 nodes=..." + header row + data rows.
Eval files:   "# macrorts-eval v1" + header row + one row per difficulty.
A wrong or missing schema line raises SchemaError.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

CURVES_MAGIC = "# macrorts-curves v1"
EVAL_MAGIC = "# macrorts-eval v1"


class SchemaError(ValueError):
    pass


@dataclass
class Series:
    label: str
    iterations: list[int]
    win_rates: list[float]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.iterations, self.iterations[1:])):
            raise SchemaError(f"{self.label}: iterations must be strictly increasing")
        if any(not 0 <= w <= 1 for w in self.win_rates):
            raise SchemaError(f"{self.label}: win rates must lie in [0, 1]")


def _read_rows(path: str, magic: str) -> list[dict]:
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith(magic):
            raise SchemaError(f"{path}: expected '{magic}', got {first[:60]!r}")
        return list(csv.DictReader(fh))


def load_curves(path: str, label: str | None = None) -> list[Series]:
    """One series per stage in the file (single-stage files yield one)."""
    rows = _read_rows(path, CURVES_MAGIC)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    base = label or path.rsplit("/", 1)[-1].removesuffix(".csv")
    by_stage: dict[str, list[dict]] = {}
    for row in rows:
        by_stage.setdefault(row.get("stage", "0"), []).append(row)
    series = []
    for stage, stage_rows in sorted(by_stage.items(), key=lambda kv: int(kv[0])):
        name = base if len(by_stage) == 1 else f"{base}/stage{stage}"
        series.append(Series(name,
                             [int(r["iteration"]) for r in stage_rows],
                             [float(r["win_rate"]) for r in stage_rows]))
    return series


@dataclass
class EvalRow:
    level: int
    win_rate: float
    tie_rate: float
    loss_rate: float


def load_eval(path: str, expected_levels=range(1, 11)) -> list[EvalRow]:
    rows = _read_rows(path, EVAL_MAGIC)
    if not rows:
        raise SchemaError(f"{path}: no evaluation rows")
    out = [EvalRow(int(r["level"]), float(r["win_rate"]), float(r["tie_rate"]),
                   float(r["loss_rate"])) for r in rows]
    present = {r.level for r in out}
    missing = [lv for lv in expected_levels if lv not in present]
    if missing:
        warnings.warn(f"{path}: missing difficulty rows {missing}", stacklevel=2)
    return out
