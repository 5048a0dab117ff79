"""
Comparison metrics between two result files.

Two modes:
- db: per-point relative error 10 log10(|a - b| / |a|), `a` being the reference
- magdiff: per-point magnitude difference |X|_a - |X|_b
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from src.config.constants import DB_FLOOR
from src.solver.results import COMPONENTS
from src.utils.logger import get_logger

logger = get_logger("compare")

POSITION_TOLERANCE = 1e-9


class MismatchedGrids(ValueError):
    """The two files do not describe the same receiver set."""


@dataclass
class FieldRecord:
    """One receiver row read back from a result file."""

    index: int
    position: tuple[float, float, float]
    values: dict[str, complex]
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def magnitude(self, name: str) -> float:
        """|X| for a component name, or the vector norm for 'E' / 'H'."""
        if name in ("E", "H"):
            parts = [self.values[f"{name}_{axis}"] for axis in ("rho", "phi", "z")]
            return math.sqrt(sum(abs(v) ** 2 for v in parts))
        return abs(self.values[name])


@dataclass
class CompareReport:
    mode: str
    component: str
    per_point: list[float] = field(default_factory=list)
    positions: list[tuple[float, float, float]] = field(default_factory=list)

    @property
    def summary(self) -> dict[str, float]:
        values = np.asarray(self.per_point, dtype=float)
        finite = values[np.isfinite(values)]
        if finite.size == 0:
            return {"max": math.nan, "median": math.nan, "mean": math.nan, "count": 0}
        return {
            "max": float(np.max(finite)),
            "median": float(np.median(finite)),
            "mean": float(np.mean(finite)),
            "count": int(finite.size),
        }

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "component": self.component,
            "summary": self.summary,
            "points": [
                {"rho": p[0], "phi_deg": p[1], "z": p[2], "value": v}
                for p, v in zip(self.positions, self.per_point, strict=True)
            ],
        }


def relative_error_db(reference: complex, value: complex, floor: float = DB_FLOOR) -> float:
    """10 log10(|reference - value| / |reference|), floored for identical values."""
    scale = abs(reference)
    if scale == 0.0:
        return math.nan
    ratio = abs(reference - value) / scale
    if ratio == 0.0:
        return floor
    return max(10.0 * math.log10(ratio), floor)


def _parse_complex(re_text: str, im_text: str) -> complex:
    if re_text in ("", None) or im_text in ("", None):
        return complex(math.nan, math.nan)
    return complex(float(re_text), float(im_text))


def _load_csv(path: Path) -> list[FieldRecord]:
    records = []
    with path.open(newline="") as handle:
        for row in csv.DictReader(handle):
            records.append(
                FieldRecord(
                    index=int(row["index"]),
                    position=(float(row["rho"]), float(row["phi_deg"]), float(row["z"])),
                    values={
                        name: _parse_complex(row[f"{name}_re"], row[f"{name}_im"])
                        for name in COMPONENTS
                    },
                    status=row.get("status", "ok"),
                )
            )
    return records


def _load_json(path: Path) -> list[FieldRecord]:
    document = json.loads(path.read_text())
    records = []
    for row in document["records"]:
        fields = row.get("fields") or {}
        records.append(
            FieldRecord(
                index=int(row["index"]),
                position=(row["rho"], row["phi_deg"], row["z"]),
                values={
                    name: (
                        complex(*fields[name]) if name in fields else complex(math.nan, math.nan)
                    )
                    for name in COMPONENTS
                },
                status=row.get("status", "ok"),
            )
        )
    return records


def load_records(path: Path | str) -> list[FieldRecord]:
    """Read a result file written by `solve` or `oracle` (CSV or JSON by suffix)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return _load_json(path)
    return _load_csv(path)


def _check_grids(a: list[FieldRecord], b: list[FieldRecord]) -> None:
    if len(a) != len(b):
        raise MismatchedGrids(f"receiver counts differ: {len(a)} vs {len(b)}")
    for ra, rb in zip(a, b, strict=True):
        if not np.allclose(ra.position, rb.position, rtol=0.0, atol=POSITION_TOLERANCE):
            raise MismatchedGrids(
                f"receiver {ra.index} sits at {ra.position} in one file and {rb.position} in the other"
            )


def compare_records(
    reference: list[FieldRecord],
    result: list[FieldRecord],
    mode: str = "db",
    component: str | None = None,
) -> CompareReport:
    """
    Per-point metric between two matching receiver sets.

    Failed receivers (status != ok) in either file yield NaN and are left out
    of the summary.
    """
    _check_grids(reference, result)
    if mode == "db":
        component = component or "E_z"
        if component not in COMPONENTS:
            raise ValueError(f"db mode needs a single component, got '{component}'")
    elif mode == "magdiff":
        component = component or "H"
    else:
        raise ValueError(f"unknown compare mode '{mode}'")

    report = CompareReport(mode=mode, component=component)
    for ra, rb in zip(reference, result, strict=True):
        report.positions.append(ra.position)
        if not (ra.ok and rb.ok):
            report.per_point.append(math.nan)
            continue
        if mode == "db":
            report.per_point.append(
                relative_error_db(ra.values[component], rb.values[component])
            )
        else:
            report.per_point.append(ra.magnitude(component) - rb.magnitude(component))

    logger.info("compare_complete", mode=mode, component=component, **report.summary)
    return report


def compare_files(
    path_a: Path | str, path_b: Path | str, mode: str = "db", component: str | None = None
) -> CompareReport:
    return compare_records(load_records(path_a), load_records(path_b), mode, component)
