"""
Result writers for batch runs.

CSV holds one row per receiver with Re/Im of every component; JSON carries the
same records plus the convergence diagnostics and timings. Numbers are written
with repr-precision so identical runs produce identical bytes.
"""

import csv
import io
import json
import math
from pathlib import Path

from src.core.runner import BatchResult, ReceiverResult
from src.solver.results import COMPONENTS, FieldResult
from src.utils.logger import get_logger

logger = get_logger("output")


def _number(value: float | None) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return repr(float(value))


def _apply_convention(fields: FieldResult | None, convention: str) -> FieldResult | None:
    if fields is None or convention == "minus":
        return fields
    return fields.conjugated()


def magnitude(fields: FieldResult, name: str) -> float:
    """|X| for a component, or the vector norm for 'E' / 'H'."""
    if name == "E":
        return float(math.sqrt(sum(abs(v) ** 2 for v in fields.E)))
    if name == "H":
        return float(math.sqrt(sum(abs(v) ** 2 for v in fields.H)))
    return abs(fields.component(name))


def phase_deg(fields: FieldResult, name: str) -> float:
    value = fields.component(name)
    return math.degrees(math.atan2(value.imag, value.real))


def csv_header(batch: BatchResult) -> list[str]:
    out = batch.scenario.output
    header = ["index", "rho", "phi_deg", "z"]
    for name in COMPONENTS:
        header += [f"{name}_re", f"{name}_im"]
    header += [f"abs_{out.magnitude_component}", f"arg_{out.phase_component}_deg"]
    if out.reference == "analytic" and batch.mode == "solve":
        header.append(f"rel_err_db_{out.reference_component}")
    header += ["status", "error"]
    return header


def _csv_row(batch: BatchResult, receiver: ReceiverResult, convention: str) -> list[str]:
    out = batch.scenario.output
    rho, phi, z = receiver.position
    row = [str(receiver.index), _number(rho), _number(math.degrees(phi)), _number(z)]
    fields = _apply_convention(receiver.fields, convention)
    if fields is not None:
        for name in COMPONENTS:
            value = fields.component(name)
            row += [_number(value.real), _number(value.imag)]
        row += [
            _number(magnitude(fields, out.magnitude_component)),
            _number(phase_deg(fields, out.phase_component)),
        ]
    else:
        row += [""] * (2 * len(COMPONENTS) + 2)
    if out.reference == "analytic" and batch.mode == "solve":
        row.append(_number(receiver.relative_error_db(out.reference_component)))
    row += ["ok" if receiver.success else "failed", receiver.error or ""]
    return row


def render_csv(batch: BatchResult, convention: str | None = None) -> str:
    convention = convention or batch.scenario.output.convention
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(csv_header(batch))
    for receiver in batch.receivers:
        writer.writerow(_csv_row(batch, receiver, convention))
    return buffer.getvalue()


def _record(batch: BatchResult, receiver: ReceiverResult, convention: str) -> dict:
    out = batch.scenario.output
    rho, phi, z = receiver.position
    record: dict = {
        "index": receiver.index,
        "rho": rho,
        "phi_deg": math.degrees(phi),
        "z": z,
        "status": "ok" if receiver.success else "failed",
        "error": receiver.error,
        "error_type": receiver.error_type,
        "wall_time": receiver.wall_time,
    }
    fields = _apply_convention(receiver.fields, convention)
    if fields is not None:
        record["fields"] = {
            name: [fields.component(name).real, fields.component(name).imag] for name in COMPONENTS
        }
        record[f"abs_{out.magnitude_component}"] = magnitude(fields, out.magnitude_component)
        record[f"arg_{out.phase_component}_deg"] = phase_deg(fields, out.phase_component)
        if fields.diagnostics is not None:
            record["diagnostics"] = fields.diagnostics.to_dict()
    if out.reference == "analytic" and batch.mode == "solve":
        record[f"rel_err_db_{out.reference_component}"] = receiver.relative_error_db(
            out.reference_component
        )
    return record


def render_json(batch: BatchResult, convention: str | None = None) -> str:
    convention = convention or batch.scenario.output.convention
    document = {
        "scenario": batch.scenario.name,
        "mode": batch.mode,
        "convention": convention,
        "succeeded": len(batch.succeeded),
        "failed": len(batch.failed),
        "wall_time": batch.wall_time,
        "records": [_record(batch, r, convention) for r in batch.receivers],
    }
    return json.dumps(document, indent=2, allow_nan=True)


def write_results(
    batch: BatchResult, path: Path | None, fmt: str | None = None, convention: str | None = None
) -> str:
    """
    Render a batch and write it to `path` (stdout handling is the caller's).

    Returns:
        The rendered text
    """
    fmt = fmt or batch.scenario.output.format
    if fmt == "csv":
        text = render_csv(batch, convention)
    elif fmt == "json":
        text = render_json(batch, convention)
    else:
        raise ValueError(f"unknown output format '{fmt}'")
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        logger.info("results_written", path=str(path), format=fmt, records=len(batch.receivers))
    return text
