"""File formats: point sets, measures, fields, partitions, reports.

Readers dispatch on the file extension (.csv / .json) and report parse
problems with the offending line or atom index.  Writers emit floats with
17 significant digits so every value round-trips to the identical double,
and the JSON writer is fully deterministic: keys are sorted and the float
format is fixed, so equal payloads produce byte-identical files.
"""

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .geom import Partition
from .harmonic import FieldExpansion, HarmonicField, make_field
from .measures import DiscreteSignedMeasure

__all__ = [
    "format_float",
    "json_dumps",
    "write_report_json",
    "file_digest",
    "read_points",
    "write_points_csv",
    "write_points_json",
    "read_measure",
    "write_measure_csv",
    "read_field",
    "write_field_json",
    "partition_payload",
    "write_partition_json",
    "write_profile_csv",
    "write_expansion_csv",
]


def format_float(x: float) -> str:
    """17-significant-digit decimal form; round-trips any finite double."""
    if math.isnan(x):
        raise ValueError("cannot serialize NaN")
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".17g")


def json_dumps(obj) -> str:
    """Deterministic JSON: sorted keys, fixed float format, no whitespace drift."""
    pieces = []
    _append_json(obj, pieces)
    return "".join(pieces)


def _append_json(obj, out: list):
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            out.append('"inf"' if x > 0 else '"-inf"')
        else:
            out.append(format_float(x))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _append_json(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _append_json(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


def write_report_json(path, payload: dict) -> None:
    Path(path).write_text(json_dumps(payload) + "\n")


def file_digest(path) -> str:
    """Hex SHA-256 of the file contents."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _parse_error(path, line_no: int, message: str) -> ValueError:
    return ValueError(f"{path}, line {line_no}: {message}")


def _csv_rows(path, expected_columns=None):
    """Numeric rows of a CSV file, skipping blank and '#' comment lines.

    Yields (line_number, list-of-floats); enforces a consistent column
    count (the first data row fixes it unless ``expected_columns`` does).
    """
    width = expected_columns
    with open(path) as handle:
        for line_no, raw in enumerate(handle, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
            try:
                row = [float(p) for p in parts]
            except ValueError:
                raise _parse_error(path, line_no, f"non-numeric entry in {text!r}")
            if width is None:
                width = len(row)
            if len(row) != width:
                raise _parse_error(
                    path, line_no, f"expected {width} columns, found {len(row)}"
                )
            yield line_no, row


def _csv_header_dim(path) -> int | None:
    with open(path) as handle:
        first = handle.readline().strip()
    if first.startswith("#") and "d=" in first:
        try:
            return int(first.split("d=")[1].split()[0])
        except ValueError:
            raise _parse_error(path, 1, f"malformed dimension header {first!r}")
    return None


def read_points(path) -> np.ndarray:
    """Point rows from a CSV (d+1 columns) or JSON {"d":…, "points":…} file."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        points = np.asarray(doc["points"], dtype=float)
        if points.ndim != 2:
            raise ValueError(f"{path}: points must be a list of coordinate rows")
        d = int(doc.get("d", points.shape[1] - 1))
        if points.shape[1] != d + 1:
            raise ValueError(
                f"{path}: declared d={d} but rows have {points.shape[1]} "
                f"coordinates"
            )
        return points
    rows = [row for _, row in _csv_rows(path)]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    points = np.asarray(rows, dtype=float)
    d = _csv_header_dim(path)
    if d is not None and points.shape[1] != d + 1:
        raise ValueError(
            f"{path}: header says d={d} but rows have {points.shape[1]} columns"
        )
    return points


def write_points_csv(path, points, dim: int | None = None) -> None:
    points = np.asarray(points, dtype=float)
    lines = []
    if dim is not None:
        lines.append(f"# d={dim}")
    for row in points:
        lines.append(",".join(format_float(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_points_json(path, points, dim: int) -> None:
    points = np.asarray(points, dtype=float)
    write_report_json(path, {"d": dim, "points": points})


def read_measure(path) -> DiscreteSignedMeasure:
    """Signed atomic measure from CSV rows x_0,…,x_d,weight or JSON."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        points = np.asarray(doc["points"], dtype=float)
        weights = np.asarray(doc["weights"], dtype=float)
        return DiscreteSignedMeasure(points, weights, label=str(path))
    rows = [row for _, row in _csv_rows(path)]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    table = np.asarray(rows, dtype=float)
    if table.shape[1] < 4:
        raise ValueError(
            f"{path}: measure rows need at least 4 columns "
            f"(x_0,…,x_d,weight), found {table.shape[1]}"
        )
    return DiscreteSignedMeasure(table[:, :-1], table[:, -1], label=str(path))


def write_measure_csv(path, measure) -> None:
    """Write a signed or quadrature measure as CSV rows x_0,…,x_d,weight."""
    support = measure.points if hasattr(measure, "points") else measure.nodes
    lines = [f"# d={measure.dim}"]
    for point, weight in zip(support, measure.weights):
        coords = ",".join(format_float(x) for x in point)
        lines.append(f"{coords},{format_float(weight)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_field(path) -> HarmonicField:
    """Charge list from JSON {"charges": [{"location": […], "strength": w}]}."""
    path = Path(path)
    doc = json.loads(path.read_text())
    if "charges" not in doc:
        raise ValueError(f"{path}: missing 'charges' key")
    charges = []
    for i, entry in enumerate(doc["charges"]):
        try:
            location = np.asarray(entry["location"], dtype=float)
            strength = float(entry["strength"])
        except (KeyError, TypeError, ValueError):
            raise ValueError(
                f"{path}: charge {i} needs a numeric 'location' list and a "
                f"'strength'"
            )
        charges.append((location, strength))
    dim = doc.get("d")
    if not charges and dim is None:
        raise ValueError(f"{path}: empty charge list requires an explicit 'd'")
    return make_field(charges, dim=int(dim) if dim is not None else None)


def write_field_json(path, field: HarmonicField) -> None:
    payload = {
        "d": field.dim,
        "charges": [
            {"location": loc, "strength": s}
            for loc, s in zip(field.locations, field.strengths)
        ],
    }
    write_report_json(path, payload)


def partition_payload(partition: Partition) -> dict:
    return {
        "d": partition.dim,
        "n": partition.size,
        "regions": [
            {
                "area": region.area,
                "diameter": region.diameter,
                "representative": region.representative,
            }
            for region in partition.regions
        ],
    }


def write_partition_json(path, partition: Partition) -> None:
    write_report_json(path, partition_payload(partition))


def write_profile_csv(path, values) -> None:
    lines = ["node_index,value"]
    for i, v in enumerate(np.asarray(values, dtype=float)):
        lines.append(f"{i},{format_float(v)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_expansion_csv(path, expansion: FieldExpansion) -> None:
    lines = ["charge_index,l,coefficient"]
    for k, zonal in enumerate(expansion.zonal):
        for l, c in enumerate(zonal.coeffs):
            lines.append(f"{k},{l},{format_float(c)}")
    Path(path).write_text("\n".join(lines) + "\n")
