"""JSON/CSV file formats shared by the command line and the library.

Angles are radians written with full double precision (``json`` emits the
shortest repr that round-trips).  Infinite values are written as the string
``"inf"`` because JSON has no infinity literal.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from .measurement import AxisSet
from .polarization import QuditDim
from .reconstruct import DensityMatrix, MeasurementRecord, ReconstructionEstimate

__all__ = [
    "FormatError",
    "encode_float",
    "decode_float",
    "axes_to_json",
    "axes_from_json",
    "record_to_json",
    "record_from_json",
    "density_to_json",
    "density_from_json",
    "dumps",
    "write_json",
    "read_json",
    "write_csv",
    "sha256_of",
]


class FormatError(ValueError):
    """A file does not follow the expected schema."""


def encode_float(x: float):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def decode_float(x) -> float:
    if isinstance(x, str):
        if x in ("inf", "-inf", "nan"):
            return float(x)
        raise FormatError(f"unexpected string {x!r} where a number was expected")
    return float(x)


def axes_to_json(axes: AxisSet) -> dict:
    return {"dim": axes.dim.d, "axes": [[a.alpha, a.beta] for a in axes]}


def _axes_list(obj, dim) -> AxisSet:
    try:
        pairs = [(float(a), float(b)) for a, b in obj]
    except (TypeError, ValueError) as exc:
        raise FormatError("axes must be a list of [alpha, beta] pairs") from exc
    if not pairs:
        raise FormatError("axis list is empty")
    return AxisSet(dim, pairs)


def axes_from_json(obj: dict) -> AxisSet:
    try:
        return _axes_list(obj["axes"], QuditDim(int(obj["dim"])))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed axis file: {exc}") from exc


def record_to_json(record: MeasurementRecord) -> dict:
    return {
        "dim": record.axis_set.dim.d,
        "shots": int(record.shots),
        "axes": [[a.alpha, a.beta] for a in record.axis_set],
        "counts": record.counts.tolist(),
    }


def record_from_json(obj: dict) -> MeasurementRecord:
    try:
        dim = QuditDim(int(obj["dim"]))
        axes = _axes_list(obj["axes"], dim)
        return MeasurementRecord(axes, int(obj["shots"]), np.array(obj["counts"], dtype=np.int64))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed measurement record: {exc}") from exc


def density_to_json(rho) -> dict:
    m = rho.matrix if isinstance(rho, ReconstructionEstimate) else np.asarray(rho)
    return {"dim": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def density_from_json(obj: dict, which: str = "mle", physical: bool = True):
    """Parse a state file; reconstruction files are read through their ``which`` entry."""
    try:
        if "re" not in obj and which in obj:
            obj = obj[which]
        m = np.array(obj["re"], dtype=float) + 1j * np.array(obj["im"], dtype=float)
        dim = QuditDim(int(obj["dim"]))
        if m.shape != (dim.d, dim.d):
            raise FormatError(f"state matrix has shape {m.shape}, expected {(dim.d, dim.d)}")
        if physical:
            return DensityMatrix(dim, m)
        return ReconstructionEstimate(dim, m)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed state file: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc


def write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def sha256_of(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
