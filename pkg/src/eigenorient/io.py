"""File formats.

* Matrices: CSV, one matrix row per line, floats written with ``repr`` so they
  round-trip exactly.
* Series: a directory holding numbered basis CSVs plus ``manifest.json``
  (dimension, method, timestamps, eigenvalues, file names).
* Reports: JSON with sorted keys.

Every file is written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ParseError

MANIFEST = "manifest.json"
SERIES_FORMAT = "eigenorient-series/1"


def write_text_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_matrix(m) -> str:
    a = np.atleast_2d(np.asarray(m, dtype=np.float64))
    return "".join(",".join(repr(float(x)) for x in row) + "\n" for row in a)


def write_matrix_csv(path, m) -> None:
    write_text_atomic(path, format_matrix(m))


def _parse_float(text: str, path, line: int, column: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text.strip()!r}", path, line, column) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {text.strip()!r}", path, line, column)
    return value


def read_matrix_csv(path, allow_header: bool = False) -> np.ndarray:
    """Read a numeric CSV; errors carry 1-based line and column numbers.

    With ``allow_header`` a first line with no numeric field is skipped.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path) from None
    rows = []
    width = None
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        fields = raw.split(",")
        if allow_header and not rows and lineno == 1 and all(not _looks_numeric(f) for f in fields):
            continue
        row = [_parse_float(f, path, lineno, col) for col, f in enumerate(fields, start=1)]
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", path, lineno, min(len(row), width) + 1)
        rows.append(row)
    if not rows:
        raise ParseError("no data rows", path)
    return np.array(rows, dtype=np.float64)


def _looks_numeric(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    write_text_atomic(path, dumps_json(obj))


def read_json(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno, exc.colno) from None


@dataclass
class SeriesData:
    """Bases and eigenvalues as stored on disk, before any validation."""

    bases: list[np.ndarray]
    eigenvalues: list[np.ndarray]
    timestamps: list
    method: Optional[str] = None
    oriented: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.bases[0].shape[0]


def basis_name(i: int, prefix: str = "basis") -> str:
    return f"{prefix}_{i:04d}.csv"


def write_series(directory, bases, eigenvalues, timestamps=None, method=None, oriented=False, extra=None) -> dict:
    """Write bases as CSVs and a manifest; returns the manifest dict."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    bases = [np.asarray(b, dtype=np.float64) for b in bases]
    timestamps = list(range(len(bases))) if timestamps is None else list(timestamps)
    names = [basis_name(i) for i in range(len(bases))]
    for name, b in zip(names, bases):
        write_matrix_csv(directory / name, b)
    manifest = {
        "format": SERIES_FORMAT,
        "dim": int(bases[0].shape[0]) if bases else 0,
        "method": None if method is None else str(getattr(method, "value", method)),
        "oriented": bool(oriented),
        "timestamps": timestamps,
        "eigenvalues": [[float(x) for x in e] for e in eigenvalues],
        "bases": names,
    }
    if extra:
        manifest.update(extra)
    write_json(directory / MANIFEST, manifest)
    return manifest


def read_series(directory) -> SeriesData:
    directory = Path(directory)
    mpath = directory / MANIFEST
    manifest = read_json(mpath)
    if not isinstance(manifest, dict):
        raise ParseError("manifest must be a JSON object", mpath)
    for key in ("dim", "eigenvalues"):
        if key not in manifest:
            raise ParseError(f"manifest lacks {key!r}", mpath)
    dim = manifest["dim"]
    evals = manifest["eigenvalues"]
    if not isinstance(dim, int) or dim < 1 or not isinstance(evals, list):
        raise ParseError("manifest 'dim' must be a positive integer and 'eigenvalues' a list", mpath)
    names = manifest.get("bases") or [basis_name(i) for i in range(len(evals))]
    if len(names) != len(evals):
        raise ParseError(f"{len(names)} basis files but {len(evals)} eigenvalue rows", mpath)
    timestamps = manifest.get("timestamps") or list(range(len(names)))
    if len(timestamps) != len(names):
        raise ParseError("one timestamp per snapshot required", mpath)
    bases, eigenvalues = [], []
    for i, (name, e) in enumerate(zip(names, evals)):
        b = read_matrix_csv(directory / name)
        if b.shape != (dim, dim):
            raise ParseError(f"expected a {dim}x{dim} matrix, got {b.shape[0]}x{b.shape[1]}", directory / name)
        if not isinstance(e, list) or len(e) != dim or not all(isinstance(x, (int, float)) for x in e):
            raise ParseError(f"eigenvalue row {i} must hold {dim} numbers", mpath)
        bases.append(b)
        eigenvalues.append(np.array(e, dtype=np.float64))
    known = {"format", "dim", "method", "oriented", "timestamps", "eigenvalues", "bases"}
    return SeriesData(
        bases=bases,
        eigenvalues=eigenvalues,
        timestamps=list(timestamps),
        method=manifest.get("method"),
        oriented=bool(manifest.get("oriented", False)),
        extra={k: v for k, v in manifest.items() if k not in known},
    )
