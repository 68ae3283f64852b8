"""File formats: geometry JSON, binary matrix dumps, spectrum CSV/JSON."""
from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path

import numpy as np

from .discretize import DIAGONAL_LIMIT, ROW_SUM, OperatorMatrix
from .exceptions import InvalidArgumentError
from .geometry import (BoundaryGeometry, RegularityClass, make_circle, make_ellipse,
                       make_lacunary_sphere, make_perturbed_sphere, make_weierstrass_curve)
from .kernels import COMPOSED, NP, NP_STAR, KernelIdentity
from .spectral import Spectrum

__all__ = [
    "geometry_from_spec",
    "save_geometry",
    "load_geometry",
    "dump_matrix",
    "load_matrix",
    "write_spectrum",
    "write_json",
    "write_rows",
    "format_float",
]

MAGIC = b"NPMX"
_HEADER = struct.Struct("<4sIII")  # magic, N, flags, reserved
_KERNEL_CODES = {NP_STAR: 0, NP: 1, COMPOSED: 2}
SPECTRUM_COLUMNS = ("j", "re_lambda", "im_lambda", "abs_lambda", "s_j")
GEOMETRY_TYPES = ("circle", "ellipse", "weierstrass", "perturbed_sphere", "lacunary_sphere")


def _regularity(spec) -> RegularityClass:
    reg = spec.get("regularity") or {}
    k = reg.get("k")
    return RegularityClass(math.inf if k is None else k, reg.get("alpha", 1.0))


def geometry_from_spec(spec: dict) -> BoundaryGeometry:
    """Build a geometry from its JSON document (see :meth:`BoundaryGeometry.to_spec`)."""
    kind = spec.get("type")
    params = spec.get("parameters") or {}
    if kind == "circle":
        geom = make_circle(params.get("radius", 1.0))
    elif kind == "ellipse":
        geom = make_ellipse(params["a"], params["b"])
    elif kind == "weierstrass":
        geom = make_weierstrass_curve(_regularity(spec), spec["levels"], spec.get("amplitude", 0.1),
                                      spec.get("base", 2), spec.get("phases"),
                                      spec.get("description"))
    elif kind == "lacunary_sphere":
        geom = make_lacunary_sphere(_regularity(spec), spec["levels"], spec.get("amplitude", 0.1),
                                    spec.get("base", 2))
    elif kind == "perturbed_sphere":
        reg = _regularity(spec)
        geom = make_perturbed_sphere([tuple(c) for c in params.get("coeffs", [])],
                                     spec.get("description"), reg)
    else:
        raise InvalidArgumentError(f"unknown geometry type {kind!r}")
    if spec.get("description") and kind in ("circle", "ellipse"):
        object.__setattr__(geom, "description", spec["description"])
    return geom


def save_geometry(geom: BoundaryGeometry, path) -> None:
    Path(path).write_text(json.dumps(geom.to_spec(), indent=2) + "\n")


def load_geometry(path) -> BoundaryGeometry:
    return geometry_from_spec(json.loads(Path(path).read_text()))


def _flags(matrix: OperatorMatrix) -> int:
    ident = matrix.identity
    flags = _KERNEL_CODES[ident.which]
    flags |= (matrix.diagonal_rule == DIAGONAL_LIMIT) << 2
    flags |= (ident.d == 2) << 3
    flags |= (ident.n & 0xFF) << 8
    return flags


def dump_matrix(matrix: OperatorMatrix, path) -> None:
    """``NPMX`` header (16 bytes) then row-major little-endian float64 entries."""
    n = matrix.size
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n, _flags(matrix), 0))
        fh.write(np.ascontiguousarray(matrix.entries, dtype="<f8").tobytes())


def load_matrix(path) -> tuple:
    """Returns ``(entries, identity, rule)``."""
    raw = Path(path).read_bytes()
    magic, n, flags, _ = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise InvalidArgumentError(f"{path}: not an NPMX matrix dump")
    body = raw[_HEADER.size:]
    if len(body) != 8 * n * n:
        raise InvalidArgumentError(f"{path}: expected {n}x{n} entries, found {len(body) // 8}")
    entries = np.frombuffer(body, dtype="<f8").reshape(n, n).copy()
    which = {v: k for k, v in _KERNEL_CODES.items()}[flags & 0b11]
    identity = KernelIdentity(which, 2 if flags & 0b1000 else 1, max((flags >> 8) & 0xFF, 1))
    rule = DIAGONAL_LIMIT if flags & 0b100 else ROW_SUM
    return entries, identity, rule


def format_float(x) -> str:
    return format(float(x), ".15g")


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, (int, str)) else format_float(v) for v in row])


def write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n")


def write_spectrum(spec: Spectrum, csv_path, metadata: dict | None = None) -> Path:
    """Spectrum CSV plus a JSON sidecar next to it (same stem, ``.json``)."""
    lam = spec.eigenvalues
    s = spec.singular_values
    n = max(len(lam), len(s))
    rows = []
    for j in range(n):
        z = lam[j] if j < len(lam) else complex("nan")
        rows.append((j + 1, z.real, z.imag, abs(z), s[j] if j < len(s) else float("nan")))
    write_rows(csv_path, SPECTRUM_COLUMNS, rows)
    side = Path(csv_path).with_suffix(".json")
    meta = {k: v for k, v in spec.source.items()}
    meta.update(metadata or {})
    meta.update(j_resolved=spec.j_resolved, n_values=n)
    write_json(side, meta)
    return side
