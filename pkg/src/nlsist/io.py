"""Field and spectral-data persistence.

Binary field layout (little endian): the 8-byte magic ``NLSIST1\\0``, then
x_min and x_max as float64, n_points as uint64, then n_points interleaved
(re, im) float64 pairs. CSV fields have an ``x,re,im`` header and 17
significant digits, enough to round-trip doubles exactly.
"""
from __future__ import annotations

import csv
import io as _io
import json
import struct
from pathlib import Path

import numpy as np

from .core import ComplexField1D, InputError, NlsistError, RealGrid, SpectralData

MAGIC = b"NLSIST1\x00"
_HEADER = struct.Struct("<8sddQ")


class ParseError(NlsistError):
    def __init__(self, message: str, offset: int | None = None):
        where = f" (byte offset {offset})" if offset is not None else ""
        super().__init__(message + where)
        self.offset = offset


def encode_field(f: ComplexField1D) -> bytes:
    g = f.grid
    body = np.empty(2 * g.n_points, dtype="<f8")
    body[0::2] = f.values.real
    body[1::2] = f.values.imag
    return _HEADER.pack(MAGIC, g.x_min, g.x_max, g.n_points) + body.tobytes()


def decode_field(blob: bytes) -> ComplexField1D:
    if len(blob) < _HEADER.size:
        raise ParseError(f"truncated header: {len(blob)} of {_HEADER.size} bytes", len(blob))
    magic, x_min, x_max, n = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise ParseError(f"bad magic {magic!r}", 0)
    expected = _HEADER.size + 16 * n
    if len(blob) != expected:
        raise ParseError(
            f"header declares {n} points ({expected} bytes) but the file has {len(blob)} bytes",
            min(len(blob), expected),
        )
    try:
        grid = RealGrid(x_min, x_max, n)
    except InputError as exc:
        raise ParseError(f"invalid grid header: {exc}", 8) from exc
    body = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
    values = body[0::2] + 1j * body[1::2]
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise ParseError(f"non-finite sample at index {bad[0]}", _HEADER.size + 16 * int(bad[0]))
    return ComplexField1D(grid, values)


def _csv_text(f: ComplexField1D) -> str:
    out = _io.StringIO()
    out.write("x,re,im\n")
    for x, v in zip(f.grid.nodes, f.values):
        out.write(f"{x:.17g},{v.real:.17g},{v.imag:.17g}\n")
    return out.getvalue()


def _parse_csv(text: str) -> ComplexField1D:
    offset = 0
    rows = []
    for k, line in enumerate(text.splitlines(keepends=True)):
        stripped = line.strip()
        if k == 0:
            if [c.strip() for c in stripped.split(",")] != ["x", "re", "im"]:
                raise ParseError("CSV header must be 'x,re,im'", 0)
        elif stripped:
            parts = next(csv.reader([stripped]))
            if len(parts) != 3:
                raise ParseError(f"expected 3 columns on line {k + 1}", offset)
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise ParseError(f"bad number on line {k + 1}: {exc}", offset) from exc
        offset += len(line.encode())
    if len(rows) < 2:
        raise ParseError("CSV field needs at least two rows", offset)
    arr = np.array(rows)
    grid = RealGrid(arr[0, 0], arr[-1, 0], len(arr))
    if not np.allclose(arr[:, 0], grid.nodes, rtol=0, atol=1e-9 * max(1.0, abs(grid.x_max), abs(grid.x_min))):
        raise ParseError("x column is not a uniform grid", None)
    return ComplexField1D(grid, arr[:, 1] + 1j * arr[:, 2])


def _is_csv(path: Path, fmt: str | None) -> bool:
    if fmt is not None:
        if fmt not in ("csv", "binary"):
            raise InputError(f"unknown field format {fmt!r}")
        return fmt == "csv"
    return path.suffix.lower() == ".csv"


def save_field(path, f: ComplexField1D, fmt: str | None = None):
    path = Path(path)
    if _is_csv(path, fmt):
        path.write_text(_csv_text(f))
    else:
        path.write_bytes(encode_field(f))


def load_field(path, fmt: str | None = None) -> ComplexField1D:
    path = Path(path)
    if _is_csv(path, fmt):
        return _parse_csv(path.read_text())
    return decode_field(path.read_bytes())


def grid_to_json(g: RealGrid) -> dict:
    return {"x_min": g.x_min, "x_max": g.x_max, "n_points": g.n_points}


def grid_from_json(d: dict) -> RealGrid:
    try:
        return RealGrid(float(d["x_min"]), float(d["x_max"]), int(d["n_points"]))
    except (KeyError, TypeError) as exc:
        raise InputError(f"grid needs x_min, x_max, n_points: {exc}") from exc


def spectral_to_json(data: SpectralData) -> dict:
    return {
        "z_grid": grid_to_json(data.z_grid),
        "r_re": data.r_values.real.tolist(),
        "r_im": data.r_values.imag.tolist(),
        "discrete": [{"z_re": z.real, "z_im": z.imag, "c_re": c.real, "c_im": c.imag} for z, c in data.discrete],
    }


def spectral_from_json(d: dict) -> SpectralData:
    try:
        r = np.asarray(d["r_re"], dtype=float) + 1j * np.asarray(d["r_im"], dtype=float)
        pairs = tuple(
            (complex(p["z_re"], p["z_im"]), complex(p["c_re"], p["c_im"])) for p in d.get("discrete", [])
        )
        return SpectralData(grid_from_json(d["z_grid"]), r, pairs)
    except KeyError as exc:
        raise InputError(f"spectral data JSON missing {exc}") from exc


def save_spectral(path, data: SpectralData):
    Path(path).write_text(json.dumps(spectral_to_json(data)))


def load_spectral(path) -> SpectralData:
    return spectral_from_json(json.loads(Path(path).read_text()))
