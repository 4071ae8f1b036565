"""On-disk formats: binary fields, series/contour CSV, run manifests.

Field files (``.macf``) are a 24-byte little-endian header followed by the
raw float64 payload in ``(ix, iy, i, j)`` order::

    b"MACF" | u32 version=1 | u32 nx | u32 ny | u32 m1 | u32 m2 | f8[...]
"""
import csv
import json
import struct

import numpy as np

from .matfield import MatrixField

MAGIC = b"MACF"
VERSION = 1
_HEADER = struct.Struct("<4s5I")
HEADER_SIZE = _HEADER.size

SERIES_COLUMNS = ("step", "t", "sup_frob", "energy_total", "energy_grad", "energy_pot",
                  "alpha_min", "u31_sup")


class FieldFormatError(ValueError):
    pass


class BadMagicError(FieldFormatError):
    pass


class BadVersionError(FieldFormatError):
    pass


class TruncatedFieldError(FieldFormatError):
    pass


def write_field(field, path):
    data = field.data if isinstance(field, MatrixField) else np.asarray(field, float)
    if not np.all(np.isfinite(data)):
        raise ValueError("refusing to write a field with non-finite entries")
    nx, ny, m1, m2 = data.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, nx, ny, m1, m2))
        fh.write(np.ascontiguousarray(data, dtype="<f8").tobytes())


def read_field(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER_SIZE:
        if raw[:4] != MAGIC[:len(raw[:4])]:
            raise BadMagicError(f"{path}: not a MACF field file")
        raise TruncatedFieldError(f"{path}: header truncated ({len(raw)} of {HEADER_SIZE} bytes)")
    magic, version, nx, ny, m1, m2 = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise BadVersionError(f"{path}: unsupported version {version}")
    need = nx * ny * m1 * m2 * 8
    have = len(raw) - HEADER_SIZE
    if have < need:
        raise TruncatedFieldError(f"{path}: payload truncated ({have} of {need} bytes)")
    if have > need:
        raise FieldFormatError(f"{path}: {have - need} trailing bytes after payload")
    data = np.frombuffer(raw, dtype="<f8", offset=HEADER_SIZE).reshape(nx, ny, m1, m2)
    return MatrixField(data.astype(np.float64))


def write_series(records, path, stride=1):
    """Series CSV; the final record is always written regardless of stride."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SERIES_COLUMNS)
        last = len(records) - 1
        for n, rec in enumerate(records):
            if n % stride and n != last:
                continue
            w.writerow([rec.step, repr(rec.t), repr(rec.sup_frob), repr(rec.energy_total),
                        repr(rec.energy_grad), repr(rec.energy_pot), repr(rec.alpha_min),
                        "" if rec.u31_sup is None else repr(rec.u31_sup)])


def read_series(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows


def write_contours(polylines, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("polyline_id", "x", "y"))
        for pid, line in enumerate(polylines):
            for x, y in line:
                w.writerow((pid, repr(float(x)), repr(float(y))))


def write_manifest(meta, path):
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, float) and x != x:
        return None
    raise TypeError(f"cannot serialize {type(x).__name__}")
