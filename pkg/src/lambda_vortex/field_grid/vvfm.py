"""VVFM binary container and CSV export for grid maps.

Layout, all little-endian::

    4s   magic  b"VVFM"
    u16  format version
    u32  grid n
    f64  grid extent (waist units)
    f64  z
    u16  component count C
    u32  metadata length M
    M    metadata, UTF-8 JSON
    C * n * n * (f64 re, f64 im)   component-major, each component row-major
    u32  CRC32 of every preceding byte

Component names and dtypes travel in the metadata under ``"components"``
and ``"component_dtypes"``.
"""

from __future__ import annotations

import csv
import json
import struct
import zlib
from pathlib import Path

import numpy as np

from ..polarimetry import CLASS_CODES
from .maps import STOKES_FIELDS, AbsorptionMap, FieldMap, GridSpec, StokesMap

MAGIC = b"VVFM"
VERSION = 1
_HEAD = struct.Struct("<4sHIddHI")
_CRC = struct.Struct("<I")


class VVFMError(ValueError):
    pass


class VVFMFormatError(VVFMError):
    pass


class VVFMVersionError(VVFMError):
    pass


class VVFMTruncatedError(VVFMError):
    pass


class VVFMChecksumError(VVFMError):
    pass


def encode_map(m) -> bytes:
    comps = m.components()
    names = list(comps)
    dtypes = [np.asarray(a).dtype.str for a in comps.values()]
    meta = dict(m.metadata)
    meta["components"] = names
    meta["component_dtypes"] = dtypes
    meta_bytes = json.dumps(meta, sort_keys=True, allow_nan=True).encode("utf-8")
    n = m.grid.n
    payload = np.empty((len(names), n, n, 2), dtype="<f8")
    for k, arr in enumerate(comps.values()):
        arr = np.asarray(arr)
        if arr.shape != (n, n):
            raise ValueError(f"component {names[k]} has shape {arr.shape}, expected {(n, n)}")
        if np.iscomplexobj(arr):
            payload[k, ..., 0] = arr.real
            payload[k, ..., 1] = arr.imag
        else:
            payload[k, ..., 0] = arr
            payload[k, ..., 1] = 0.0
    head = _HEAD.pack(MAGIC, VERSION, n, m.grid.extent, m.z, len(names), len(meta_bytes))
    body = head + meta_bytes + payload.tobytes()
    return body + _CRC.pack(zlib.crc32(body))


def write_map(path, m) -> Path:
    path = Path(path)
    path.write_bytes(encode_map(m))
    return path


def decode_map(data: bytes):
    if len(data) < 4 or data[:4] != MAGIC:
        raise VVFMFormatError("not a VVFM file (bad magic)")
    if len(data) < _HEAD.size:
        raise VVFMTruncatedError("file ends inside the header")
    _, version, n, extent, z, count, meta_len = _HEAD.unpack_from(data)
    if version != VERSION:
        raise VVFMVersionError(f"unsupported VVFM version {version} (reader supports {VERSION})")
    payload_len = count * n * n * 16
    expected = _HEAD.size + meta_len + payload_len + _CRC.size
    if len(data) < expected:
        raise VVFMTruncatedError(f"file has {len(data)} bytes, header implies {expected}")
    if len(data) > expected:
        raise VVFMFormatError(f"{len(data) - expected} unexpected trailing bytes")
    body = data[: expected - _CRC.size]
    (crc,) = _CRC.unpack_from(data, expected - _CRC.size)
    if zlib.crc32(body) != crc:
        raise VVFMChecksumError("CRC32 mismatch")

    meta = json.loads(body[_HEAD.size : _HEAD.size + meta_len].decode("utf-8"))
    raw = np.frombuffer(body, dtype="<f8", offset=_HEAD.size + meta_len).reshape(count, n, n, 2)
    names = meta.pop("components")
    dtypes = meta.pop("component_dtypes")
    comps = {}
    for k, (name, dt) in enumerate(zip(names, dtypes)):
        dt = np.dtype(dt)
        if dt.kind == "c":
            arr = np.empty((n, n), dtype=complex)
            arr.real = raw[k, ..., 0]
            arr.imag = raw[k, ..., 1]
        else:
            arr = raw[k, ..., 0].astype(dt)
        comps[name] = arr

    grid = GridSpec(n, extent)
    kind = meta.get("kind")
    if kind == "field":
        return FieldMap(grid, z, comps["omega_R"], comps["omega_L"], meta)
    if kind == "absorption":
        return AbsorptionMap(grid, z, comps["chi_R"], comps["chi_L"], meta)
    if kind == "stokes":
        return StokesMap(grid, z, *(comps[f] for f in STOKES_FIELDS), metadata=meta)
    raise VVFMFormatError(f"unknown map kind {kind!r}")


def read_map(path):
    return decode_map(Path(path).read_bytes())


def _fmt(v) -> str:
    return format(float(v), ".17g")


def write_csv(path, m) -> Path:
    """One row per pixel: x, y (physical units) then the map's columns."""
    path = Path(path)
    waist = float(m.metadata.get("beam", {}).get("waist", 1.0))
    X, Y = m.grid.mesh(waist)
    columns: list[tuple[str, np.ndarray]] = []
    if isinstance(m, StokesMap):
        for name in ("s0", "s1", "s2", "s3", "zeta", "xi"):
            columns.append((name, getattr(m, name)))
    else:
        for name, arr in m.components().items():
            columns.append((f"{name}_re", arr.real))
            columns.append((f"{name}_im", arr.imag))
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        header = ["x", "y"] + [c for c, _ in columns]
        if isinstance(m, StokesMap):
            header.append("class")
        w.writerow(header)
        flat = [a.ravel() for _, a in columns]
        xs, ys = X.ravel(), Y.ravel()
        cls = m.cls.ravel() if isinstance(m, StokesMap) else None
        for i in range(xs.size):
            row = [_fmt(xs[i]), _fmt(ys[i])] + [_fmt(a[i]) for a in flat]
            if cls is not None:
                row.append(CLASS_CODES[int(cls[i])].value)
            w.writerow(row)
    return path
