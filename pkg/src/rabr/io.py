"""Snapshot files, CSV tables and run manifests.

Snapshot layout (all little-endian):

    b"RABR"  u32 version  u32 n_fields
    per field: u32 name_len, name (utf-8), u8 kind, u32 ndim, u64 dims[ndim], payload
    u32 CRC32 of everything after the 12-byte header

kind 0 is float64 data, kind 1 complex data stored as (re, im) float64
pairs, kind 2 is a utf-8 JSON blob (dims = [n_bytes]).
"""

from __future__ import annotations

import csv
import json
import math
import struct
import zlib
from pathlib import Path

import numpy as np

from .model import FieldState1D

MAGIC = b"RABR"
VERSION = 1
KIND_REAL, KIND_COMPLEX, KIND_JSON = 0, 1, 2


class SnapshotFormatError(ValueError):
    pass


class DimensionError(SnapshotFormatError):
    pass


def _state_fields(state) -> list[tuple[str, object]]:
    names = ["zeta"]
    if hasattr(state, "x"):
        names.append("x")
    names += list(state.COMPLEX_FIELDS) + ["inv"]
    fields = [(n, getattr(state, n)) for n in names]
    fields.append(("tau", np.array(float(state.tau))))
    fields.append(("__meta__", json.dumps(state.meta, sort_keys=True, default=float)))
    return fields


def encode_snapshot(state) -> bytes:
    body = bytearray()
    fields = _state_fields(state)
    for name, value in fields:
        raw = name.encode("utf-8")
        body += struct.pack("<I", len(raw)) + raw
        if isinstance(value, str):
            blob = value.encode("utf-8")
            body += struct.pack("<BI", KIND_JSON, 1) + struct.pack("<Q", len(blob)) + blob
            continue
        arr = np.asarray(value)
        kind = KIND_COMPLEX if np.iscomplexobj(arr) else KIND_REAL
        body += struct.pack("<BI", kind, arr.ndim)
        body += struct.pack(f"<{arr.ndim}Q", *arr.shape)
        if kind == KIND_COMPLEX:
            arr = np.ascontiguousarray(arr, dtype="<c16").view("<f8")
        body += np.ascontiguousarray(arr, dtype="<f8").tobytes()
    header = MAGIC + struct.pack("<II", VERSION, len(fields))
    return header + bytes(body) + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


def decode_snapshot(data: bytes) -> dict:
    if len(data) < 16 or data[:4] != MAGIC:
        raise SnapshotFormatError("not a snapshot file (bad magic)")
    version, n_fields = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {version}")
    body = data[12:-4]
    (crc,) = struct.unpack("<I", data[-4:])
    if zlib.crc32(body) & 0xFFFFFFFF != crc:
        raise SnapshotFormatError("checksum mismatch (truncated or corrupted file)")
    out = {}
    pos = 0
    try:
        for _ in range(n_fields):
            (nlen,) = struct.unpack_from("<I", body, pos)
            pos += 4
            name = bytes(body[pos:pos + nlen]).decode("utf-8")
            pos += nlen
            kind, ndim = struct.unpack_from("<BI", body, pos)
            pos += 5
            dims = struct.unpack_from(f"<{ndim}Q", body, pos)
            pos += 8 * ndim
            if kind == KIND_JSON:
                blob = bytes(body[pos:pos + dims[0]])
                pos += dims[0]
                out[name] = json.loads(blob.decode("utf-8"))
                continue
            count = math.prod(dims) * (2 if kind == KIND_COMPLEX else 1)
            if pos + 8 * count > len(body):
                raise SnapshotFormatError(f"field {name!r} is truncated")
            arr = np.frombuffer(body, dtype="<f8", count=count, offset=pos).copy()
            pos += 8 * count
            if kind == KIND_COMPLEX:
                arr = arr.view(np.complex128)
            elif kind != KIND_REAL:
                raise SnapshotFormatError(f"unknown field kind {kind}")
            out[name] = arr.reshape(dims)
    except struct.error as exc:
        raise SnapshotFormatError(f"truncated snapshot: {exc}") from None
    if pos != len(body):
        raise SnapshotFormatError("trailing bytes after the last field")
    return out


def export_snapshot(state, path) -> Path:
    path = Path(path)
    path.write_bytes(encode_snapshot(state))
    return path


def import_snapshot(path, expect_shape: tuple | None = None):
    """Read a 1D or 2D field state; ``expect_shape`` rejects snapshots from another grid."""
    fields = decode_snapshot(Path(path).read_bytes())
    meta = fields.pop("__meta__", {})
    tau = float(fields.pop("tau"))
    shape = fields["sigma_plus"].shape
    if expect_shape is not None and tuple(expect_shape) != tuple(shape):
        raise DimensionError(f"snapshot grid {shape} does not match expected {tuple(expect_shape)}")
    args = {n: fields[n] for n in FieldState1D.COMPLEX_FIELDS + ("inv",)}
    if "x" in fields:
        from .propagate2d import FieldState2D
        return FieldState2D(fields["zeta"], fields["x"], tau=tau, meta=meta, **args)
    return FieldState1D(fields["zeta"], tau=tau, meta=meta, **args)


def fmt(value) -> str:
    """Fixed 17-significant-digit formatting so reruns are byte-identical."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_manifest(path, manifest: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path
