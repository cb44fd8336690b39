"""Binary on-disk containers.

Feature files (``.safv``) hold one matrix::

    magic   4 bytes  b"SAFV"
    version u32 LE   1
    rows    u32 LE
    cols    u32 LE
    flags   u32 LE   bit 0: values are post-rectifier (non-negative)
    payload rows*cols IEEE-754 binary32 LE, row-major

The payload length must be exactly ``rows*cols*4`` bytes.  This layout is
the interoperability contract with external feature extractors: a writer
needs only a struct pack and a raw float dump.

Bundle files (``.safb``) hold named float matrices plus a JSON metadata
header; they carry trained models and descriptor tables.  Unlike feature
files, bundle payloads may be float64 so learned projections round-trip
at full precision.
"""

from __future__ import annotations

import json
import os
import struct
from typing import Mapping

import numpy as np

from .errors import FeatureFileError
from .model import FeatureMatrix

MAGIC = b"SAFV"
VERSION = 1
FLAG_POST_RELU = 1

_HEADER = struct.Struct("<4sIIII")

BUNDLE_MAGIC = b"SAFB"
BUNDLE_VERSION = 1
_BUNDLE_HEADER = struct.Struct("<4sII")

_DTYPES = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8")}


def feature_bytes(matrix: FeatureMatrix) -> bytes:
    """Serialize a feature matrix to the canonical byte layout."""
    flags = FLAG_POST_RELU if matrix.post_relu else 0
    header = _HEADER.pack(MAGIC, VERSION, matrix.rows, matrix.cols, flags)
    payload = np.ascontiguousarray(matrix.values, dtype="<f4").tobytes()
    return header + payload


def parse_feature_bytes(buf: bytes, source: str = "<bytes>") -> FeatureMatrix:
    """Parse and validate the canonical byte layout."""
    if len(buf) < _HEADER.size:
        raise FeatureFileError(f"{source}: truncated header ({len(buf)} bytes)")
    magic, version, rows, cols, flags = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise FeatureFileError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FeatureFileError(f"{source}: unsupported version {version}")
    if rows < 1 or cols < 1:
        raise FeatureFileError(f"{source}: empty matrix ({rows}x{cols})")
    expected = rows * cols * 4
    actual = len(buf) - _HEADER.size
    if actual != expected:
        raise FeatureFileError(
            f"{source}: payload is {actual} bytes, needs exactly {expected} "
            f"for a {rows}x{cols} matrix"
        )
    values = np.frombuffer(buf, dtype="<f4", offset=_HEADER.size).reshape(rows, cols)
    if not np.isfinite(values).all():
        raise FeatureFileError(f"{source}: payload contains non-finite values")
    try:
        return FeatureMatrix(values, post_relu=bool(flags & FLAG_POST_RELU))
    except ValueError as exc:
        raise FeatureFileError(f"{source}: {exc}") from exc


def write_feature_file(path: str | os.PathLike, matrix: FeatureMatrix | np.ndarray) -> None:
    """Write a feature matrix; refuses non-finite values before touching disk."""
    if not isinstance(matrix, FeatureMatrix):
        matrix = FeatureMatrix(matrix)
    data = feature_bytes(matrix)
    with open(path, "wb") as fh:
        fh.write(data)


def read_feature_file(path: str | os.PathLike) -> FeatureMatrix:
    """Read and validate a feature file."""
    with open(path, "rb") as fh:
        buf = fh.read()
    return parse_feature_bytes(buf, source=os.fspath(path))


def write_bundle(
    path: str | os.PathLike,
    meta: Mapping,
    matrices: Mapping[str, np.ndarray],
) -> None:
    """Write named matrices with a JSON metadata header.

    Matrix dtypes are preserved as float32 or float64 (everything else is
    promoted to float64).  The metadata must be JSON-serializable; the key
    ``"matrices"`` is reserved.
    """
    meta = dict(meta)
    if "matrices" in meta:
        raise ValueError('metadata key "matrices" is reserved')
    index = []
    payloads = []
    for name, arr in matrices.items():
        mat = np.asarray(arr)
        if mat.dtype != np.float32:
            mat = np.asarray(mat, dtype=np.float64)
        mat = np.ascontiguousarray(np.atleast_2d(mat))
        if mat.ndim != 2:
            raise ValueError(f"matrix {name!r} must be 1-D or 2-D")
        code = "<f4" if mat.dtype == np.float32 else "<f8"
        index.append(
            {"name": str(name), "rows": mat.shape[0], "cols": mat.shape[1], "dtype": code}
        )
        payloads.append(mat.astype(code, copy=False).tobytes())
    meta["matrices"] = index
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_BUNDLE_HEADER.pack(BUNDLE_MAGIC, BUNDLE_VERSION, len(blob)))
        fh.write(blob)
        for payload in payloads:
            fh.write(payload)


def read_bundle(path: str | os.PathLike) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a bundle; returns (metadata, name -> matrix)."""
    source = os.fspath(path)
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _BUNDLE_HEADER.size:
        raise FeatureFileError(f"{source}: truncated bundle header")
    magic, version, meta_len = _BUNDLE_HEADER.unpack_from(buf)
    if magic != BUNDLE_MAGIC:
        raise FeatureFileError(f"{source}: bad magic {magic!r}, expected {BUNDLE_MAGIC!r}")
    if version != BUNDLE_VERSION:
        raise FeatureFileError(f"{source}: unsupported bundle version {version}")
    offset = _BUNDLE_HEADER.size
    if len(buf) < offset + meta_len:
        raise FeatureFileError(f"{source}: truncated metadata")
    try:
        meta = json.loads(buf[offset : offset + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FeatureFileError(f"{source}: bad metadata: {exc}") from exc
    offset += meta_len

    matrices: dict[str, np.ndarray] = {}
    for entry in meta.get("matrices", []):
        name, rows, cols = entry["name"], int(entry["rows"]), int(entry["cols"])
        dtype = _DTYPES.get(entry["dtype"])
        if dtype is None:
            raise FeatureFileError(f"{source}: unknown dtype {entry['dtype']!r}")
        nbytes = rows * cols * dtype.itemsize
        if len(buf) < offset + nbytes:
            raise FeatureFileError(f"{source}: truncated payload for matrix {name!r}")
        matrices[name] = np.frombuffer(buf, dtype=dtype, count=rows * cols, offset=offset).reshape(
            rows, cols
        )
        offset += nbytes
    if offset != len(buf):
        raise FeatureFileError(f"{source}: {len(buf) - offset} trailing bytes")
    return meta, matrices
