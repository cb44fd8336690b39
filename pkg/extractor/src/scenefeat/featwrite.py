"""Writer for the pooling side's feature-file layout.

Layout: magic ``SAFV``, u32 version (1), u32 rows, u32 cols, u32 flags
(bit 0 marks post-rectifier non-negative values), then rows*cols IEEE-754
binary32 little-endian values, row-major.
"""

from __future__ import annotations

import os
import struct

import numpy as np

_HEADER = struct.Struct("<4sIIII")
FLAG_POST_RELU = 1


def write_feature_file(path: str | os.PathLike, values: np.ndarray, post_relu: bool) -> None:
    mat = np.ascontiguousarray(values, dtype="<f4")
    if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {mat.shape}")
    if not np.isfinite(mat).all():
        raise ValueError("refusing to write non-finite activations")
    if post_relu:
        assert float(mat.min()) >= 0.0, "post-rectifier activations must be non-negative"
    flags = FLAG_POST_RELU if post_relu else 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(b"SAFV", 1, mat.shape[0], mat.shape[1], flags))
        fh.write(mat.tobytes())
