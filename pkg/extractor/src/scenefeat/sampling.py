"""Frame-index selection, byte-for-byte the pooling side's rule.

Indices are 1-based.  For n > 1 the j-th index is
round(1 + (j-1)*(total-1)/(n-1)) with half-up rounding; n == 1 picks the
center frame round((1+total)/2).  The shared vector file at the
repository root pins this contract for both packages.
"""

from __future__ import annotations

import math


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def linspace_indices(total: int, n: int) -> list[int]:
    if n < 1:
        raise ValueError("frame count must be at least 1")
    if n > total:
        raise ValueError(f"cannot select {n} frames from a {total}-frame video")
    if n == 1:
        return [_round_half_up((1 + total) / 2.0)]
    step = (total - 1) / (n - 1)
    out: list[int] = []
    for j in range(n):
        idx = _round_half_up(1 + j * step)
        if out and idx <= out[-1]:
            idx = out[-1] + 1
        out.append(idx)
    return out
