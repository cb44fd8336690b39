"""Frame index selection: linearly spaced or seeded random subsets.

Indices are 1-based throughout, matching how frame positions are counted
in video tooling.  Random selection is pinned to a documented generator
(numpy PCG64) and a documented subset algorithm (partial Fisher-Yates)
so that identical ``(total, n, seed)`` inputs reproduce identical
selections anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FrameSelection:
    """An ordered pick of frame indices for one video."""

    indices: tuple[int, ...]
    mode: str
    seed: int | None = None

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise ValueError("frame selection is empty")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("frame indices must be strictly increasing")
        if idx[0] < 1:
            raise ValueError("frame indices are 1-based")
        if self.mode not in ("linear", "random"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def linspace_indices(total: int, n: int) -> FrameSelection:
    """Select ``n`` frames linearly spaced over ``1..total``.

    For ``n > 1`` the j-th index is ``round(1 + (j-1)*(total-1)/(n-1))``
    with half-up rounding, so the first and last frames are always
    included.  ``n == 1`` picks the center frame.  Rounding cannot
    collapse neighbours when ``n <= total``, but strict increase is
    enforced defensively by bumping ties to the next free index.
    """
    if n < 1:
        raise ValueError("frame count must be at least 1")
    if n > total:
        raise ValueError(f"cannot select {n} frames from a {total}-frame video")
    if n == 1:
        return FrameSelection((_round_half_up((1 + total) / 2.0),), mode="linear")
    step = (total - 1) / (n - 1)
    indices: list[int] = []
    for j in range(n):
        idx = _round_half_up(1 + j * step)
        if indices and idx <= indices[-1]:
            idx = indices[-1] + 1
        indices.append(idx)
    assert indices[-1] <= total
    return FrameSelection(tuple(indices), mode="linear")


def random_indices(total: int, n: int, seed: int) -> FrameSelection:
    """Select ``n`` distinct frames uniformly at random, sorted ascending.

    Determinism contract: a PCG64 generator seeded with ``seed`` drives a
    partial Fisher-Yates shuffle of ``1..total`` (n swap steps, each using
    one bounded ``integers`` draw); the first ``n`` entries are the
    selection.  Identical ``(total, n, seed)`` always yield the same
    result.
    """
    if n < 1:
        raise ValueError("frame count must be at least 1")
    if n > total:
        raise ValueError(f"cannot select {n} frames from a {total}-frame video")
    rng = np.random.Generator(np.random.PCG64(seed))
    pool = np.arange(1, total + 1, dtype=np.int64)
    for i in range(n):
        j = int(rng.integers(i, total))
        pool[i], pool[j] = pool[j], pool[i]
    picked = np.sort(pool[:n])
    return FrameSelection(tuple(int(i) for i in picked), mode="random", seed=int(seed))
