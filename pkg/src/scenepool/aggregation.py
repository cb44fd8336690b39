"""Temporal pooling of per-frame features into orderless statistics.

Every statistic is computed per feature dimension across frames, always
with the population convention (divide by the frame count, no bias
correction):

* mean        mu_j    = (1/M) sum_i X_ij
* sd          sigma_j = sqrt((1/M) sum_i (X_ij - mu_j)^2)
* skew        gamma_j = (1/M) sum_i (X_ij - mu_j)^3 / sigma_j^3
* kurt        kappa_j = (1/M) sum_i (X_ij - mu_j)^4 / sigma_j^4   (no -3)
* max         m_j     = max_i X_ij

Where sigma_j is exactly zero, skewness and kurtosis are defined as zero
so constant feature curves stay finite and uninformative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InsufficientFramesError
from .model import STAT_MEASURES, FeatureMatrix, VideoDescriptor, descriptor_concat, measure_rank

BLOCK_NORMS = ("per_block", "global", "none")

_HIGHER_MOMENTS = ("skew", "kurt")


class MomentAccumulator:
    """Streaming per-dimension accumulator for mean/sd/skew/kurt/max.

    One pass over rows, using shifted central-moment updates: central
    sums are tracked relative to the running mean rather than as raw
    power sums, which stays accurate for non-negative inputs with large
    means.  Feed rows with :meth:`add`; read any statistic afterwards.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dimension must be at least 1")
        self._dim = int(dim)
        self._n = 0
        self._mean = np.zeros(dim)
        self._m2 = np.zeros(dim)
        self._m3 = np.zeros(dim)
        self._m4 = np.zeros(dim)
        self._max = np.full(dim, -np.inf)

    @property
    def count(self) -> int:
        return self._n

    @property
    def dim(self) -> int:
        return self._dim

    def add(self, row: Sequence[float]) -> None:
        x = np.asarray(row, dtype=np.float64)
        if x.shape != (self._dim,):
            raise ValueError(f"expected a length-{self._dim} row, got shape {x.shape}")
        if not np.isfinite(x).all():
            raise ValueError("row contains non-finite values")
        self._n += 1
        n = self._n
        delta = x - self._mean
        delta_n = delta / n
        delta_n2 = delta_n * delta_n
        term1 = delta * delta_n * (n - 1)
        self._mean += delta_n
        self._m4 += (
            term1 * delta_n2 * (n * n - 3 * n + 3)
            + 6.0 * delta_n2 * self._m2
            - 4.0 * delta_n * self._m3
        )
        self._m3 += term1 * delta_n * (n - 2) - 3.0 * delta_n * self._m2
        self._m2 += term1
        np.maximum(self._max, x, out=self._max)

    def add_rows(self, rows: np.ndarray) -> None:
        mat = np.asarray(rows, dtype=np.float64)
        if mat.ndim != 2:
            raise ValueError("expected a 2-D array of rows")
        for row in mat:
            self.add(row)

    def _require(self, minimum: int, what: str) -> None:
        if self._n < minimum:
            raise InsufficientFramesError(
                f"insufficient frames for {what}: have {self._n}, need {minimum}"
            )

    def mean(self) -> np.ndarray:
        self._require(1, "mean")
        return self._mean.copy()

    def sd(self) -> np.ndarray:
        self._require(1, "standard deviation")
        return np.sqrt(self._m2 / self._n)

    def skew(self) -> np.ndarray:
        self._require(2, "higher moments")
        out = np.zeros(self._dim)
        nz = self._m2 > 0.0
        m2 = self._m2[nz] / self._n
        m3 = self._m3[nz] / self._n
        out[nz] = m3 / m2**1.5
        return out

    def kurt(self) -> np.ndarray:
        self._require(2, "higher moments")
        out = np.zeros(self._dim)
        nz = self._m2 > 0.0
        m2 = self._m2[nz] / self._n
        m4 = self._m4[nz] / self._n
        out[nz] = m4 / (m2 * m2)
        return out

    def max(self) -> np.ndarray:
        self._require(1, "max")
        return self._max.copy()

    def get(self, measure: str) -> np.ndarray:
        if measure not in STAT_MEASURES:
            raise ValueError(f"unknown measure {measure!r}; expected one of {STAT_MEASURES}")
        return getattr(self, measure)()


def _as_float_matrix(x: FeatureMatrix | np.ndarray) -> np.ndarray:
    if isinstance(x, FeatureMatrix):
        return np.asarray(x.values, dtype=np.float64)
    mat = np.asarray(x, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {mat.shape}")
    if not np.isfinite(mat).all():
        raise ValueError("matrix contains non-finite values")
    return mat


def _sorted_accumulator(mat: np.ndarray) -> MomentAccumulator:
    # Column-sort first: each dimension's values are reduced in a canonical
    # order, so any row permutation of the input yields bit-identical
    # statistics.
    acc = MomentAccumulator(mat.shape[1])
    acc.add_rows(np.sort(mat, axis=0))
    return acc


def aggregate(x: FeatureMatrix | np.ndarray, measure: str) -> np.ndarray:
    """Collapse a frame matrix into one per-dimension statistic vector.

    Exactly permutation invariant in the frame order.  Skewness and
    kurtosis require at least two frames.
    """
    mat = _as_float_matrix(x)
    if measure not in STAT_MEASURES:
        raise ValueError(f"unknown measure {measure!r}; expected one of {STAT_MEASURES}")
    if measure in _HIGHER_MOMENTS and mat.shape[0] < 2:
        raise InsufficientFramesError("insufficient frames for higher moments")
    if measure == "max":
        return mat.max(axis=0)
    return _sorted_accumulator(mat).get(measure)


@dataclass(frozen=True)
class MomentSet:
    """All five statistics of one frame matrix, computed in a single pass."""

    mean: np.ndarray
    sd: np.ndarray
    skew: np.ndarray
    kurt: np.ndarray
    max: np.ndarray
    m: int

    def __post_init__(self):
        vecs = (self.mean, self.sd, self.skew, self.kurt, self.max)
        dim = self.mean.shape[0]
        for v in vecs:
            if v.shape != (dim,) or not np.isfinite(v).all():
                raise ValueError("moment vectors must be finite and equal length")
        if self.m < 2:
            raise ValueError("moment sets require at least two frames")
        if (self.sd < 0).any():
            raise ValueError("standard deviation must be non-negative")
        if (self.max < self.mean - 1e-9 * np.maximum(1.0, np.abs(self.mean))).any():
            raise ValueError("max must dominate mean")
        nz = self.sd > 0
        if (self.kurt[nz] + 1e-8 < self.skew[nz] ** 2 + 1.0).any():
            raise ValueError("kurtosis below skewness^2 + 1")

    @classmethod
    def from_matrix(cls, x: FeatureMatrix | np.ndarray) -> "MomentSet":
        mat = _as_float_matrix(x)
        if mat.shape[0] < 2:
            raise InsufficientFramesError("insufficient frames for higher moments")
        acc = _sorted_accumulator(mat)
        return cls(
            mean=acc.mean(),
            sd=acc.sd(),
            skew=acc.skew(),
            kurt=acc.kurt(),
            max=mat.max(axis=0),
            m=mat.shape[0],
        )


def l2_normalize(vec: np.ndarray) -> np.ndarray:
    """Scale to unit Euclidean norm; an all-zero vector stays zero."""
    v = np.asarray(vec, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return v.copy()
    return v / norm


def canonical_measures(measures: Iterable[str]) -> tuple[str, ...]:
    """Validate and order a measure subset canonically; duplicates are errors."""
    items = [str(m) for m in measures]
    if not items:
        raise ValueError("measure list is empty")
    if len(set(items)) != len(items):
        raise ValueError(f"duplicate measures in {items}")
    for m in items:
        measure_rank(m)
    return tuple(sorted(items, key=measure_rank))


def aggregate_combo(
    x: FeatureMatrix | np.ndarray,
    measures: Iterable[str],
    block_norm: str = "per_block",
) -> VideoDescriptor:
    """Compute several statistics and concatenate them into one descriptor.

    ``block_norm`` selects the normalization: ``per_block`` scales each
    measure's vector to unit norm independently (the default, keeping
    blocks with very different magnitudes comparable), ``global`` scales
    the concatenated vector once, ``none`` leaves raw values.
    """
    ordered = canonical_measures(measures)
    for m in ordered:
        if m not in STAT_MEASURES:
            raise ValueError(
                f"measure {m!r} is not a frame statistic; encode it separately"
            )
    if block_norm not in BLOCK_NORMS:
        raise ValueError(f"unknown block_norm {block_norm!r}; expected one of {BLOCK_NORMS}")

    mat = _as_float_matrix(x)
    if any(m in _HIGHER_MOMENTS for m in ordered) and mat.shape[0] < 2:
        raise InsufficientFramesError("insufficient frames for higher moments")

    acc = None
    blocks: list[tuple[str, np.ndarray]] = []
    for m in ordered:
        if m == "max":
            vec = mat.max(axis=0)
        else:
            if acc is None:
                acc = _sorted_accumulator(mat)
            vec = acc.get(m)
        if block_norm == "per_block":
            vec = l2_normalize(vec)
        blocks.append((m, vec))

    if block_norm == "global":
        whole = l2_normalize(np.concatenate([v for _, v in blocks]))
        offset = 0
        rescaled = []
        for name, vec in blocks:
            rescaled.append((name, whole[offset : offset + vec.size]))
            offset += vec.size
        blocks = rescaled
    return descriptor_concat(blocks)
