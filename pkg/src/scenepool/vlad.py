"""Vectorial pooling: PCA whitening, k-means++ codebooks, residual encoding.

The encoding pipeline reduces frame vectors with a stored whitening
projection, hard-assigns each reduced vector to its nearest codebook
center, accumulates the residuals per center, and concatenates the sums
into one ``k * d_prime`` vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficiencyError
from .model import FeatureMatrix


@dataclass(frozen=True)
class PcaModel:
    """Whitening projection: x -> diag(1/scales) @ components @ (x - mean).

    ``components`` rows are orthonormal principal directions; ``scales``
    are square roots of the matching eigenvalues, floored to avoid division
    blow-up on near-null directions.
    """

    mean: np.ndarray
    components: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        mean = np.ascontiguousarray(self.mean, dtype=np.float64)
        comp = np.ascontiguousarray(self.components, dtype=np.float64)
        scales = np.ascontiguousarray(self.scales, dtype=np.float64)
        if comp.ndim != 2 or mean.ndim != 1 or scales.ndim != 1:
            raise ValueError("bad projection shapes")
        d_prime, d = comp.shape
        if mean.shape != (d,) or scales.shape != (d_prime,):
            raise ValueError("projection fields disagree on dimensions")
        if (scales <= 0).any():
            raise ValueError("whitening scales must be positive")
        gram = comp @ comp.T
        if not np.allclose(gram, np.eye(d_prime), atol=1e-8):
            raise ValueError("projection rows are not orthonormal")
        for arr in (mean, comp, scales):
            arr.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "components", comp)
        object.__setattr__(self, "scales", scales)

    @property
    def d_prime(self) -> int:
        return int(self.components.shape[0])

    @property
    def d(self) -> int:
        return int(self.components.shape[1])

    def transform(self, x: np.ndarray) -> np.ndarray:
        """Project a vector or a matrix of row vectors."""
        arr = np.asarray(x, dtype=np.float64)
        if arr.ndim == 1:
            if arr.shape[0] != self.d:
                raise ValueError(f"expected a length-{self.d} vector, got {arr.shape}")
            return (self.components @ (arr - self.mean)) / self.scales
        if arr.ndim == 2:
            if arr.shape[1] != self.d:
                raise ValueError(f"expected {self.d} columns, got {arr.shape}")
            return ((arr - self.mean) @ self.components.T) / self.scales
        raise ValueError("expected a 1-D or 2-D array")


@dataclass(frozen=True)
class Codebook:
    """Learned cluster centers plus the final within-cluster sum of squares."""

    centers: np.ndarray
    inertia: float
    inertia_history: tuple[float, ...] = ()

    def __post_init__(self):
        centers = np.ascontiguousarray(self.centers, dtype=np.float64)
        if centers.ndim != 2 or centers.shape[0] < 2:
            raise ValueError("codebook needs at least two centers")
        if not np.isfinite(centers).all():
            raise ValueError("codebook centers contain non-finite values")
        if len(np.unique(centers, axis=0)) != centers.shape[0]:
            raise ValueError("codebook centers must be pairwise distinct")
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "inertia_history", tuple(float(v) for v in self.inertia_history))

    @property
    def k(self) -> int:
        return int(self.centers.shape[0])

    @property
    def d_prime(self) -> int:
        return int(self.centers.shape[1])


@dataclass(frozen=True)
class VladCode:
    """Concatenated residual sums, optionally power- and L2-normalized."""

    values: np.ndarray
    normalized: bool

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or not np.isfinite(vals).all():
            raise ValueError("code must be a finite 1-D vector")
        if self.normalized:
            norm = float(np.linalg.norm(vals))
            if norm != 0.0 and abs(norm - 1.0) > 1e-9:
                raise ValueError(f"code marked normalized but has norm {norm!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def fit_pca(samples: np.ndarray, d_prime: int) -> PcaModel:
    """Fit a whitening projection to stacked sample vectors.

    Components are the top ``d_prime`` principal directions of the
    mean-centered samples (population covariance).  Scales are square
    roots of the eigenvalues, floored at ``1e-8 * largest_eigenvalue``.
    Errors out when the data rank cannot support ``d_prime`` directions.
    """
    data = np.asarray(samples, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("samples must be a 2-D array")
    n, d = data.shape
    if not np.isfinite(data).all():
        raise ValueError("samples contain non-finite values")
    if d_prime < 1 or d_prime > d:
        raise ValueError(f"d_prime must be in 1..{d}, got {d_prime}")
    if n <= d_prime:
        raise ValueError(f"need more than {d_prime} samples, got {n}")

    mean = data.mean(axis=0)
    centered = data - mean
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    if svals.size == 0 or svals[0] == 0.0:
        rank = 0
    else:
        rank = int((svals > svals[0] * max(n, d) * np.finfo(np.float64).eps).sum())
    if rank < d_prime:
        raise RankDeficiencyError(
            f"data rank {rank} cannot support {d_prime} whitened directions"
        )

    eigvals = (svals[:d_prime] ** 2) / n
    components = vt[:d_prime].copy()
    # Deterministic sign: largest-magnitude entry of each direction is positive.
    for row in components:
        pivot = row[np.argmax(np.abs(row))]
        if pivot < 0:
            row *= -1.0
    scales = np.maximum(np.sqrt(eigvals), 1e-8 * eigvals[0])
    return PcaModel(mean=mean, components=components, scales=scales)


def project(model: PcaModel, x: np.ndarray) -> np.ndarray:
    """Whitened projection of one vector (see ``PcaModel.transform``)."""
    return model.transform(x)


def _nearest(points: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Exact squared distances via explicit differences; ties go to the
    # lowest center index through argmin's first-hit rule.
    diff = points[:, None, :] - centers[None, :, :]
    d2 = np.einsum("pkd,pkd->pk", diff, diff)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(points.shape[0]), labels]


def _seed_centers(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centers[0] = points[first]
    diff = points - centers[0]
    closest = np.einsum("nd,nd->n", diff, diff)
    for j in range(1, k):
        total = float(closest.sum())
        if total <= 0.0:
            raise ValueError(f"fewer than {k} distinct points; cannot seed {k} centers")
        r = rng.random() * total
        idx = int(np.searchsorted(np.cumsum(closest), r, side="right"))
        idx = min(idx, n - 1)
        centers[j] = points[idx]
        diff = points - centers[j]
        np.minimum(closest, np.einsum("nd,nd->n", diff, diff), out=closest)
    return centers


def kmeanspp_fit(
    points: np.ndarray,
    k: int,
    seed: int,
    max_iter: int = 100,
    rel_tol: float = 1e-4,
) -> Codebook:
    """Learn a codebook: k-means++ seeding followed by Lloyd iterations.

    Seeding draws each new center with probability proportional to the
    squared distance from the already-chosen ones.  Lloyd runs until the
    relative inertia improvement drops below ``rel_tol`` or ``max_iter``
    is reached.  A cluster that loses all points is re-seeded to the point
    currently farthest from its assigned center, which cannot increase
    inertia.  Fixed seeds reproduce bit-identical codebooks.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-D array")
    if not np.isfinite(pts).all():
        raise ValueError("points contain non-finite values")
    if k < 2:
        raise ValueError("codebooks need at least two centers")
    if pts.shape[0] < k:
        raise ValueError(f"need at least {k} points, got {pts.shape[0]}")

    rng = np.random.Generator(np.random.PCG64(seed))
    centers = _seed_centers(pts, k, rng)

    history: list[float] = []
    prev = None
    for it in range(max_iter):
        labels, d2 = _nearest(pts, centers)
        inertia = float(d2.sum())
        history.append(inertia)
        if prev is not None and prev - inertia <= rel_tol * prev:
            break
        if it == max_iter - 1:
            break
        prev = inertia

        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, pts)
        new_centers = np.where(counts[:, None] > 0, sums / np.maximum(counts, 1)[:, None], 0.0)
        empty = np.where(counts == 0)[0]
        if empty.size:
            order = np.argsort(-d2, kind="stable")
            cursor = 0
            for cluster in empty:
                new_centers[cluster] = pts[order[cursor]]
                cursor += 1
        centers = new_centers

    return Codebook(centers=centers, inertia=history[-1], inertia_history=tuple(history))


def assign(codebook: Codebook, x: np.ndarray) -> int:
    """Index of the nearest center (exact; ties break to the lowest index)."""
    vec = np.asarray(x, dtype=np.float64)
    if vec.shape != (codebook.d_prime,):
        raise ValueError(f"expected a length-{codebook.d_prime} vector, got {vec.shape}")
    labels, _ = _nearest(vec[None, :], codebook.centers)
    return int(labels[0])


def assign_many(codebook: Codebook, xs: np.ndarray) -> np.ndarray:
    """Nearest-center index for each row."""
    mat = np.asarray(xs, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] != codebook.d_prime:
        raise ValueError(f"expected rows of length {codebook.d_prime}, got {mat.shape}")
    labels, _ = _nearest(mat, codebook.centers)
    return labels


def vlad_encode(
    codebook: Codebook,
    frames: np.ndarray,
    power_norm: bool = True,
    l2_norm: bool = True,
) -> VladCode:
    """Encode reduced frame vectors as concatenated per-center residual sums.

    With the default stabilization each element is signed-square-rooted and
    the full vector is scaled to unit norm (an all-zero raw code stays
    zero).  Pass ``power_norm=False, l2_norm=False`` for the raw sums.
    """
    mat = np.asarray(frames, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] < 1:
        raise ValueError("frames must be a non-empty 2-D array")
    labels = assign_many(codebook, mat)
    code = np.zeros((codebook.k, codebook.d_prime))
    for cluster in range(codebook.k):
        members = mat[labels == cluster]
        if members.shape[0]:
            # Column-sorted summation keeps the code bit-identical under
            # any permutation of the input frames.
            residuals = np.sort(members, axis=0) - codebook.centers[cluster]
            code[cluster] = residuals.sum(axis=0)
    flat = code.ravel()
    if power_norm:
        flat = np.sign(flat) * np.sqrt(np.abs(flat))
    if l2_norm:
        norm = float(np.linalg.norm(flat))
        if norm > 0.0:
            flat = flat / norm
    return VladCode(values=flat, normalized=l2_norm)


@dataclass(frozen=True)
class VladModel:
    """Trained encoding stage: whitening projection plus codebook."""

    pca: PcaModel
    codebook: Codebook
    power_norm: bool = True
    l2_norm: bool = True

    def __post_init__(self):
        if self.codebook.d_prime != self.pca.d_prime:
            raise ValueError("codebook and projection disagree on reduced dimension")

    @property
    def code_length(self) -> int:
        return self.codebook.k * self.codebook.d_prime

    def encode(self, frames: FeatureMatrix | np.ndarray) -> VladCode:
        mat = frames.values if isinstance(frames, FeatureMatrix) else frames
        reduced = self.pca.transform(np.asarray(mat, dtype=np.float64))
        return vlad_encode(
            self.codebook, reduced, power_norm=self.power_norm, l2_norm=self.l2_norm
        )


def fit_vlad_model(
    samples: np.ndarray,
    k: int,
    d_prime: int,
    seed: int,
    max_iter: int = 100,
    rel_tol: float = 1e-4,
    power_norm: bool = True,
    l2_norm: bool = True,
) -> VladModel:
    """Fit projection and codebook from stacked training frame vectors."""
    pca = fit_pca(samples, d_prime)
    reduced = pca.transform(np.asarray(samples, dtype=np.float64))
    codebook = kmeanspp_fit(reduced, k, seed, max_iter=max_iter, rel_tol=rel_tol)
    return VladModel(pca=pca, codebook=codebook, power_norm=power_norm, l2_norm=l2_norm)
