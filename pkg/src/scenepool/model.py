"""Core data types: feature matrices, descriptors, label spaces, manifests."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ManifestError

# Canonical ordering of descriptor blocks.  Concatenated descriptors always
# store their blocks in this order so identical configurations produce
# identical vectors.
MEASURE_ORDER = ("mean", "sd", "skew", "kurt", "max", "vlad")

# The purely statistical measures (everything except the codebook encoding).
STAT_MEASURES = ("mean", "sd", "skew", "kurt", "max")

_MEASURE_RANK = {name: i for i, name in enumerate(MEASURE_ORDER)}


def measure_rank(name: str) -> int:
    """Position of a measure in the canonical block order."""
    try:
        return _MEASURE_RANK[name]
    except KeyError:
        raise ValueError(f"unknown measure {name!r}; expected one of {MEASURE_ORDER}") from None


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-frame feature vectors for one video, one row per frame.

    Values are held as float32, matching the on-disk container, so that a
    write/read cycle is bit-exact.  Numerical work downstream promotes to
    float64.  ``post_relu`` marks activations taken after a rectifier,
    which must be non-negative.
    """

    values: np.ndarray
    post_relu: bool = False

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float32)
        if arr.ndim != 2:
            raise ValueError(f"feature matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"feature matrix must be at least 1x1, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("feature matrix contains non-finite values")
        if self.post_relu and float(arr.min()) < 0.0:
            raise ValueError("post_relu feature matrix contains negative values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def cols(self) -> int:
        return int(self.values.shape[1])

    def select_rows(self, indices_1based: Sequence[int]) -> "FeatureMatrix":
        """Sub-matrix of the given 1-based frame indices, in the given order."""
        idx = np.asarray(list(indices_1based), dtype=np.int64)
        if idx.size == 0:
            raise ValueError("frame selection is empty")
        if idx.min() < 1 or idx.max() > self.rows:
            raise ValueError(
                f"frame index out of range 1..{self.rows}: {idx.min()}..{idx.max()}"
            )
        return FeatureMatrix(self.values[idx - 1], post_relu=self.post_relu)


@dataclass(frozen=True)
class DescriptorBlock:
    """Provenance entry: which measure produced which slice of a descriptor."""

    measure: str
    offset: int
    length: int


@dataclass(frozen=True)
class VideoDescriptor:
    """Aggregated per-video feature vector with block provenance.

    ``normalized`` asserts that every block has unit Euclidean norm
    (within 1e-9) or is all-zero.
    """

    values: np.ndarray
    provenance: tuple[DescriptorBlock, ...]
    normalized: bool = False

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise ValueError(f"descriptor must be 1-D, got shape {vals.shape}")
        if not np.isfinite(vals).all():
            raise ValueError("descriptor contains non-finite values")
        prov = tuple(self.provenance)
        if not prov:
            raise ValueError("descriptor has no blocks")
        offset = 0
        last_rank = -1
        for blk in prov:
            rank = measure_rank(blk.measure)
            if rank <= last_rank:
                raise ValueError(
                    f"descriptor blocks out of canonical order {MEASURE_ORDER}: "
                    f"{[b.measure for b in prov]}"
                )
            last_rank = rank
            if blk.offset != offset or blk.length < 1:
                raise ValueError(f"bad provenance block {blk}")
            offset += blk.length
        if offset != vals.size:
            raise ValueError(
                f"descriptor length {vals.size} does not match provenance total {offset}"
            )
        if self.normalized:
            for blk in prov:
                norm = float(np.linalg.norm(vals[blk.offset : blk.offset + blk.length]))
                if norm != 0.0 and abs(norm - 1.0) > 1e-9:
                    raise ValueError(
                        f"block {blk.measure!r} marked normalized but has norm {norm!r}"
                    )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "provenance", prov)

    @property
    def measures(self) -> tuple[str, ...]:
        return tuple(b.measure for b in self.provenance)

    def block(self, measure: str) -> np.ndarray:
        for blk in self.provenance:
            if blk.measure == measure:
                return self.values[blk.offset : blk.offset + blk.length]
        raise KeyError(f"descriptor has no {measure!r} block")


Block = Union[tuple[str, np.ndarray], VideoDescriptor]


def descriptor_concat(blocks: Iterable[Block]) -> VideoDescriptor:
    """Concatenate measure blocks into a single descriptor.

    Each element is either a ``(measure, vector)`` pair or an existing
    ``VideoDescriptor`` (whose blocks are spliced in, making concatenation
    associative).  Blocks must arrive in canonical order with no duplicate
    measure.  The ``normalized`` flag of the result is inferred: it is set
    when every block is unit-norm or all-zero.
    """
    flat: list[tuple[str, np.ndarray]] = []
    for item in blocks:
        if isinstance(item, VideoDescriptor):
            for blk in item.provenance:
                flat.append((blk.measure, item.block(blk.measure)))
        else:
            name, vec = item
            flat.append((str(name), np.asarray(vec, dtype=np.float64)))
    if not flat:
        raise ValueError("cannot concatenate an empty block list")
    seen = set()
    for name, _ in flat:
        measure_rank(name)
        if name in seen:
            raise ValueError(f"duplicate measure {name!r} in descriptor blocks")
        seen.add(name)

    prov = []
    offset = 0
    normalized = True
    for name, vec in flat:
        if vec.ndim != 1 or vec.size < 1:
            raise ValueError(f"block {name!r} must be a non-empty vector")
        prov.append(DescriptorBlock(name, offset, int(vec.size)))
        offset += int(vec.size)
        norm = float(np.linalg.norm(vec))
        if norm != 0.0 and abs(norm - 1.0) > 1e-9:
            normalized = False
    values = np.concatenate([vec for _, vec in flat])
    return VideoDescriptor(values=values, provenance=tuple(prov), normalized=normalized)


@dataclass(frozen=True)
class LabelSpace:
    """Ordered class names; the id of a class is its position."""

    classes: tuple[str, ...]

    def __post_init__(self):
        names = tuple(str(c) for c in self.classes)
        if len(set(names)) != len(names):
            raise ValueError("class names must be unique")
        if not names:
            raise ValueError("label space is empty")
        object.__setattr__(self, "classes", names)

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "LabelSpace":
        """Build a label space with ids assigned in sorted-name order."""
        return cls(tuple(sorted(names)))

    def __len__(self) -> int:
        return len(self.classes)

    def id_of(self, name: str) -> int:
        try:
            return self.classes.index(name)
        except ValueError:
            raise KeyError(f"unknown class {name!r}") from None

    def name_of(self, class_id: int) -> str:
        if not 0 <= class_id < len(self.classes):
            raise KeyError(f"class id {class_id} out of range")
        return self.classes[class_id]


@dataclass(frozen=True)
class VideoRecord:
    """One video: identity, class, frame count, and feature location.

    Field values are not validated here; ``validate_manifest`` collects all
    violations across a manifest into one report.
    """

    id: str
    class_id: int
    total_frames: int
    feature_path: str | None = None
    fps: float | None = None


@dataclass(frozen=True)
class DatasetManifest:
    """Registry of videos and their labels driving the evaluation protocol."""

    name: str
    label_space: LabelSpace
    videos: tuple[VideoRecord, ...]
    dim: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "videos", tuple(self.videos))

    def video_ids(self) -> list[str]:
        return [v.id for v in self.videos]

    def by_id(self, video_id: str) -> VideoRecord:
        for v in self.videos:
            if v.id == video_id:
                return v
        raise KeyError(f"unknown video id {video_id!r}")

    def class_name(self, video: VideoRecord) -> str:
        return self.label_space.name_of(video.class_id)


def validate_manifest(
    manifest: DatasetManifest,
    base_dir: str | os.PathLike | None = None,
    check_files: bool = True,
) -> DatasetManifest:
    """Validate a manifest, returning it unchanged or raising ``ManifestError``.

    All violations are collected before raising so a single run reports
    every problem: duplicate video ids, unknown class ids, zero-frame
    videos, classes with no videos, and (when ``check_files``) missing
    feature files.  Relative feature paths resolve against ``base_dir``.
    """
    violations: list[str] = []
    n_classes = len(manifest.label_space)
    seen_ids: set[str] = set()
    class_counts = [0] * n_classes

    for video in manifest.videos:
        if video.id in seen_ids:
            violations.append(f"duplicate video id {video.id!r}")
        seen_ids.add(video.id)
        if not 0 <= video.class_id < n_classes:
            violations.append(f"video {video.id!r}: unknown class id {video.class_id}")
        else:
            class_counts[video.class_id] += 1
        if video.total_frames < 1:
            violations.append(f"video {video.id!r}: zero-frame video")
        if check_files and video.feature_path is not None:
            path = video.feature_path
            if base_dir is not None and not os.path.isabs(path):
                path = os.path.join(os.fspath(base_dir), path)
            if not os.path.isfile(path):
                violations.append(
                    f"video {video.id!r}: missing feature file {video.feature_path}"
                )

    for class_id, count in enumerate(class_counts):
        if count == 0:
            violations.append(f"empty class {manifest.label_space.name_of(class_id)!r}")

    if violations:
        raise ManifestError(violations)
    return manifest
