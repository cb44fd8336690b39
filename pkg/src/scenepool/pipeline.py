"""Dataset-level descriptor computation shared by the CLI and evaluation."""

from __future__ import annotations

import os
from typing import Iterable, Mapping

from .aggregation import aggregate_combo, canonical_measures
from .featfile import read_feature_file
from .model import DatasetManifest, FeatureMatrix, VideoDescriptor, descriptor_concat
from .sampling import linspace_indices, random_indices
from .vlad import VladModel

SAMPLING_MODES = ("linear", "random")


def load_features(
    manifest: DatasetManifest, base_dir: str | os.PathLike | None = None
) -> dict[str, FeatureMatrix]:
    """Read every video's feature file, resolving paths against ``base_dir``.

    When the manifest declares a feature dimension, every file must match it.
    """
    out = {}
    for video in manifest.videos:
        if video.feature_path is None:
            raise ValueError(f"video {video.id!r} has no feature file")
        path = video.feature_path
        if base_dir is not None and not os.path.isabs(path):
            path = os.path.join(os.fspath(base_dir), path)
        mat = read_feature_file(path)
        if manifest.dim is not None and mat.cols != manifest.dim:
            raise ValueError(
                f"video {video.id!r}: feature dimension {mat.cols} does not match "
                f"the manifest's {manifest.dim}"
            )
        out[video.id] = mat
    return out


def select_frames(
    mat: FeatureMatrix,
    n_frames: int | None,
    sampling: str = "linear",
    seed: int | None = None,
) -> FeatureMatrix:
    """Frame subset for aggregation; ``None`` keeps all frames.

    Requests larger than the video are capped at its frame count so
    heterogeneous-length datasets stay runnable.
    """
    if n_frames is None:
        return mat
    n = min(int(n_frames), mat.rows)
    if sampling == "linear":
        sel = linspace_indices(mat.rows, n)
    elif sampling == "random":
        sel = random_indices(mat.rows, n, 0 if seed is None else seed)
    else:
        raise ValueError(f"unknown sampling mode {sampling!r}; expected one of {SAMPLING_MODES}")
    return mat.select_rows(sel.indices)


def video_descriptor(
    mat: FeatureMatrix,
    measures: Iterable[str],
    vlad_model: VladModel | None = None,
    block_norm: str = "per_block",
) -> VideoDescriptor:
    """Descriptor for one video: statistic blocks and/or a codebook encoding.

    ``block_norm`` applies to the statistic blocks; the encoding block
    carries the normalization baked into the model.
    """
    ordered = canonical_measures(measures)
    stats = [m for m in ordered if m != "vlad"]
    blocks = []
    if stats:
        blocks.append(aggregate_combo(mat, stats, block_norm=block_norm))
    if "vlad" in ordered:
        if vlad_model is None:
            raise ValueError("the vlad measure needs a trained encoding model")
        blocks.append(("vlad", vlad_model.encode(mat).values))
    return descriptor_concat(blocks)


def dataset_descriptors(
    manifest: DatasetManifest,
    features: Mapping[str, FeatureMatrix],
    measures: Iterable[str],
    n_frames: int | None = None,
    sampling: str = "linear",
    seed: int | None = None,
    vlad_model: VladModel | None = None,
    block_norm: str = "per_block",
) -> dict[str, VideoDescriptor]:
    """Descriptors for every video in the manifest, keyed by video id."""
    out = {}
    for video in manifest.videos:
        if video.id not in features:
            raise ValueError(f"missing features for video {video.id!r}")
        sub = select_frames(features[video.id], n_frames, sampling=sampling, seed=seed)
        out[video.id] = video_descriptor(
            sub, measures, vlad_model=vlad_model, block_norm=block_norm
        )
    return out
