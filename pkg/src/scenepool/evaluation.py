"""Experimental protocol: leave-one-video-out evaluation, majority voting,
and the accuracy-versus-frame-count trial study."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .aggregation import aggregate, l2_normalize
from .model import DatasetManifest, FeatureMatrix, LabelSpace, VideoDescriptor
from .sampling import linspace_indices, random_indices
from .svm import OvrSvmModel, train_ovr


@dataclass(frozen=True)
class EvaluationReport:
    """Confusion matrix plus the parameters that produced it.

    Rows of ``confusion`` are true classes, columns predicted classes.
    Accuracies are derived, so the trace/total identity holds exactly.
    """

    label_space: LabelSpace
    confusion: np.ndarray
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        conf = np.asarray(self.confusion, dtype=np.int64)
        k = len(self.label_space)
        if conf.shape != (k, k):
            raise ValueError(f"confusion matrix must be {k}x{k}, got {conf.shape}")
        if (conf < 0).any():
            raise ValueError("confusion counts must be non-negative")
        conf.setflags(write=False)
        object.__setattr__(self, "confusion", conf)
        object.__setattr__(self, "config", dict(self.config))

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def overall_accuracy(self) -> float:
        """Percentage of correctly classified videos."""
        total = self.total
        if total == 0:
            return 0.0
        return 100.0 * float(np.trace(self.confusion)) / total

    @property
    def per_class_accuracy(self) -> dict[str, float]:
        out = {}
        for class_id, name in enumerate(self.label_space.classes):
            row = self.confusion[class_id]
            n = int(row.sum())
            out[name] = 100.0 * int(row[class_id]) / n if n else 0.0
        return out


def _descriptor_matrix(
    manifest: DatasetManifest,
    descriptors: Mapping[str, VideoDescriptor | np.ndarray],
) -> tuple[np.ndarray, np.ndarray]:
    rows = []
    labels = []
    for video in manifest.videos:
        if video.id not in descriptors:
            raise ValueError(f"missing descriptor for video {video.id!r}")
        desc = descriptors[video.id]
        vec = desc.values if isinstance(desc, VideoDescriptor) else np.asarray(desc, dtype=np.float64)
        rows.append(vec)
        labels.append(video.class_id)
    return np.vstack(rows), np.asarray(labels, dtype=np.int64)


def lovo_evaluate(
    manifest: DatasetManifest,
    descriptors: Mapping[str, VideoDescriptor | np.ndarray],
    kind: str = "linear",
    c: float = 1.0,
    config: Mapping | None = None,
) -> EvaluationReport:
    """Leave-one-video-out: train on all other videos, predict the held-out one.

    Each fold's training set is constructed explicitly and checked to
    exclude the held-out video.  A class reduced to zero training samples
    in some fold is skipped with a warning; prediction proceeds over the
    remaining classes.
    """
    x, y = _descriptor_matrix(manifest, descriptors)
    label_space = manifest.label_space
    if len(np.unique(y)) < 2:
        raise ValueError("evaluation needs at least two classes")

    n = x.shape[0]
    confusion = np.zeros((len(label_space), len(label_space)), dtype=np.int64)
    for held_out in range(n):
        train_idx = [i for i in range(n) if i != held_out]
        assert held_out not in train_idx, "held-out video leaked into its own fold"
        fold = train_ovr(
            x[train_idx], y[train_idx], kind=kind, c=c, label_space=label_space, skip_empty=True
        )
        pred = int(np.argmax(fold.decision_values(x[held_out])[0]))
        confusion[y[held_out], pred] += 1

    record = dict(config or {})
    record.update({"protocol": "lovo", "kernel": kind, "c": float(c), "n_videos": n})
    return EvaluationReport(label_space=label_space, confusion=confusion, config=record)


def majority_vote_classify(frame_model: OvrSvmModel, x: FeatureMatrix | np.ndarray) -> int:
    """Classify a video by the most frequent per-frame prediction.

    A tied vote goes to the tied label with the greatest decision value
    summed across frames, then to the lowest class id.
    """
    mat = x.values if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)
    mat = np.atleast_2d(mat)
    if mat.shape[0] < 1:
        raise ValueError("cannot vote over an empty frame matrix")
    decisions = frame_model.decision_values(mat)
    preds = np.argmax(decisions, axis=1)
    counts = np.bincount(preds, minlength=frame_model.n_classes)
    top = counts.max()
    tied = np.where(counts == top)[0]
    if tied.size == 1:
        return int(tied[0])
    sums = decisions.sum(axis=0)
    return int(tied[np.argmax(sums[tied])])


def lovo_majority_vote(
    manifest: DatasetManifest,
    features: Mapping[str, FeatureMatrix],
    kind: str = "linear",
    c: float = 1.0,
    n_frames: int = 10,
    config: Mapping | None = None,
) -> EvaluationReport:
    """Leave-one-video-out with a per-frame classifier and majority voting.

    Training uses every stored frame of the training videos as an
    independent sample labeled with its video's class; the held-out video
    is scored by voting over ``n_frames`` linearly spaced frames (capped
    at the video's own frame count).
    """
    label_space = manifest.label_space
    videos = manifest.videos
    for video in videos:
        if video.id not in features:
            raise ValueError(f"missing features for video {video.id!r}")
    if n_frames < 1:
        raise ValueError("n_frames must be at least 1")

    confusion = np.zeros((len(label_space), len(label_space)), dtype=np.int64)
    for held_out, video in enumerate(videos):
        train_rows = []
        train_labels = []
        for i, other in enumerate(videos):
            if i == held_out:
                continue
            mat = features[other.id].values
            train_rows.append(np.asarray(mat, dtype=np.float64))
            train_labels.append(np.full(mat.shape[0], other.class_id, dtype=np.int64))
        assert len(train_rows) == len(videos) - 1
        frame_model = train_ovr(
            np.vstack(train_rows),
            np.concatenate(train_labels),
            kind=kind,
            c=c,
            label_space=label_space,
            skip_empty=True,
        )
        test = features[video.id]
        sel = linspace_indices(test.rows, min(n_frames, test.rows))
        pred = majority_vote_classify(frame_model, test.select_rows(sel.indices))
        confusion[video.class_id, pred] += 1

    record = dict(config or {})
    record.update(
        {"protocol": "lovo-vote", "kernel": kind, "c": float(c), "n_frames": int(n_frames)}
    )
    return EvaluationReport(label_space=label_space, confusion=confusion, config=record)


@dataclass(frozen=True)
class TrialCurve:
    """Accuracy distribution over repeated random-frame trials, per frame count."""

    n_values: tuple[int, ...]
    accuracies: np.ndarray
    trials: int
    base_seed: int

    def __post_init__(self):
        acc = np.asarray(self.accuracies, dtype=np.float64)
        if acc.shape != (len(self.n_values), self.trials):
            raise ValueError(
                f"accuracy table must be {len(self.n_values)}x{self.trials}, got {acc.shape}"
            )
        acc.setflags(write=False)
        object.__setattr__(self, "accuracies", acc)
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))

    @property
    def mean(self) -> np.ndarray:
        return self.accuracies.mean(axis=1)

    @property
    def min(self) -> np.ndarray:
        return self.accuracies.min(axis=1)

    @property
    def max(self) -> np.ndarray:
        return self.accuracies.max(axis=1)

    @property
    def std(self) -> np.ndarray:
        return self.accuracies.std(axis=1)

    @property
    def spread(self) -> np.ndarray:
        return self.max - self.min


def frames_vs_accuracy(
    manifest: DatasetManifest,
    features: Mapping[str, FeatureMatrix],
    n_list: Sequence[int],
    trials: int = 18,
    base_seed: int = 0,
    kind: str = "linear",
    c: float = 1.0,
) -> TrialCurve:
    """Accuracy as a function of how many random frames feed the mean pool.

    For every requested frame count ``n`` and every trial ``t``, frames are
    drawn per video by ``random_indices(rows, min(n, rows), base_seed + t)``
    (videos shorter than ``n`` are capped at their own length), mean-pooled,
    L2-normalized, and evaluated leave-one-video-out.  Deterministic in
    ``base_seed``.
    """
    if not n_list:
        raise ValueError("n_list is empty")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    for video in manifest.videos:
        if video.id not in features:
            raise ValueError(f"missing features for video {video.id!r}")

    table = np.zeros((len(n_list), trials))
    for row, n in enumerate(n_list):
        if n < 1:
            raise ValueError(f"frame counts must be at least 1, got {n}")
        for t in range(trials):
            seed = base_seed + t
            descriptors = {}
            for video in manifest.videos:
                mat = features[video.id]
                sel = random_indices(mat.rows, min(n, mat.rows), seed)
                sub = mat.select_rows(sel.indices)
                descriptors[video.id] = l2_normalize(aggregate(sub, "mean"))
            report = lovo_evaluate(manifest, descriptors, kind=kind, c=c)
            table[row, t] = report.overall_accuracy

    return TrialCurve(
        n_values=tuple(int(n) for n in n_list),
        accuracies=table,
        trials=int(trials),
        base_seed=int(base_seed),
    )
