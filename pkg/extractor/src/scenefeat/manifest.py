"""Dataset traversal and manifest output.

Input layout: one subdirectory per class, video files inside.  Output is
the pooling side's manifest schema plus one feature file per video.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass

import numpy as np

from .activations import make_backend
from .config import LAYER_DIM, ExtractorConfig
from .featwrite import write_feature_file
from .video import decode_selected_frames

log = logging.getLogger("scenefeat")

VIDEO_EXTENSIONS = (".avi", ".mp4", ".mov", ".mkv", ".webm", ".mpg", ".mpeg", ".m4v")


@dataclass(frozen=True)
class VideoEntry:
    id: str
    class_name: str
    path: str
    feature_file: str


def scan_tree(root: str | os.PathLike) -> tuple[list[str], list[VideoEntry]]:
    """Find class subdirectories and their video files, sorted and stable."""
    root = os.fspath(root)
    classes = []
    entries = []
    for class_name in sorted(os.listdir(root)):
        class_dir = os.path.join(root, class_name)
        if not os.path.isdir(class_dir):
            log.info("ignoring non-directory entry %s", class_name)
            continue
        videos = []
        for name in sorted(os.listdir(class_dir)):
            path = os.path.join(class_dir, name)
            if not os.path.isfile(path):
                log.info("ignoring nested entry %s/%s", class_name, name)
                continue
            if not name.lower().endswith(VIDEO_EXTENSIONS):
                log.info("ignoring non-video file %s/%s", class_name, name)
                continue
            videos.append((name, path))
        if not videos:
            log.warning("class directory %s has no videos; skipping the class", class_name)
            continue
        classes.append(class_name)
        for name, path in videos:
            stem = os.path.splitext(name)[0]
            entries.append(
                VideoEntry(
                    id=f"{class_name}/{stem}",
                    class_name=class_name,
                    path=path,
                    feature_file=f"features/{class_name}/{stem}.safv",
                )
            )
    return classes, entries


def extract_video(path: str | os.PathLike, config: ExtractorConfig):
    """Per-frame activations for one video.

    Returns (matrix of selected-frame activations, total decoded frames,
    fps or None).  Rows follow the shared linear frame-selection rule.
    """
    frames, total, fps = decode_selected_frames(path, config.n_frames)
    backend = make_backend(config)
    rows = np.vstack([backend(frame) for frame in frames])
    assert rows.shape[1] == LAYER_DIM
    return rows, total, fps


def extract_tree(root: str | os.PathLike, out_dir: str | os.PathLike, config: ExtractorConfig) -> str:
    """Extract every video under ``root``; returns the manifest path."""
    classes, entries = scan_tree(root)
    if not classes:
        raise ValueError(f"no class directories with videos under {os.fspath(root)}")
    out_dir = os.fspath(out_dir)
    backend = make_backend(config)

    videos_doc = []
    for entry in entries:
        frames, total, fps = decode_selected_frames(entry.path, config.n_frames)
        rows = np.vstack([backend(frame) for frame in frames])
        target = os.path.join(out_dir, entry.feature_file)
        os.makedirs(os.path.dirname(target), exist_ok=True)
        write_feature_file(target, rows, post_relu=True)
        record = {
            "id": entry.id,
            "class": entry.class_name,
            "frames": total,
            "feature_file": entry.feature_file,
        }
        if fps is not None:
            record["fps"] = fps
        videos_doc.append(record)
        log.info("extracted %s: %d of %d frames", entry.id, rows.shape[0], total)

    manifest = {
        "name": os.path.basename(os.path.normpath(os.fspath(root))),
        "classes": classes,
        "dim": LAYER_DIM,
        "videos": videos_doc,
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    os.makedirs(out_dir, exist_ok=True)
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path
