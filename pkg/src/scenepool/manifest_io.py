"""Manifest (de)serialization.

A manifest is a JSON document::

    {
      "name": "outdoor-scenes",
      "classes": ["beach", "elevator", ...],
      "dim": 4096,
      "videos": [
        {"id": "beach_01", "class": "beach", "frames": 145,
         "feature_file": "features/beach_01.safv", "fps": 25.0},
        ...
      ]
    }

``classes`` fixes the class-id order (write sorted names to get the
canonical ids).  ``feature_file`` paths are kept relative to the manifest's
directory; ``dim`` and ``fps`` are optional.
"""

from __future__ import annotations

import json
import os

from .model import DatasetManifest, LabelSpace, VideoRecord


def manifest_to_dict(manifest: DatasetManifest) -> dict:
    doc = {
        "name": manifest.name,
        "classes": list(manifest.label_space.classes),
        "videos": [],
    }
    if manifest.dim is not None:
        doc["dim"] = int(manifest.dim)
    for video in manifest.videos:
        entry = {
            "id": video.id,
            "class": manifest.label_space.name_of(video.class_id)
            if 0 <= video.class_id < len(manifest.label_space)
            else video.class_id,
            "frames": int(video.total_frames),
        }
        if video.feature_path is not None:
            entry["feature_file"] = video.feature_path
        if video.fps is not None:
            entry["fps"] = float(video.fps)
        doc["videos"].append(entry)
    return doc


def manifest_from_dict(doc: dict) -> DatasetManifest:
    label_space = LabelSpace(tuple(doc["classes"]))
    videos = []
    for entry in doc.get("videos", []):
        cls = entry.get("class")
        if isinstance(cls, str):
            # Unknown names map to -1 so validation can report them.
            class_id = label_space.classes.index(cls) if cls in label_space.classes else -1
        else:
            class_id = int(cls)
        videos.append(
            VideoRecord(
                id=str(entry["id"]),
                class_id=class_id,
                total_frames=int(entry.get("frames", 0)),
                feature_path=entry.get("feature_file"),
                fps=float(entry["fps"]) if "fps" in entry else None,
            )
        )
    dim = doc.get("dim")
    return DatasetManifest(
        name=str(doc.get("name", "")),
        label_space=label_space,
        videos=tuple(videos),
        dim=int(dim) if dim is not None else None,
    )


def save_manifest(manifest: DatasetManifest, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest_to_dict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path: str | os.PathLike) -> DatasetManifest:
    with open(path, "r", encoding="utf-8") as fh:
        return manifest_from_dict(json.load(fh))


def manifest_dir(path: str | os.PathLike) -> str:
    """Directory feature paths resolve against."""
    return os.path.dirname(os.path.abspath(os.fspath(path)))
