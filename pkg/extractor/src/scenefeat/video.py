"""Video decoding helpers.

Frames are addressed by decode order (1-based), never by timestamps, so
variable-frame-rate files behave predictably.
"""

from __future__ import annotations

import os

import cv2
import numpy as np

from .sampling import linspace_indices


class VideoDecodeError(ValueError):
    pass


def decode_selected_frames(
    path: str | os.PathLike, n_frames: int | str
) -> tuple[list[np.ndarray], int, float | None]:
    """Decode a video, keeping ``n_frames`` linearly spaced frames.

    Returns (frames as BGR uint8 arrays, total decoded frame count,
    fps or None).  ``n_frames="all"`` keeps everything.  The whole file is
    decoded once; selection happens on decode indices.
    """
    path = os.fspath(path)
    cap = cv2.VideoCapture(path)
    if not cap.isOpened():
        raise VideoDecodeError(f"cannot open video {path}")
    fps = float(cap.get(cv2.CAP_PROP_FPS) or 0.0)
    frames: list[np.ndarray] = []
    try:
        while True:
            ok, frame = cap.read()
            if not ok:
                break
            frames.append(frame)
    finally:
        cap.release()
    total = len(frames)
    if total == 0:
        raise VideoDecodeError(f"no decodable frames in {path}")
    if n_frames == "all":
        selected = frames
    else:
        wanted = linspace_indices(total, min(int(n_frames), total))
        selected = [frames[i - 1] for i in wanted]
    return selected, total, fps if fps > 0 else None


def resize_frame(frame: np.ndarray, size: int, mode: str) -> np.ndarray:
    """Bring a frame to size x size: plain warp or center-crop then warp."""
    if mode == "center-crop":
        h, w = frame.shape[:2]
        side = min(h, w)
        top = (h - side) // 2
        left = (w - side) // 2
        frame = frame[top : top + side, left : left + side]
    return cv2.resize(frame, (size, size), interpolation=cv2.INTER_LINEAR)
