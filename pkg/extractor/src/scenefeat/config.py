"""Extraction configuration."""

from __future__ import annotations

from dataclasses import dataclass

MODELS = ("alexnet", "places205", "hybrid", "user")
LAYERS = ("fc6", "fc7")
RESIZE_MODES = ("warp", "center-crop")

# Input resolution per pretrained family; the ImageNet-only model expects
# 256, the scene-trained ones 227.
_MODEL_RESIZE = {"alexnet": 256, "places205": 227, "hybrid": 227}

# Classifier head width per model family (number of training categories).
MODEL_CLASSES = {"alexnet": 1000, "places205": 205, "hybrid": 1183}

LAYER_DIM = 4096


@dataclass(frozen=True)
class ExtractorConfig:
    """What to run and how: model family, layer tap, sizing, sampling."""

    model: str = "hybrid"
    layer: str = "fc7"
    resize: int | None = None
    n_frames: int | str = "all"
    resize_mode: str = "warp"
    fake: bool = False
    weights: str | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.layer not in LAYERS:
            raise ValueError(f"unknown layer {self.layer!r}; expected one of {LAYERS}")
        if self.resize_mode not in RESIZE_MODES:
            raise ValueError(
                f"unknown resize mode {self.resize_mode!r}; expected one of {RESIZE_MODES}"
            )
        if self.resize is None:
            if self.model == "user":
                raise ValueError("user-supplied models must state --resize explicitly")
            object.__setattr__(self, "resize", _MODEL_RESIZE[self.model])
        if int(self.resize) < 1:
            raise ValueError("resize must be positive")
        object.__setattr__(self, "resize", int(self.resize))
        if self.n_frames != "all":
            n = int(self.n_frames)
            if n < 1:
                raise ValueError("n_frames must be at least 1 or 'all'")
            object.__setattr__(self, "n_frames", n)
        if not self.fake and self.weights is None:
            raise ValueError("real extraction needs --weights; use --fake for pipeline tests")
