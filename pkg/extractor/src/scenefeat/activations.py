"""Per-frame activation backends.

The fake backend hashes the resized frame's pixels into a seed and draws
reproducible rectifier-style activations; it exists so the downstream
pipeline can be exercised end-to-end without model weights.  The torch
backend runs an AlexNet-shaped network and taps the post-rectifier output
of the chosen fully connected layer.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .config import LAYER_DIM, MODEL_CLASSES, ExtractorConfig
from .video import resize_frame


def fake_activations(frame: np.ndarray, config: ExtractorConfig) -> np.ndarray:
    """Deterministic pseudo-activations from a seeded hash of the pixels."""
    resized = resize_frame(frame, config.resize, config.resize_mode)
    salt = f"{config.model}/{config.layer}/{config.resize}".encode()
    digest = hashlib.blake2b(salt + resized.tobytes(), digest_size=8).digest()
    rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest, "little")))
    values = rng.uniform(0.0, 4.0, LAYER_DIM)
    gate = rng.random(LAYER_DIM) < 0.5  # rectifier-like sparsity
    return (values * gate).astype(np.float32)


class TorchBackend:
    """AlexNet-family forward pass up to the requested rectified layer."""

    def __init__(self, config: ExtractorConfig):
        import torch
        import torchvision

        self._torch = torch
        self.config = config
        n_classes = MODEL_CLASSES.get(config.model, 1000)
        net = torchvision.models.alexnet(weights=None, num_classes=n_classes)
        if config.weights is not None:
            state = torch.load(config.weights, map_location="cpu")
            net.load_state_dict(state)
        net.eval()
        # classifier = [Dropout, Linear, ReLU, Dropout, Linear, ReLU, Linear];
        # the sixth fully connected layer ends (rectified) at index 2, the
        # seventh at index 5.
        cut = 3 if config.layer == "fc6" else 6
        self._features = net.features
        self._avgpool = net.avgpool
        self._head = net.classifier[:cut]
        self._mean = torch.tensor([0.485, 0.456, 0.406]).view(3, 1, 1)
        self._std = torch.tensor([0.229, 0.224, 0.225]).view(3, 1, 1)

    def __call__(self, frame: np.ndarray) -> np.ndarray:
        torch = self._torch
        resized = resize_frame(frame, self.config.resize, self.config.resize_mode)
        rgb = resized[:, :, ::-1].astype(np.float32) / 255.0
        tensor = torch.from_numpy(rgb.copy()).permute(2, 0, 1)
        tensor = (tensor - self._mean) / self._std
        with torch.no_grad():
            x = self._features(tensor[None])
            x = self._avgpool(x)
            x = torch.flatten(x, 1)
            x = self._head(x)
        out = x[0].numpy().astype(np.float32)
        assert out.shape == (LAYER_DIM,)
        return out


def make_backend(config: ExtractorConfig):
    if config.fake:
        return lambda frame: fake_activations(frame, config)
    return TorchBackend(config)
