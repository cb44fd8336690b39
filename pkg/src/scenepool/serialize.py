"""Bundle packing for trained models and descriptor tables."""

from __future__ import annotations

import os

import numpy as np

from .errors import FeatureFileError
from .featfile import read_bundle, write_bundle
from .model import DescriptorBlock, LabelSpace, VideoDescriptor
from .svm import BinarySvmModel, OvrSvmModel
from .vlad import Codebook, PcaModel, VladModel


def save_vlad_model(model: VladModel, path: str | os.PathLike) -> None:
    meta = {
        "kind": "vlad-model",
        "k": model.codebook.k,
        "d_prime": model.pca.d_prime,
        "d": model.pca.d,
        "power_norm": model.power_norm,
        "l2_norm": model.l2_norm,
        "inertia": model.codebook.inertia,
    }
    write_bundle(
        path,
        meta,
        {
            "pca_mean": model.pca.mean,
            "pca_components": model.pca.components,
            "pca_scales": model.pca.scales,
            "centers": model.codebook.centers,
        },
    )


def load_vlad_model(path: str | os.PathLike) -> VladModel:
    meta, mats = read_bundle(path)
    if meta.get("kind") != "vlad-model":
        raise FeatureFileError(f"{os.fspath(path)}: not a vlad-model bundle")
    pca = PcaModel(
        mean=mats["pca_mean"].ravel(),
        components=mats["pca_components"],
        scales=mats["pca_scales"].ravel(),
    )
    codebook = Codebook(centers=mats["centers"], inertia=float(meta.get("inertia", 0.0)))
    return VladModel(
        pca=pca,
        codebook=codebook,
        power_norm=bool(meta["power_norm"]),
        l2_norm=bool(meta["l2_norm"]),
    )


def save_ovr_model(model: OvrSvmModel, path: str | os.PathLike) -> None:
    meta = {
        "kind": "svm-ovr",
        "classes": list(model.label_space.classes),
        "kernel": None,
        "c": None,
        "biases": [],
        "present": [],
    }
    mats = {}
    for class_id, binary in enumerate(model.models):
        if binary is None:
            meta["present"].append(False)
            meta["biases"].append(0.0)
            continue
        meta["present"].append(True)
        meta["biases"].append(binary.bias)
        meta["kernel"] = binary.kernel
        meta["c"] = binary.c
        mats[f"sv_{class_id}"] = binary.support_vectors
        mats[f"alpha_{class_id}"] = binary.alphas
    write_bundle(path, meta, mats)


def load_ovr_model(path: str | os.PathLike) -> OvrSvmModel:
    meta, mats = read_bundle(path)
    if meta.get("kind") != "svm-ovr":
        raise FeatureFileError(f"{os.fspath(path)}: not an svm-ovr bundle")
    label_space = LabelSpace(tuple(meta["classes"]))
    models: list[BinarySvmModel | None] = []
    for class_id, present in enumerate(meta["present"]):
        if not present:
            models.append(None)
            continue
        svs = mats[f"sv_{class_id}"]
        alphas = mats[f"alpha_{class_id}"].ravel()
        weights = svs.T @ alphas if meta["kernel"] == "linear" else None
        models.append(
            BinarySvmModel(
                support_vectors=svs,
                alphas=alphas,
                bias=float(meta["biases"][class_id]),
                kernel=str(meta["kernel"]),
                c=float(meta["c"]),
                weights=weights,
            )
        )
    return OvrSvmModel(models=tuple(models), label_space=label_space)


def save_descriptors(
    descriptors: dict[str, VideoDescriptor], path: str | os.PathLike, config: dict | None = None
) -> None:
    """Store a descriptor table; row order follows the sorted video ids."""
    ids = sorted(descriptors)
    if not ids:
        raise ValueError("no descriptors to save")
    first = descriptors[ids[0]]
    prov = [
        {"measure": b.measure, "offset": b.offset, "length": b.length} for b in first.provenance
    ]
    table = np.vstack([descriptors[i].values for i in ids])
    meta = {
        "kind": "descriptors",
        "ids": ids,
        "provenance": prov,
        "normalized": first.normalized,
        "config": dict(config or {}),
    }
    write_bundle(path, meta, {"values": table})


def load_descriptors(path: str | os.PathLike) -> tuple[dict[str, VideoDescriptor], dict]:
    meta, mats = read_bundle(path)
    if meta.get("kind") != "descriptors":
        raise FeatureFileError(f"{os.fspath(path)}: not a descriptors bundle")
    prov = tuple(
        DescriptorBlock(p["measure"], int(p["offset"]), int(p["length"]))
        for p in meta["provenance"]
    )
    table = mats["values"]
    out = {}
    for row, video_id in enumerate(meta["ids"]):
        out[video_id] = VideoDescriptor(
            values=table[row], provenance=prov, normalized=bool(meta["normalized"])
        )
    return out, dict(meta.get("config", {}))
