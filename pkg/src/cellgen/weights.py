"""Model weight files: JSON documents of named, shaped, flat tensors."""

from __future__ import annotations

import json

import numpy as np

from .errors import ModelFormatError

FORMAT_VERSION = 1


def save_weights(path, tensors: dict) -> None:
    doc = {"format_version": FORMAT_VERSION, "tensors": {}}
    for name, arr in sorted(tensors.items()):
        arr = np.asarray(arr, dtype=np.float64)
        doc["tensors"][name] = {"shape": list(arr.shape),
                                "data": arr.reshape(-1).tolist()}
    with open(path, "w") as f:
        json.dump(doc, f)


def load_weights(path, manifest: dict | None = None) -> dict:
    """Load tensors; when a manifest is given, names and shapes must match it."""
    with open(path) as f:
        doc = json.load(f)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported weight file version {doc.get('format_version')!r}")
    tensors = {}
    for name, entry in doc.get("tensors", {}).items():
        shape = tuple(entry["shape"])
        data = np.asarray(entry["data"], dtype=np.float64)
        size = int(np.prod(shape)) if shape else 1
        if data.size != size:
            raise ModelFormatError(f"tensor {name}: {data.size} values for shape {shape}")
        tensors[name] = data.reshape(shape)
    if manifest is not None:
        missing = sorted(set(manifest) - set(tensors))
        extra = sorted(set(tensors) - set(manifest))
        if missing or extra:
            raise ModelFormatError(f"tensor names mismatch: missing {missing}, extra {extra}")
        for name, shape in manifest.items():
            if tensors[name].shape != tuple(shape):
                raise ModelFormatError(
                    f"tensor {name}: shape {tensors[name].shape} != expected {tuple(shape)}")
    return tensors
