"""Weight-file IO matching the layout tool's JSON tensor format."""

import json

import numpy as np

FORMAT_VERSION = 1


def save_weights(path, tensors):
    doc = {"format_version": FORMAT_VERSION, "tensors": {}}
    for name, arr in sorted(tensors.items()):
        arr = np.asarray(arr, dtype=np.float64)
        doc["tensors"][name] = {"shape": list(arr.shape),
                                "data": arr.reshape(-1).tolist()}
    with open(path, "w") as f:
        json.dump(doc, f)


def load_weights(path):
    with open(path) as f:
        doc = json.load(f)
    assert doc.get("format_version") == FORMAT_VERSION
    return {name: np.asarray(e["data"], dtype=np.float64).reshape(e["shape"])
            for name, e in doc["tensors"].items()}
