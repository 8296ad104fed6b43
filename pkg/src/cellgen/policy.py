"""Forward pass of the convolutional DRC-fix policy.

Four 3x3 same-shape convolutions (3 -> 64 -> 128 -> 256 -> 512) produce a
per-pixel embedding; a shared per-pixel MLP (512 -> 64 -> 64 -> 1) yields
action logits that are masked and softmaxed over the H*W grid, and the
value head applies the same MLP shape to the average-pooled embedding.
No tensor depends on the grid width, so one weight file serves any cell.
"""

from __future__ import annotations

import numpy as np

from .errors import ModelFormatError

CONV_CHANNELS = (3, 64, 128, 256, 512)

POLICY_MANIFEST = {}
for _i in range(4):
    POLICY_MANIFEST[f"conv{_i + 1}.weight"] = (
        CONV_CHANNELS[_i + 1], CONV_CHANNELS[_i], 3, 3)
    POLICY_MANIFEST[f"conv{_i + 1}.bias"] = (CONV_CHANNELS[_i + 1],)
for _head in ("policy", "value"):
    POLICY_MANIFEST[f"{_head}.fc1.weight"] = (64, 512)
    POLICY_MANIFEST[f"{_head}.fc1.bias"] = (64,)
    POLICY_MANIFEST[f"{_head}.fc2.weight"] = (64, 64)
    POLICY_MANIFEST[f"{_head}.fc2.bias"] = (64,)
    POLICY_MANIFEST[f"{_head}.fc3.weight"] = (1, 64)
    POLICY_MANIFEST[f"{_head}.fc3.bias"] = (1,)


def validate_policy_weights(tensors: dict) -> dict:
    missing = sorted(set(POLICY_MANIFEST) - set(tensors))
    extra = sorted(set(tensors) - set(POLICY_MANIFEST))
    if missing or extra:
        raise ModelFormatError(f"policy tensors mismatch: missing {missing}, extra {extra}")
    for name, shape in POLICY_MANIFEST.items():
        if tuple(tensors[name].shape) != shape:
            raise ModelFormatError(
                f"policy tensor {name}: shape {tuple(tensors[name].shape)} != {shape}")
    return tensors


def parameter_count(tensors: dict) -> int:
    return int(sum(np.asarray(t).size for t in tensors.values()))


def _conv2d_same(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """3x3 zero-padded convolution keeping H x W; x is [C, H, W]."""
    c, h, width = x.shape
    out_c = w.shape[0]
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    cols = np.empty((9 * c, h * width), dtype=x.dtype)
    k = 0
    for di in range(3):
        for dj in range(3):
            cols[k * c:(k + 1) * c] = xp[:, di:di + h, dj:dj + width].reshape(c, -1)
            k += 1
    # rows of cols are (di, dj, c) blocks; flatten w the same way
    wmat = w.transpose(0, 2, 3, 1).reshape(out_c, 9 * c)
    return (wmat @ cols).reshape(out_c, h, width) + b[:, None, None]


def _mlp(x: np.ndarray, tensors: dict, head: str) -> np.ndarray:
    """Shared 512 -> 64 -> 64 -> 1 stack; x is [..., 512]."""
    z = np.maximum(x @ tensors[f"{head}.fc1.weight"].T + tensors[f"{head}.fc1.bias"], 0.0)
    z = np.maximum(z @ tensors[f"{head}.fc2.weight"].T + tensors[f"{head}.fc2.bias"], 0.0)
    return z @ tensors[f"{head}.fc3.weight"].T + tensors[f"{head}.fc3.bias"]


def policy_forward(obs: np.ndarray, tensors: dict):
    """(action probabilities over H*W, state value) for one observation."""
    validate_policy_weights(tensors)
    x = np.asarray(obs, dtype=np.float64)
    if x.ndim != 3 or x.shape[0] != 3:
        raise ModelFormatError(f"observation must be [3, H, W], got {x.shape}")
    for i in range(4):
        x = _conv2d_same(x, tensors[f"conv{i + 1}.weight"], tensors[f"conv{i + 1}.bias"])
        x = np.maximum(x, 0.0)
    h, w = x.shape[1], x.shape[2]
    emb = x.reshape(512, h * w).T            # [HW, 512]
    logits = _mlp(emb, tensors, "policy").reshape(-1)
    value = float(_mlp(emb.mean(axis=0), tensors, "value")[0])
    mask = np.asarray(obs, dtype=np.float64)[1].reshape(-1) > 0.5
    if not mask.any():
        return np.full(h * w, 1.0 / (h * w)), value
    z = logits - logits[mask].max()
    ez = np.where(mask, np.exp(z), 0.0)
    return ez / ez.sum(), value


def random_policy_weights(rng: np.random.Generator) -> dict:
    """He-initialized weights, mainly for tests and untrained rollouts."""
    tensors = {}
    for name, shape in POLICY_MANIFEST.items():
        if name.endswith(".bias"):
            tensors[name] = np.zeros(shape)
        else:
            fan_in = int(np.prod(shape[1:]))
            tensors[name] = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)
    return tensors


def zero_policy_weights() -> dict:
    return {name: np.zeros(shape) for name, shape in POLICY_MANIFEST.items()}
