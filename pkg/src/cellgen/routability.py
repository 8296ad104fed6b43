"""Per-slot feature extraction and the 1D-conv routability classifier.

Each placement slot yields an 11-dimensional vector: net degrees of the
six device terminals (PMOS then NMOS gate/source/drain), pins within one
column, estimated wire crossings over the slot, the two fin counts, and a
gap flag. Inference is a two-layer kernel-3 convolution over the slot
sequence, global max-pool, and a dense softmax over the three labels.
"""

from __future__ import annotations

import numpy as np

from .annealer import net_spans
from .errors import ModelFormatError
from .netlist import Netlist
from .placement import PlacementRep, realize_placement
from .tech import TechParams

FEATURE_DIM = 11
LABELS = ("routable", "routable_with_drcs", "not_routable")

ROUTABILITY_MANIFEST = {
    "conv1.weight": (32, FEATURE_DIM, 3), "conv1.bias": (32,),
    "conv2.weight": (32, 32, 3), "conv2.bias": (32,),
    "dense.weight": (3, 32), "dense.bias": (3,),
}


def extract_features(rep: PlacementRep, netlist: Netlist, tech: TechParams) -> np.ndarray:
    """One feature vector per slot, left to right; shape [n_slots, 11]."""
    realized = realize_placement(rep, netlist, tech)
    spans = net_spans(netlist, realized)
    pmos, nmos = netlist.pmos, netlist.nmos
    rows = []
    for k in range(rep.n_slots):
        col = realized.slot_cols[k]
        feats = []
        for devs, order in ((pmos, rep.order_p), (nmos, rep.order_n)):
            idx = order[k]
            if idx is None:
                feats += [0.0, 0.0, 0.0]
            else:
                d = devs[idx]
                feats += [float(netlist.net_degree(d.gate)),
                          float(netlist.net_degree(d.source)),
                          float(netlist.net_degree(d.drain))]
        feats.append(float(sum(1 for c in realized.pin_cols if abs(c - col) <= 1)))
        feats.append(float(sum(1 for lo, hi in spans.values() if lo <= col <= hi)))
        ip, inn = rep.order_p[k], rep.order_n[k]
        feats.append(float(pmos[ip].fins) if ip is not None else 0.0)
        feats.append(float(nmos[inn].fins) if inn is not None else 0.0)
        feats.append(1.0 if (ip is None or inn is None) else 0.0)
        rows.append(feats)
    return np.asarray(rows, dtype=np.float64)


def validate_routability_weights(tensors: dict) -> dict:
    missing = sorted(set(ROUTABILITY_MANIFEST) - set(tensors))
    extra = sorted(set(tensors) - set(ROUTABILITY_MANIFEST))
    if missing or extra:
        raise ModelFormatError(f"routability tensors mismatch: missing {missing}, extra {extra}")
    for name, shape in ROUTABILITY_MANIFEST.items():
        if tuple(tensors[name].shape) != shape:
            raise ModelFormatError(
                f"routability tensor {name}: shape {tuple(tensors[name].shape)} != {shape}")
    return tensors


def _conv1d_same(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kernel-3 zero-padded convolution; x is [C, N]."""
    c, n = x.shape
    xp = np.pad(x, ((0, 0), (1, 1)))
    cols = np.concatenate([xp[:, k:k + n] for k in range(3)], axis=0)  # [3C, N]
    wmat = w.transpose(0, 2, 1).reshape(w.shape[0], 3 * c)
    return wmat @ cols + b[:, None]


def predict(features: np.ndarray, tensors: dict):
    """(label, class probabilities); ties resolve to the first label."""
    validate_routability_weights(tensors)
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != FEATURE_DIM:
        raise ModelFormatError(f"features must be [n_slots, {FEATURE_DIM}], got {x.shape}")
    z = x.T  # [11, N]
    z = np.maximum(_conv1d_same(z, tensors["conv1.weight"], tensors["conv1.bias"]), 0.0)
    z = np.maximum(_conv1d_same(z, tensors["conv2.weight"], tensors["conv2.bias"]), 0.0)
    pooled = z.max(axis=1)  # [32]
    logits = tensors["dense.weight"] @ pooled + tensors["dense.bias"]
    ez = np.exp(logits - logits.max())
    probs = ez / ez.sum()
    return LABELS[int(np.argmax(probs))], probs


def zero_routability_weights() -> dict:
    return {name: np.zeros(shape) for name, shape in ROUTABILITY_MANIFEST.items()}


def random_routability_weights(rng: np.random.Generator) -> dict:
    tensors = {}
    for name, shape in ROUTABILITY_MANIFEST.items():
        if name.endswith(".bias"):
            tensors[name] = np.zeros(shape)
        else:
            fan_in = int(np.prod(shape[1:]))
            tensors[name] = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)
    return tensors
