"""Train the 1D-conv routability classifier on gen-dataset JSONL records."""

from __future__ import annotations

import json
import random

import numpy as np
import torch
import torch.nn.functional as F

from .models import RoutabilityNet
from .weights_io import save_weights


def load_dataset(path):
    records = []
    with open(path) as f:
        for line in f:
            if line.strip():
                records.append(json.loads(line))
    return records


def _batchify(records, pad_to=None):
    """Zero-pad variable slot counts into one [B, N, 11] tensor."""
    n = pad_to or max(len(r["features"]) for r in records)
    feats = np.zeros((len(records), n, 11), dtype=np.float32)
    labels = np.zeros(len(records), dtype=np.int64)
    for i, r in enumerate(records):
        f = np.asarray(r["features"], dtype=np.float32)
        feats[i, :len(f)] = f
        labels[i] = r["label"]
    return torch.from_numpy(feats), torch.from_numpy(labels)


def train_routability(records, epochs: int = 200, lr: float = 1e-2,
                      holdout: float = 0.1, seed: int = 0, out_path=None,
                      log=print):
    """90/10 split, cross-entropy training; returns (net, held-out accuracy)."""
    rng = random.Random(seed)
    torch.manual_seed(seed)
    order = list(range(len(records)))
    rng.shuffle(order)
    cut = max(1, int(len(records) * holdout))
    test_idx, train_idx = order[:cut], order[cut:]
    pad = max(len(r["features"]) for r in records)
    x_train, y_train = _batchify([records[i] for i in train_idx], pad)
    x_test, y_test = _batchify([records[i] for i in test_idx], pad)
    net = RoutabilityNet()
    opt = torch.optim.Adam(net.parameters(), lr=lr)
    for epoch in range(epochs):
        logits = net(x_train)
        loss = F.cross_entropy(logits, y_train)
        opt.zero_grad()
        loss.backward()
        opt.step()
        if epoch % 50 == 0:
            log(json.dumps({"epoch": epoch, "loss": loss.item()}))
    with torch.inference_mode():
        accuracy = float((net(x_test).argmax(dim=1) == y_test).float().mean())
    if out_path:
        save_weights(out_path, net.export_tensors())
    return net, accuracy
