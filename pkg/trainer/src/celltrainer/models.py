"""Torch models mirroring the layout tool's inference architectures, plus
the edge-conditioned graph network for the placement policy."""

from __future__ import annotations

import numpy as np
import torch
import torch.nn as nn

CONV_CHANNELS = (3, 64, 128, 256, 512)


class FixPolicy(nn.Module):
    """Width-agnostic conv policy/value net over [B, 3, H, W] observations.

    Four same-shape 3x3 convolutions to a 512-channel embedding; a shared
    per-pixel MLP produces action logits, the average-pooled embedding
    feeds the value MLP.
    """

    def __init__(self):
        super().__init__()
        self.convs = nn.ModuleList([
            nn.Conv2d(CONV_CHANNELS[i], CONV_CHANNELS[i + 1], 3, padding=1)
            for i in range(4)])
        self.policy_mlp = nn.Sequential(
            nn.Linear(512, 64), nn.ReLU(), nn.Linear(64, 64), nn.ReLU(),
            nn.Linear(64, 1))
        self.value_mlp = nn.Sequential(
            nn.Linear(512, 64), nn.ReLU(), nn.Linear(64, 64), nn.ReLU(),
            nn.Linear(64, 1))

    def forward(self, obs: torch.Tensor):
        """(masked logits [B, H*W], value [B]); mask comes from obs plane 1."""
        x = obs
        for conv in self.convs:
            x = torch.relu(conv(x))
        b, c, h, w = x.shape
        emb = x.reshape(b, c, h * w).transpose(1, 2)      # [B, HW, 512]
        logits = self.policy_mlp(emb).squeeze(-1)          # [B, HW]
        value = self.value_mlp(emb.mean(dim=1)).squeeze(-1)
        mask = obs[:, 1].reshape(b, h * w) > 0.5
        logits = logits.masked_fill(~mask, float("-inf"))
        return logits, value

    def export_tensors(self) -> dict:
        out = {}
        for i, conv in enumerate(self.convs, start=1):
            out[f"conv{i}.weight"] = conv.weight.detach().numpy().astype(np.float64)
            out[f"conv{i}.bias"] = conv.bias.detach().numpy().astype(np.float64)
        for head, mlp in (("policy", self.policy_mlp), ("value", self.value_mlp)):
            for j, layer in enumerate((mlp[0], mlp[2], mlp[4]), start=1):
                out[f"{head}.fc{j}.weight"] = layer.weight.detach().numpy().astype(np.float64)
                out[f"{head}.fc{j}.bias"] = layer.bias.detach().numpy().astype(np.float64)
        return out

    def load_tensors(self, tensors: dict) -> "FixPolicy":
        with torch.no_grad():
            for i, conv in enumerate(self.convs, start=1):
                conv.weight.copy_(torch.as_tensor(tensors[f"conv{i}.weight"], dtype=torch.float32))
                conv.bias.copy_(torch.as_tensor(tensors[f"conv{i}.bias"], dtype=torch.float32))
            for head, mlp in (("policy", self.policy_mlp), ("value", self.value_mlp)):
                for j, layer in enumerate((mlp[0], mlp[2], mlp[4]), start=1):
                    layer.weight.copy_(torch.as_tensor(tensors[f"{head}.fc{j}.weight"], dtype=torch.float32))
                    layer.bias.copy_(torch.as_tensor(tensors[f"{head}.fc{j}.bias"], dtype=torch.float32))
        return self


class RoutabilityNet(nn.Module):
    """Two kernel-3 1D convolutions, global max-pool, dense 3-way head."""

    def __init__(self, feature_dim: int = 11):
        super().__init__()
        self.conv1 = nn.Conv1d(feature_dim, 32, 3, padding=1)
        self.conv2 = nn.Conv1d(32, 32, 3, padding=1)
        self.dense = nn.Linear(32, 3)

    def forward(self, feats: torch.Tensor):
        """feats [B, N, 11] -> logits [B, 3]."""
        x = feats.transpose(1, 2)
        x = torch.relu(self.conv1(x))
        x = torch.relu(self.conv2(x))
        return self.dense(x.max(dim=2).values)

    def export_tensors(self) -> dict:
        return {
            "conv1.weight": self.conv1.weight.detach().numpy().astype(np.float64),
            "conv1.bias": self.conv1.bias.detach().numpy().astype(np.float64),
            "conv2.weight": self.conv2.weight.detach().numpy().astype(np.float64),
            "conv2.bias": self.conv2.bias.detach().numpy().astype(np.float64),
            "dense.weight": self.dense.weight.detach().numpy().astype(np.float64),
            "dense.bias": self.dense.bias.detach().numpy().astype(np.float64),
        }


class EdgeConv(nn.Module):
    """One edge-conditioned convolution: h'_i = W h_i + sum_j M(e_ij) h_j,
    where M maps edge features to an out x in matrix."""

    def __init__(self, in_dim: int, out_dim: int, edge_dim: int):
        super().__init__()
        self.lin = nn.Linear(in_dim, out_dim)
        self.edge_net = nn.Linear(edge_dim, in_dim * out_dim)
        self.in_dim, self.out_dim = in_dim, out_dim

    def forward(self, h, edge_index, edge_attr):
        out = self.lin(h)
        if edge_index.numel():
            src, dst = edge_index
            mats = self.edge_net(edge_attr).view(-1, self.out_dim, self.in_dim)
            msgs = torch.bmm(mats, h[src].unsqueeze(-1)).squeeze(-1)
            out = out.index_add(0, dst, msgs)
        return out


class PlacerPolicy(nn.Module):
    """Graph placement policy: 3 edge-conditioned layers at hidden 64; the
    action head scores candidates by the elementwise product of their
    embeddings with the most recently placed PMOS/NMOS embeddings; the
    value head is a two-layer MLP on the mean-pooled embedding."""

    def __init__(self, node_dim: int, edge_dim: int, hidden: int = 64, layers: int = 3):
        super().__init__()
        dims = [node_dim] + [hidden] * layers
        self.layers = nn.ModuleList(
            [EdgeConv(dims[i], dims[i + 1], edge_dim) for i in range(layers)])
        self.action_head = nn.Linear(2 * hidden, 1)
        self.value_mlp = nn.Sequential(nn.Linear(hidden, 64), nn.ReLU(),
                                       nn.Linear(64, 1))

    def embed(self, node_feats, edge_index, edge_attr):
        h = node_feats
        for layer in self.layers:
            h = torch.relu(layer(h, edge_index, edge_attr))
        return h

    def action_logits(self, h, candidates, last_p: int, last_n: int):
        ctx_p, ctx_n = h[last_p], h[last_n]
        cand = h[candidates]
        feats = torch.cat([cand * ctx_p, cand * ctx_n], dim=1)
        return self.action_head(feats).squeeze(-1)

    def value(self, h):
        return self.value_mlp(h.mean(dim=0)).squeeze(-1)
