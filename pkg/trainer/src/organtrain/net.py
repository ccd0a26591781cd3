"""Residual MLP point classifier, numerically matched to the runtime engine.

Architecture (float32 throughout):

    h = silu(proj(x))
    for each block:
        t = silu(ln1(fc1(h)))
        t = dropout(t)            # training only
        u = ln2(fc2(t))
        h = h + u
    logits = head(h)

LayerNorm uses eps=1e-5 inside the square root, matching the engine's
per-vector standardization. Dropout sits after the first activation of each
block, so it never perturbs inference: in eval mode the network computes
exactly what the runtime computes from the exported weights.
"""

from __future__ import annotations

from collections.abc import Iterator

import torch
import torch.nn.functional as F
from torch import nn


class ResidualBlock(nn.Module):
    def __init__(self, hidden: int, dropout: float) -> None:
        super().__init__()
        self.fc1 = nn.Linear(hidden, hidden)
        self.ln1 = nn.LayerNorm(hidden, eps=1e-5)
        self.drop = nn.Dropout(dropout)
        self.fc2 = nn.Linear(hidden, hidden)
        self.ln2 = nn.LayerNorm(hidden, eps=1e-5)

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        t = F.silu(self.ln1(self.fc1(h)))
        t = self.drop(t)
        u = self.ln2(self.fc2(t))
        return h + u


class PointClassifierNet(nn.Module):
    def __init__(self, input_dim: int, hidden: int, blocks: int,
                 num_classes: int, dropout: float = 0.0) -> None:
        super().__init__()
        self.input_dim = input_dim
        self.hidden = hidden
        self.num_classes = num_classes
        self.proj = nn.Linear(input_dim, hidden)
        self.blocks = nn.ModuleList(
            ResidualBlock(hidden, dropout) for _ in range(blocks))
        self.head = nn.Linear(hidden, num_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = F.silu(self.proj(x))
        for block in self.blocks:
            h = block(h)
        return self.head(h)


def weight_matrices(net: PointClassifierNet) -> Iterator[torch.Tensor]:
    """The 2-D weight tensors (projection, block linears, head) — the only
    parameters the sparsity penalty applies to. Biases and norm affine
    parameters are excluded."""
    for module in net.modules():
        if isinstance(module, nn.Linear):
            yield module.weight
