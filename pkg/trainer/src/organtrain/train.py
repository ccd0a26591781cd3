"""Training loop: Adam + per-step cosine learning-rate decay + elastic-net
penalty on the weight matrices."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
import torch
import torch.nn.functional as F

from .config import TrainConfig, cosine_lr
from .data import DescriptorCorpus, split_indices
from .net import PointClassifierNet, weight_matrices


@dataclass
class TrainResult:
    epochs_run: int
    steps: int
    train_loss: float
    train_accuracy: float
    val_loss: float | None
    val_accuracy: float | None


def l1_l2_penalty(net: PointClassifierNet, coeff: float) -> torch.Tensor:
    """coeff * (sum |W| + sum W^2) over linear weight matrices only."""
    total = torch.zeros((), dtype=torch.float32)
    for w in weight_matrices(net):
        total = total + w.abs().sum() + w.pow(2).sum()
    return coeff * total


@torch.no_grad()
def evaluate(net: PointClassifierNet, corpus: DescriptorCorpus,
             indices: np.ndarray, batch_size: int) -> tuple[float, float]:
    """Mean cross-entropy and accuracy over the given rows."""
    net.eval()
    loss_sum = 0.0
    correct = 0
    for start in range(0, indices.size, batch_size):
        x_np, y_np = corpus.gather(indices[start:start + batch_size])
        x = torch.from_numpy(x_np)
        y = torch.from_numpy(y_np)
        logits = net(x)
        loss_sum += F.cross_entropy(logits, y, reduction="sum").item()
        correct += (logits.argmax(dim=1) == y).sum().item()
    n = int(indices.size)
    return loss_sum / n, correct / n


def train(corpus: DescriptorCorpus, cfg: TrainConfig,
          log: Callable[[str], None] | None = None,
          ) -> tuple[PointClassifierNet, TrainResult]:
    """Train a classifier on the corpus; returns the net in eval mode.

    The cosine schedule spans the full planned horizon (epochs *
    steps-per-epoch); early stopping simply truncates it. Reported train
    loss is the data term (cross-entropy) without the penalty.
    """
    num_classes = corpus.num_classes
    corpus.validate_labels(num_classes)
    torch.manual_seed(cfg.seed)
    net = PointClassifierNet(corpus.descriptor_dim, cfg.hidden, cfg.blocks,
                             num_classes, dropout=cfg.dropout)

    train_idx, val_idx = split_indices(len(corpus), cfg.val_split, cfg.seed)
    steps_per_epoch = max(1, math.ceil(train_idx.size / cfg.batch_size))
    total_steps = cfg.epochs * steps_per_epoch

    optimizer = torch.optim.Adam(net.parameters(), lr=cfg.lr_init)
    scheduler = torch.optim.lr_scheduler.LambdaLR(
        optimizer,
        lambda step: cosine_lr(cfg, min(step, total_steps - 1), total_steps)
        / cfg.lr_init)

    shuffle_rng = np.random.Generator(np.random.PCG64(cfg.seed + 1))
    result = TrainResult(0, 0, math.nan, math.nan, None, None)
    for epoch in range(cfg.epochs):
        net.train()
        order = shuffle_rng.permutation(train_idx)
        loss_sum = 0.0
        correct = 0
        for start in range(0, order.size, cfg.batch_size):
            x_np, y_np = corpus.gather(order[start:start + cfg.batch_size])
            x = torch.from_numpy(x_np)
            y = torch.from_numpy(y_np)
            logits = net(x)
            data_loss = F.cross_entropy(logits, y)
            loss = data_loss + l1_l2_penalty(net, cfg.l1_l2_coeff)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            scheduler.step()
            result.steps += 1
            loss_sum += data_loss.item() * y.size(0)
            correct += (logits.argmax(dim=1) == y).sum().item()

        result.epochs_run = epoch + 1
        result.train_loss = loss_sum / order.size
        result.train_accuracy = correct / order.size
        if val_idx.size:
            result.val_loss, result.val_accuracy = evaluate(
                net, corpus, val_idx, cfg.batch_size)
        if log:
            val_part = (f" val_loss={result.val_loss:.4f}"
                        f" val_acc={result.val_accuracy:.4f}"
                        if val_idx.size else "")
            log(f"epoch {epoch + 1}/{cfg.epochs}"
                f" lr={scheduler.get_last_lr()[0]:.3e}"
                f" train_loss={result.train_loss:.4f}"
                f" train_acc={result.train_accuracy:.4f}{val_part}")
        if (cfg.stop_at_val_accuracy is not None
                and result.val_accuracy is not None
                and result.val_accuracy >= cfg.stop_at_val_accuracy):
            break

    net.eval()
    return net, result


def training_summary(cfg: TrainConfig, corpus: DescriptorCorpus,
                     label_names: list[str], result: TrainResult) -> dict:
    """The JSON sidecar written next to exported weights."""
    return {
        "config": asdict(cfg),
        "optimizer": "adam",
        "num_classes": corpus.num_classes,
        "label_names": label_names,
        "dataset": {
            "files": [str(p) for p in corpus.paths],
            "rows": len(corpus),
            "descriptor_dim": corpus.descriptor_dim,
        },
        "result": asdict(result),
    }
