"""Training hyperparameters and the learning-rate schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    lr_init: float = 3e-4
    lr_final: float = 1e-6
    l1_l2_coeff: float = 1e-5
    dropout: float = 0.25
    hidden: int = 128
    blocks: int = 4
    batch_size: int = 1024
    val_split: float = 0.05
    seed: int = 0
    stop_at_val_accuracy: float | None = None
    """Stop after the first epoch whose validation accuracy reaches this."""

    def __post_init__(self):
        if self.epochs <= 0 or self.hidden <= 0 or self.blocks <= 0 \
                or self.batch_size <= 0:
            raise ValueError("epochs, hidden, blocks, and batch_size must be positive")
        if self.lr_init <= 0 or self.lr_final <= 0:
            raise ValueError("learning rates must be positive")
        if self.lr_final >= self.lr_init:
            raise ValueError(
                f"lr_final {self.lr_final} must be below lr_init {self.lr_init}")
        if self.l1_l2_coeff < 0:
            raise ValueError("l1_l2_coeff must be non-negative")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if not 0.0 <= self.val_split < 1.0:
            raise ValueError("val_split must be in [0, 1)")


def cosine_lr(cfg: TrainConfig, step: int, total_steps: int) -> float:
    """Cosine decay from lr_init at step 0 to exactly lr_final at the last step."""
    if not 0 <= step < total_steps:
        raise ValueError(f"step {step} outside [0, {total_steps})")
    if total_steps == 1:
        return cfg.lr_init
    span = cfg.lr_init - cfg.lr_final
    return cfg.lr_final + 0.5 * span * (1.0 + math.cos(math.pi * step / (total_steps - 1)))
