"""Segmentation and classification evaluation: Dice, accuracy, macro-F1."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimsMismatch, EmptyCounts
from .volume import LabelMask


@dataclass(frozen=True)
class ConfusionCounts:
    num_classes: int
    matrix: np.ndarray  # (C, C) int64, rows = true class, cols = predicted

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=np.int64)
        if m.shape != (self.num_classes, self.num_classes):
            raise ValueError(f"matrix shape {m.shape} for {self.num_classes} classes")
        if m.min() < 0:
            raise ValueError("confusion counts must be non-negative")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_labels(cls, truth: np.ndarray, pred: np.ndarray, num_classes: int) -> "ConfusionCounts":
        t = np.asarray(truth).ravel().astype(np.int64)
        p = np.asarray(pred).ravel().astype(np.int64)
        if t.size != p.size:
            raise DimsMismatch(f"{t.size} truth labels vs {p.size} predictions")
        m = np.bincount(t * num_classes + p, minlength=num_classes**2)
        return cls(num_classes, m.reshape(num_classes, num_classes))

    @property
    def total(self) -> int:
        return int(self.matrix.sum())


def dice_per_class(pred: LabelMask, truth: LabelMask) -> np.ndarray:
    """Dice overlap for every foreground class 1..C-1.

    Both masks empty for a class scores 1.0; exactly one empty scores 0.0.
    Background (class 0) is excluded; average over the returned vector to
    get the usual all-organ summary.
    """
    if pred.dims != truth.dims:
        raise DimsMismatch(f"pred dims {pred.dims} != truth dims {truth.dims}")
    num_classes = max(pred.num_classes, truth.num_classes)
    p, t = pred.labels.astype(np.int64), truth.labels.astype(np.int64)
    pred_sizes = np.bincount(p, minlength=num_classes)
    truth_sizes = np.bincount(t, minlength=num_classes)
    inter = np.bincount(t[p == t], minlength=num_classes)

    denom = pred_sizes + truth_sizes
    dice = np.ones(num_classes, dtype=np.float64)
    nonempty = denom > 0
    dice[nonempty] = 2.0 * inter[nonempty] / denom[nonempty]
    return dice[1:]


def accuracy_and_macro_f1(counts: ConfusionCounts) -> tuple[float, float]:
    """Overall accuracy and the unweighted mean F1 over ALL classes (background included)."""
    total = counts.total
    if total == 0:
        raise EmptyCounts("confusion matrix holds no observations")
    m = counts.matrix
    tp = np.diag(m).astype(np.float64)
    col = m.sum(axis=0).astype(np.float64)
    row = m.sum(axis=1).astype(np.float64)
    precision = np.divide(tp, col, out=np.zeros_like(tp), where=col > 0)
    recall = np.divide(tp, row, out=np.zeros_like(tp), where=row > 0)
    pr = precision + recall
    f1 = np.divide(2 * precision * recall, pr, out=np.zeros_like(tp), where=pr > 0)
    return float(tp.sum() / total), float(f1.mean())


def boundary_band(labels_grid: np.ndarray, radius_vox) -> np.ndarray:
    """Voxels within a Chebyshev radius of a label change, per axis radii (rx, ry, rz).

    A voxel is in the band iff some voxel at most radius away along each
    axis carries a different label. Used to bound where refinement may
    legitimately disagree with brute force.
    """
    lab = np.asarray(labels_grid)
    nz, ny, nx = lab.shape
    rx, ry, rz = (int(r) for r in radius_vox)
    band = np.zeros(lab.shape, dtype=bool)
    for dz in range(-rz, rz + 1):
        zc = np.clip(np.arange(nz) + dz, 0, nz - 1)
        for dy in range(-ry, ry + 1):
            yc = np.clip(np.arange(ny) + dy, 0, ny - 1)
            for dx in range(-rx, rx + 1):
                if dx == 0 and dy == 0 and dz == 0:
                    continue
                xc = np.clip(np.arange(nx) + dx, 0, nx - 1)
                band |= lab[np.ix_(zc, yc, xc)] != lab
    return band
