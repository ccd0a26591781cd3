"""Hierarchical coarse-to-fine segmentation driven by a point classifier.

A coarse regular grid (default 8 mm) is classified and block-filled, then
successively finer grids (default 4 mm, 2 mm) re-examine each grid point's
3x3x3 neighborhood at the finer stride: unanimous neighborhoods keep their
label, neighborhoods where one label holds a qualified majority (>= 20 of
27) are smoothed without a classifier call, and only genuinely mixed points
are queued for classification.

The qualified-majority shortcut is applied only at the final level; levels
in between queue every non-unanimous point. A majority measured over a
still-coarse block-filled mask can entrench a mislabeled cell that finer
levels then see as locally unanimous, pushing errors several voxels past
the true boundary, whereas at the final level a smoothed label can land at
most one cell away. The final level also holds most of the grid points, so
nearly all of the shortcut's savings are preserved.

Point assignments depend only on point identity, so results are identical
for any worker count.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .sampler import round_half_away_from_zero
from .volume import LabelMask, Volume

MAJORITY_THRESHOLD = 20
NEIGHBORHOOD = 27


class PointClassifier(Protocol):
    """Pure, deterministic, concurrency-safe mapping of (volume, point) to a label."""

    def classify(self, volume: Volume, point: tuple[int, int, int]) -> int:
        ...


@dataclass(frozen=True)
class GridLevel:
    spacing_mm: float
    stride_vox: tuple[int, int, int]

    @classmethod
    def for_volume(cls, spacing_mm: float, volume: Volume) -> "GridLevel":
        if not spacing_mm > 0:
            raise ValueError(f"level spacing {spacing_mm!r} must be positive")
        stride = tuple(
            max(1, int(round_half_away_from_zero(spacing_mm / s)))
            for s in volume.spacing_mm
        )
        return cls(float(spacing_mm), stride)


@dataclass
class SegmentationStats:
    classifier_calls: int = 0
    smoothed_assignments: int = 0
    points_per_level: list[int] = field(default_factory=list)
    phase_seconds: list[tuple[str, float]] = field(default_factory=list)

    def add(self, other: "SegmentationStats") -> None:
        self.classifier_calls += other.classifier_calls
        self.smoothed_assignments += other.smoothed_assignments
        self.points_per_level.extend(other.points_per_level)
        self.phase_seconds.extend(other.phase_seconds)


def _classify_points(volume: Volume, classifier: PointClassifier,
                     points: np.ndarray, threads: int) -> np.ndarray:
    """Classify (N, 3) voxel points; the result depends only on point order."""
    n = points.shape[0]
    out = np.empty(n, dtype=np.uint16)

    def work(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            p = (int(points[i, 0]), int(points[i, 1]), int(points[i, 2]))
            out[i] = classifier.classify(volume, p)

    if threads > 1 and n > 1:
        bounds = np.linspace(0, n, min(threads * 4, n) + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda ab: work(ab[0], ab[1]), zip(bounds[:-1], bounds[1:])))
    else:
        work(0, n)
    return out


def _grid_axes(volume: Volume, level: GridLevel):
    nx, ny, nz = volume.dims
    sx, sy, sz = level.stride_vox
    return (np.arange(0, nx, sx), np.arange(0, ny, sy), np.arange(0, nz, sz))


def _block_fill(grid_labels: np.ndarray, level: GridLevel, volume: Volume) -> np.ndarray:
    """Expand (gz, gy, gx) grid labels to volume resolution, cells anchored at grid points."""
    nx, ny, nz = volume.dims
    sx, sy, sz = level.stride_vox
    full = np.repeat(np.repeat(np.repeat(grid_labels, sz, axis=0), sy, axis=1), sx, axis=2)
    return full[:nz, :ny, :nx]


def coarse_segment(volume: Volume, classifier: PointClassifier, level: GridLevel,
                   threads: int = 1) -> LabelMask:
    """Classify every point of a sparse grid and block-fill the cells."""
    xs, ys, zs = _grid_axes(volume, level)
    gx, gy, gz = len(xs), len(ys), len(zs)
    kk, jj, ii = np.meshgrid(zs, ys, xs, indexing="ij")
    points = np.stack([ii.ravel(), jj.ravel(), kk.ravel()], axis=1)
    labels = _classify_points(volume, classifier, points, threads)
    grid_labels = labels.reshape(gz, gy, gx)
    filled = _block_fill(grid_labels, level, volume)
    return LabelMask(volume.dims, filled.ravel(), int(grid_labels.max()) + 1)


def refine_level(volume: Volume, classifier: PointClassifier, mask: LabelMask,
                 level: GridLevel, threads: int = 1,
                 majority_threshold: int = MAJORITY_THRESHOLD,
                 ) -> tuple[LabelMask, SegmentationStats]:
    """One refinement pass of a coarser mask at a finer grid level.

    For each finer grid point, the 27 labels of its 3x3x3 neighborhood at
    the finer stride are read from ``mask`` (out-of-volume neighbors clamp
    to the nearest in-bounds voxel). Unanimous points keep their label; a
    label with count >= majority_threshold is assigned without a call;
    everything else is queued for the classifier.
    """
    t0 = time.perf_counter()
    if volume.dims != mask.dims:
        raise ValueError(f"mask dims {mask.dims} do not match volume dims {volume.dims}")
    nx, ny, nz = volume.dims
    sx, sy, sz = level.stride_vox
    xs, ys, zs = _grid_axes(volume, level)
    gx, gy, gz = len(xs), len(ys), len(zs)
    mask3d = mask.grid

    stack = np.empty((NEIGHBORHOOD, gz, gy, gx), dtype=np.uint16)
    n = 0
    for dz in (-1, 0, 1):
        zc = np.clip(zs + dz * sz, 0, nz - 1)
        for dy in (-1, 0, 1):
            yc = np.clip(ys + dy * sy, 0, ny - 1)
            for dx in (-1, 0, 1):
                xc = np.clip(xs + dx * sx, 0, nx - 1)
                stack[n] = mask3d[np.ix_(zc, yc, xc)]
                n += 1
    center = stack[13]
    grid_labels = center.copy()

    mixed = np.flatnonzero(~(stack == center).all(axis=0))
    sub = stack.reshape(NEIGHBORHOOD, -1)[:, mixed]
    best_count = np.zeros(mixed.size, dtype=np.uint8)
    best_label = np.zeros(mixed.size, dtype=np.uint16)
    for c in np.unique(sub):
        count = (sub == c).sum(axis=0, dtype=np.uint8)
        better = count > best_count
        best_count[better] = count[better]
        best_label[better] = c
    smoothed = best_count >= majority_threshold
    grid_labels.reshape(-1)[mixed[smoothed]] = best_label[smoothed]

    queued = mixed[~smoothed]
    kq, jq, iq = np.unravel_index(queued, (gz, gy, gx))
    points = np.stack([iq * sx, jq * sy, kq * sz], axis=1)
    labels = _classify_points(volume, classifier, points, threads)
    grid_labels.reshape(-1)[queued] = labels

    filled = _block_fill(grid_labels, level, volume)
    num_classes = max(mask.num_classes, int(grid_labels.max()) + 1)
    out = LabelMask(volume.dims, filled.ravel(), num_classes)
    stats = SegmentationStats(
        classifier_calls=int(queued.size),
        smoothed_assignments=int(smoothed.sum()),
        points_per_level=[gx * gy * gz],
        phase_seconds=[(f"refine_{level.spacing_mm:g}mm", time.perf_counter() - t0)],
    )
    return out, stats


def segment(volume: Volume, classifier: PointClassifier,
            levels_mm=(8.0, 4.0, 2.0), threads: int = 1,
            majority_threshold: int = MAJORITY_THRESHOLD,
            ) -> tuple[LabelMask, SegmentationStats]:
    """Full coarse-to-fine segmentation across strictly decreasing mm levels.

    Refinement levels before the last queue every non-unanimous grid point
    for classification (no majority shortcut); ``majority_threshold``
    applies at the final level only. See the module docstring for why.
    """
    levels = [float(s) for s in levels_mm]
    if not levels:
        raise ValueError("at least one grid level required")
    if any(b >= a for a, b in zip(levels, levels[1:])):
        raise ValueError(f"levels must be strictly decreasing, got {levels}")

    stats = SegmentationStats()
    first = GridLevel.for_volume(levels[0], volume)
    t0 = time.perf_counter()
    mask = coarse_segment(volume, classifier, first, threads=threads)
    xs, ys, zs = _grid_axes(volume, first)
    stats.classifier_calls += len(xs) * len(ys) * len(zs)
    stats.points_per_level.append(len(xs) * len(ys) * len(zs))
    stats.phase_seconds.append(
        (f"coarse_{first.spacing_mm:g}mm", time.perf_counter() - t0)
    )

    for i, spacing in enumerate(levels[1:], start=1):
        level = GridLevel.for_volume(spacing, volume)
        threshold = majority_threshold if i == len(levels) - 1 else NEIGHBORHOOD
        mask, level_stats = refine_level(
            volume, classifier, mask, level,
            threads=threads, majority_threshold=threshold,
        )
        stats.add(level_stats)
    return mask, stats


def brute_force_segment(volume: Volume, classifier: PointClassifier,
                        threads: int = 1) -> LabelMask:
    """Classify every voxel independently. The slow reference everything else is checked against."""
    nx, ny, nz = volume.dims
    out = np.empty((nz, ny, nx), dtype=np.uint16)
    jj, ii = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
    for k in range(nz):  # per-slice to bound the point buffer
        points = np.stack([ii.ravel(), jj.ravel(), np.full(nx * ny, k)], axis=1)
        out[k] = _classify_points(volume, classifier, points, threads).reshape(ny, nx)
    return LabelMask(volume.dims, out.ravel(), int(out.max()) + 1)
