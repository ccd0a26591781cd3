"""Fixed 6561-offset multi-resolution sampling pattern and descriptor extraction.

The pattern combines three orthogonal 27x27 planes at 4 mm resolution with
six 9x9x9 cubes at 2, 3, 5, 12, 28, and 64 mm. Offsets are defined in
millimeters once and bound to a volume's voxel spacing by rounding, so a
descriptor costs exactly 6561 memory lookups regardless of volume size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveSpacing, SpacingMismatch
from .volume import Volume

DESCRIPTOR_DIM = 6561
PLANE_STEP_MM = 4.0
PLANE_HALF = 13  # in-plane indices -13..+13 -> 27 per axis
CUBE_HALF = 4  # indices -4..+4 -> 9 per axis
CUBE_STEPS_MM = (2.0, 3.0, 5.0, 12.0, 28.0, 64.0)
NORM_DIVISOR = 128.0
CLIP_LIMIT = 4.0

# (kind, (fast axis, slow axis)) for the three planes; the remaining axis
# stays at offset 0.
_PLANE_AXES = (
    ("plane-axial", (0, 1)),
    ("plane-coronal", (0, 2)),
    ("plane-sagittal", (1, 2)),
)


@dataclass(frozen=True)
class BlockSpec:
    kind: str  # plane-axial | plane-coronal | plane-sagittal | cube
    resolution_mm: float
    extent: int  # grid points per axis (27 for planes, 9 for cubes)

    @property
    def size(self) -> int:
        return self.extent**2 if self.kind.startswith("plane") else self.extent**3


@dataclass(frozen=True)
class OffsetTable:
    """Canonical millimeter sampling offsets, (6561, 3) as (x, y, z)."""

    offsets_mm: np.ndarray
    block_layout: tuple[BlockSpec, ...]


@dataclass(frozen=True)
class VoxelOffsetTable:
    """OffsetTable bound to one voxel spacing: integer voxel displacements."""

    offsets_vox: np.ndarray  # (6561, 3) int32
    bound_spacing_mm: tuple[float, float, float]


def round_half_away_from_zero(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer with ties going away from zero."""
    x = np.asarray(x, dtype=np.float64)
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def build_offset_table() -> OffsetTable:
    """Build the canonical sampling pattern.

    Block order is the three planes then the cubes by ascending resolution.
    Within a block offsets are enumerated row-major with x fastest (planes:
    first in-plane axis fastest), indices ascending from -N to +N.
    """
    blocks: list[BlockSpec] = []
    parts: list[np.ndarray] = []

    plane_steps = np.arange(-PLANE_HALF, PLANE_HALF + 1, dtype=np.float64) * PLANE_STEP_MM
    n = plane_steps.size
    for kind, (fast, slow) in _PLANE_AXES:
        out = np.zeros((n * n, 3))
        out[:, fast] = np.tile(plane_steps, n)
        out[:, slow] = np.repeat(plane_steps, n)
        parts.append(out)
        blocks.append(BlockSpec(kind, PLANE_STEP_MM, n))

    for step in CUBE_STEPS_MM:
        q = np.arange(-CUBE_HALF, CUBE_HALF + 1, dtype=np.float64) * step
        m = q.size
        out = np.zeros((m**3, 3))
        out[:, 0] = np.tile(q, m * m)
        out[:, 1] = np.tile(np.repeat(q, m), m)
        out[:, 2] = np.repeat(q, m * m)
        parts.append(out)
        blocks.append(BlockSpec("cube", step, m))

    offsets = np.concatenate(parts, axis=0)
    assert offsets.shape == (DESCRIPTOR_DIM, 3)
    return OffsetTable(offsets, tuple(blocks))


def bind_to_spacing(table: OffsetTable, spacing_mm) -> VoxelOffsetTable:
    """Convert millimeter offsets to voxel offsets for one spacing."""
    spacing = np.asarray(spacing_mm, dtype=np.float64)
    if spacing.shape != (3,) or np.any(~np.isfinite(spacing)) or np.any(spacing <= 0):
        raise NonPositiveSpacing(f"spacing {spacing_mm!r} must be 3 positive reals")
    vox = round_half_away_from_zero(table.offsets_mm / spacing).astype(np.int32)
    return VoxelOffsetTable(vox, tuple(float(s) for s in spacing))


def ensure_bound(table: VoxelOffsetTable, v: Volume, rel_tol: float = 1e-6) -> None:
    """Raise unless the table was bound for this volume's spacing."""
    for bound, actual in zip(table.bound_spacing_mm, v.spacing_mm):
        if abs(bound - actual) > rel_tol * abs(actual):
            raise SpacingMismatch(
                f"table bound for spacing {table.bound_spacing_mm}, "
                f"volume has {v.spacing_mm}"
            )


@dataclass(frozen=True)
class Descriptor:
    """Normalized intensity samples at the 6561 offsets around one point."""

    values: np.ndarray  # (6561,) float32 in [-4, 4]
    origin_voxel: tuple[int, int, int] | None = None


def extract_descriptor(v: Volume, point, table: VoxelOffsetTable) -> Descriptor:
    """Sample the volume around ``point`` (integer voxel coords).

    Out-of-volume samples read 0; every sample is divided by 128 and clipped
    to [-4, 4]. The point itself may lie anywhere, including outside the
    volume.
    """
    ensure_bound(table, v)
    p = np.asarray(point, dtype=np.int64)
    raw = v.gather(p + table.offsets_vox)
    values = np.clip(raw * np.float32(1.0 / NORM_DIVISOR), -CLIP_LIMIT, CLIP_LIMIT)
    return Descriptor(values, (int(p[0]), int(p[1]), int(p[2])))


def extract_descriptors(v: Volume, points: np.ndarray, table: VoxelOffsetTable,
                        chunk: int = 1024) -> np.ndarray:
    """Batch form of extract_descriptor: (N, 3) points -> (N, 6561) float32."""
    ensure_bound(table, v)
    pts = np.asarray(points, dtype=np.int64).reshape(-1, 3)
    out = np.empty((pts.shape[0], DESCRIPTOR_DIM), dtype=np.float32)
    for start in range(0, pts.shape[0], chunk):
        block = pts[start:start + chunk]
        coords = (block[:, None, :] + table.offsets_vox[None, :, :]).reshape(-1, 3)
        raw = v.gather(coords).reshape(block.shape[0], DESCRIPTOR_DIM)
        np.clip(raw * np.float32(1.0 / NORM_DIVISOR), -CLIP_LIMIT, CLIP_LIMIT,
                out=out[start:start + block.shape[0]])
    return out


def decode_descriptor(d: Descriptor | np.ndarray) -> np.ndarray:
    """Lay a descriptor out as an 81x81 image of nine 27x27 tiles.

    Top tile row holds the three planes; the remaining six tiles are the
    cubes in resolution order, each cube shown as its nine 9x9 z-slices
    tiled 3x3 with z ascending row-major.
    """
    values = d.values if isinstance(d, Descriptor) else np.asarray(d)
    values = values.astype(np.float32, copy=False).ravel()
    if values.size != DESCRIPTOR_DIM:
        raise ValueError(f"descriptor must have {DESCRIPTOR_DIM} values, got {values.size}")

    img = np.empty((81, 81), dtype=np.float32)
    pos = 0
    for t in range(3):
        tile = values[pos:pos + 729].reshape(27, 27)  # rows = slow in-plane axis
        img[0:27, 27 * t:27 * (t + 1)] = tile
        pos += 729
    for t in range(6):
        row0 = 27 * (1 + t // 3)
        col0 = 27 * (t % 3)
        cube = values[pos:pos + 729].reshape(9, 9, 9)  # (z, y, x)
        for s in range(9):
            r = row0 + 9 * (s // 3)
            c = col0 + 9 * (s % 3)
            img[r:r + 9, c:c + 9] = cube[s]
        pos += 729
    return img


def image_to_pgm(img: np.ndarray) -> bytes:
    """Encode a descriptor image as binary PGM, mapping [-4, 4] to [0, 255]."""
    arr = np.asarray(img, dtype=np.float64)
    scaled = np.floor((arr + CLIP_LIMIT) * (255.0 / (2 * CLIP_LIMIT)) + 0.5)
    pixels = np.clip(scaled, 0, 255).astype(np.uint8)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    return header + pixels.tobytes()
