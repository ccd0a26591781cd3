"""Training example generation: point sampling and the ORGD descriptor format.

Points are drawn from a seeded numpy PCG64 generator so the same
(volume, mask, spec) always produces a byte-identical dataset. Draw order
defines row order: the global uniform block first, then the balanced block
per class in ascending label order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import EmptyMask, MalformedHeader, TruncatedData, UnsupportedVersion
from .sampler import DESCRIPTOR_DIM, VoxelOffsetTable, extract_descriptors
from .volume import LabelMask, Volume, check_mask_pairing

DATASET_MAGIC = b"ORGD"
DATASET_VERSION = 1

_DATASET_HEADER = struct.Struct("<4sIIQ")


@dataclass(frozen=True)
class SampleSpec:
    per_image_count: int = 100_000
    balanced_fraction: float = 0.10
    rng_seed: int = 0

    def __post_init__(self):
        if self.per_image_count <= 0:
            raise ValueError("per_image_count must be positive")
        if not 0.0 <= self.balanced_fraction <= 1.0:
            raise ValueError("balanced_fraction must be within [0, 1]")


def _row_dtype(dim: int) -> np.dtype:
    return np.dtype([("values", "<f4", (dim,)), ("label", "<u2")])


@dataclass(frozen=True)
class DescriptorDataset:
    rows: np.ndarray  # (count, dim) float32
    labels: np.ndarray  # (count,) uint16

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.float32)
        labels = np.ascontiguousarray(self.labels, dtype=np.uint16).ravel()
        if rows.ndim != 2 or rows.shape[0] != labels.size:
            raise ValueError(f"rows {rows.shape} do not pair with {labels.size} labels")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    @property
    def count(self) -> int:
        return self.rows.shape[0]

    @property
    def descriptor_dim(self) -> int:
        return self.rows.shape[1]


def sample_points(v: Volume, m: LabelMask, spec: SampleSpec) -> tuple[np.ndarray, np.ndarray]:
    """Draw (points (N, 3) int, labels (N,) uint16) per the sampling spec.

    round(balanced_fraction * count) points are split equally across the
    classes present in the mask (ties in the split go to the lowest class
    indices); the rest are uniform over all voxels. Sampling is with
    replacement.
    """
    check_mask_pairing(v, m)
    total_voxels = m.labels.size
    if total_voxels == 0:
        raise EmptyMask("mask has no voxels")

    n = spec.per_image_count
    n_balanced = int(np.floor(spec.balanced_fraction * n + 0.5))
    n_uniform = n - n_balanced
    rng = np.random.Generator(np.random.PCG64(spec.rng_seed))

    flat = [rng.integers(0, total_voxels, size=n_uniform)]
    if n_balanced:
        present = np.unique(m.labels)
        share, extra = divmod(n_balanced, present.size)
        for rank, c in enumerate(present):
            want = share + (1 if rank < extra else 0)
            voxels = np.flatnonzero(m.labels == c)
            flat.append(voxels[rng.integers(0, voxels.size, size=want)])
    flat = np.concatenate(flat)

    nx, ny, _ = m.dims
    points = np.stack([flat % nx, (flat // nx) % ny, flat // (nx * ny)], axis=1)
    return points, m.labels[flat]


def build_rows(v: Volume, points: np.ndarray, table: VoxelOffsetTable) -> np.ndarray:
    """Descriptor rows for sampled points, (N, 6561) float32."""
    return extract_descriptors(v, points, table)


def write_dataset(ds: DescriptorDataset) -> bytes:
    header = _DATASET_HEADER.pack(DATASET_MAGIC, DATASET_VERSION, ds.descriptor_dim, ds.count)
    packed = np.empty(ds.count, dtype=_row_dtype(ds.descriptor_dim))
    packed["values"] = ds.rows
    packed["label"] = ds.labels
    return header + packed.tobytes()


def read_dataset(data: bytes) -> DescriptorDataset:
    if len(data) < _DATASET_HEADER.size:
        raise TruncatedData(f"{len(data)} bytes is shorter than the ORGD header")
    magic, version, dim, count = _DATASET_HEADER.unpack_from(data, 0)
    if magic != DATASET_MAGIC:
        raise MalformedHeader(f"bad ORGD magic {magic!r}")
    if version != DATASET_VERSION:
        raise UnsupportedVersion(f"ORGD version {version}")
    dtype = _row_dtype(dim)
    need = count * dtype.itemsize
    payload = data[_DATASET_HEADER.size:]
    if len(payload) < need:
        raise TruncatedData(f"expected {need} payload bytes, found {len(payload)}")
    if len(payload) > need:
        raise MalformedHeader(f"{len(payload) - need} trailing bytes after rows")
    packed = np.frombuffer(payload, dtype=dtype, count=count)
    return DescriptorDataset(packed["values"].copy(), packed["label"].copy())


def format_manifest(volume_id: str, points: np.ndarray, labels: np.ndarray) -> str:
    """One 'volume_id i j k label' line per dataset row."""
    lines = [
        f"{volume_id} {p[0]} {p[1]} {p[2]} {label}"
        for p, label in zip(points, labels)
    ]
    return "\n".join(lines) + "\n"


def parse_manifest(text: str) -> tuple[list[str], np.ndarray, np.ndarray]:
    ids, pts, labs = [], [], []
    for line in text.splitlines():
        if not line.strip():
            continue
        vid, i, j, k, label = line.split()
        ids.append(vid)
        pts.append((int(i), int(j), int(k)))
        labs.append(int(label))
    return ids, np.array(pts, dtype=np.int64).reshape(-1, 3), np.array(labs, dtype=np.uint16)


def export_dataset(v: Volume, m: LabelMask, spec: SampleSpec, table: VoxelOffsetTable,
                   volume_id: str = "volume") -> tuple[bytes, str]:
    """Sample points, extract their descriptors, serialize rows + manifest."""
    points, labels = sample_points(v, m, spec)
    ds = DescriptorDataset(build_rows(v, points, table), labels)
    return write_dataset(ds), format_manifest(volume_id, points, labels)
