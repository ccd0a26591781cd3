"""Binary interchange formats shared with the segmentation engine.

The trainer talks to the engine only through files and its CLI, so the
layouts here are written against the byte-level contract, not against the
engine's code:

- ORGD descriptor datasets (read): ``<4sIIQ`` header (magic ``ORGD``,
  version, descriptor dim, row count) followed by packed rows of
  ``dim`` little-endian float32 values plus one uint16 label.
- ORGV volumes / ORGM label masks (write): ``<4sI3I3f`` header (magic,
  version, dims, mm spacing) followed by float32 intensities / uint16
  labels, x fastest.
- ORGC weight files (read/write): see ``export``.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

DATASET_MAGIC = b"ORGD"
DATASET_VERSION = 1
_DATASET_HEADER = struct.Struct("<4sIIQ")

VOLUME_MAGIC = b"ORGV"
MASK_MAGIC = b"ORGM"
VOLUME_VERSION = 1
_VOLUME_HEADER = struct.Struct("<4sI3I3f")


def row_dtype(dim: int) -> np.dtype:
    return np.dtype([("values", "<f4", (dim,)), ("label", "<u2")])


def open_rows(path: Path) -> np.memmap:
    """Memory-map an ORGD file's rows after validating its header."""
    path = Path(path)
    with path.open("rb") as fh:
        header = fh.read(_DATASET_HEADER.size)
    if len(header) < _DATASET_HEADER.size:
        raise FormatError(f"{path}: shorter than the ORGD header")
    magic, version, dim, count = _DATASET_HEADER.unpack(header)
    if magic != DATASET_MAGIC:
        raise FormatError(f"{path}: bad dataset magic {magic!r}")
    if version != DATASET_VERSION:
        raise FormatError(f"{path}: unsupported dataset version {version}")
    dtype = row_dtype(dim)
    expected = _DATASET_HEADER.size + count * dtype.itemsize
    actual = path.stat().st_size
    if actual != expected:
        raise FormatError(
            f"{path}: {actual} bytes on disk, header declares {expected}")
    return np.memmap(path, dtype=dtype, mode="r",
                     offset=_DATASET_HEADER.size, shape=(count,))


def write_rows(path: Path, values: np.ndarray, labels: np.ndarray) -> None:
    """Write an ORGD file (useful for fixtures and round-trip tests)."""
    values = np.ascontiguousarray(values, dtype="<f4")
    labels = np.ascontiguousarray(labels, dtype="<u2")
    count, dim = values.shape
    packed = np.empty(count, dtype=row_dtype(dim))
    packed["values"] = values
    packed["label"] = labels
    header = _DATASET_HEADER.pack(DATASET_MAGIC, DATASET_VERSION, dim, count)
    Path(path).write_bytes(header + packed.tobytes())


def write_volume(path: Path, intensities: np.ndarray, spacing_mm) -> None:
    """Write a float32 ORGV volume; ``intensities`` is (nz, ny, nx)."""
    nz, ny, nx = intensities.shape
    header = _VOLUME_HEADER.pack(VOLUME_MAGIC, VOLUME_VERSION, nx, ny, nz,
                                 *(float(s) for s in spacing_mm))
    payload = np.ascontiguousarray(intensities, dtype="<f4")
    Path(path).write_bytes(header + payload.tobytes())


def write_mask(path: Path, labels: np.ndarray, spacing_mm) -> None:
    """Write a uint16 ORGM label mask; ``labels`` is (nz, ny, nx)."""
    nz, ny, nx = labels.shape
    header = _VOLUME_HEADER.pack(MASK_MAGIC, VOLUME_VERSION, nx, ny, nz,
                                 *(float(s) for s in spacing_mm))
    payload = np.ascontiguousarray(labels, dtype="<u2")
    Path(path).write_bytes(header + payload.tobytes())
