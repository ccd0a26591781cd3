"""Descriptor dataset access: multiple ORGD files as one indexed corpus."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .formats import open_rows


@dataclass
class DescriptorCorpus:
    """Read-only view over one or more ORGD files, indexed globally.

    Rows stay memory-mapped on disk; ``gather`` copies only the requested
    batch. Labels are loaded eagerly (two bytes per row) because splits and
    class counts need them up front.
    """

    paths: tuple[Path, ...]
    maps: tuple[np.memmap, ...]
    offsets: np.ndarray  # cumulative row starts, len(maps) + 1
    labels: np.ndarray   # (total,) uint16

    @classmethod
    def open(cls, paths) -> "DescriptorCorpus":
        paths = tuple(Path(p) for p in paths)
        if not paths:
            raise DataError("no dataset files given")
        maps = tuple(open_rows(p) for p in paths)
        dims = {m.dtype["values"].shape[0] for m in maps}
        if len(dims) != 1:
            raise DataError(
                f"datasets disagree on descriptor dim: {sorted(dims)} "
                f"across {[str(p) for p in paths]}")
        counts = [m.shape[0] for m in maps]
        offsets = np.concatenate([[0], np.cumsum(counts)])
        labels = np.concatenate([np.asarray(m["label"]) for m in maps])
        return cls(paths, maps, offsets, labels)

    @property
    def descriptor_dim(self) -> int:
        return self.maps[0].dtype["values"].shape[0]

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def __len__(self) -> int:
        return int(self.offsets[-1])

    def validate_labels(self, num_classes: int) -> None:
        top = int(self.labels.max()) if self.labels.size else -1
        if top >= num_classes:
            raise DataError(f"label {top} out of range for {num_classes} classes")

    def gather(self, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Fetch rows by global index: (values float32 (n, dim), labels int64)."""
        indices = np.asarray(indices)
        values = np.empty((indices.size, self.descriptor_dim), dtype=np.float32)
        file_of = np.searchsorted(self.offsets, indices, side="right") - 1
        for f in np.unique(file_of):
            sel = file_of == f
            local = indices[sel] - self.offsets[f]
            values[sel] = self.maps[f]["values"][local]
        return values, self.labels[indices].astype(np.int64)


def split_indices(n: int, val_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic shuffled (train, validation) index split."""
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(n)
    n_val = int(round(n * val_fraction))
    if n > 1:
        n_val = min(max(n_val, 1 if val_fraction > 0 else 0), n - 1)
    return perm[n_val:], perm[:n_val]
