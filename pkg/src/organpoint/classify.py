"""Point classifiers: the model-backed one and a ground-truth stub for testing."""

from __future__ import annotations

import numpy as np

from .model import ClassProbabilities, ModelWeights, forward, predict
from .sampler import (
    OffsetTable,
    VoxelOffsetTable,
    bind_to_spacing,
    build_offset_table,
    extract_descriptor,
)
from .volume import LabelMask, Volume


class ModelClassifier:
    """Descriptor extraction plus the residual network, per query point."""

    def __init__(self, weights: ModelWeights, table: OffsetTable | None = None):
        self.weights = weights
        self._table = table if table is not None else build_offset_table()
        self._bound: dict[tuple[float, float, float], VoxelOffsetTable] = {}

    def table_for(self, volume: Volume) -> VoxelOffsetTable:
        # Benign race under threads: rebinding the same spacing is idempotent.
        bound = self._bound.get(volume.spacing_mm)
        if bound is None:
            bound = bind_to_spacing(self._table, volume.spacing_mm)
            self._bound[volume.spacing_mm] = bound
        return bound

    def classify(self, volume: Volume, point: tuple[int, int, int]) -> int:
        return self.predict_point(volume, point).argmax_label

    def predict_point(self, volume: Volume, point) -> ClassProbabilities:
        d = extract_descriptor(volume, point, self.table_for(volume))
        return predict(self.weights, d.values)

    def logits_at(self, volume: Volume, point) -> np.ndarray:
        d = extract_descriptor(volume, point, self.table_for(volume))
        return forward(self.weights, d.values)


class MaskLookupClassifier:
    """Oracle classifier that reads labels straight out of a ground-truth mask."""

    def __init__(self, mask: LabelMask):
        self.mask = mask

    def classify(self, volume: Volume, point: tuple[int, int, int]) -> int:
        nx, ny, _ = self.mask.dims
        i, j, k = point
        return int(self.mask.labels[i + nx * (j + ny * k)])
