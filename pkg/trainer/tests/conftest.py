"""Shared helpers for trainer tests.

The acceptance tests need a descriptor corpus extracted by the runtime
engine from synthetic phantom volumes. Extraction writes ~2.6 GB and takes
tens of seconds, so the corpus is cached under ``.cache/trainer-corpus`` at
the repository root and reused when its recorded parameters match.

Everything here is built with trainer-side code only: phantom rasterization
is plain numpy, files are written via ``organtrain.formats``, and the engine
is involved strictly through its command-line interface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from organtrain.formats import write_mask, write_volume
from organtrain.parity import run_engine

GRID = 64
SPACING_MM = 2.0
EXTRACT_SEED = 202
BALANCED_FRACTION = 0.10
ROW_COUNTS = {"sphere": 33334, "nested": 33333, "boxes": 33333}
CACHE_VERSION = 1


def _coords_mm() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Voxel-center coordinates in mm, broadcastable over a (z, y, x) grid."""
    axis = np.arange(GRID, dtype=np.float64) * SPACING_MM
    z = axis[:, None, None]
    y = axis[None, :, None]
    x = axis[None, None, :]
    return x, y, z


def _sphere(center, radius) -> np.ndarray:
    x, y, z = _coords_mm()
    cx, cy, cz = center
    return ((x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2) <= radius ** 2


def _box(center, half) -> np.ndarray:
    x, y, z = _coords_mm()
    cx, cy, cz = center
    hx, hy, hz = half
    return ((np.abs(x - cx) <= hx) & (np.abs(y - cy) <= hy)
            & (np.abs(z - cz) <= hz))


def build_phantom(name: str) -> tuple[np.ndarray, np.ndarray]:
    """(intensities float32, labels uint16), both shaped (z, y, x).

    Shapes keep well over one 8 mm coarse cell of clearance from the volume
    border so hierarchical refinement can probe every boundary.
    """
    intensities = np.zeros((GRID, GRID, GRID), dtype=np.float32)
    labels = np.zeros((GRID, GRID, GRID), dtype=np.uint16)

    def paint(mask, value, label):
        intensities[mask] = value
        labels[mask] = label

    if name == "sphere":
        paint(_sphere((64, 64, 64), 40), 200.0, 1)
    elif name == "nested":
        paint(_sphere((64, 64, 64), 44), 150.0, 1)
        paint(_sphere((64, 64, 64), 24), 500.0, 2)
    elif name == "boxes":
        paint(_box((40, 64, 64), (22, 30, 26)), 300.0, 1)
        paint(_box((96, 70, 60), (18, 24, 28)), 80.0, 2)
    else:
        raise ValueError(f"unknown phantom {name!r}")
    return intensities, labels


@dataclass(frozen=True)
class PhantomFiles:
    name: str
    volume: Path
    truth: Path
    rows: Path
    manifest: Path


def _cache_meta() -> dict:
    return {
        "version": CACHE_VERSION,
        "grid": GRID,
        "spacing_mm": SPACING_MM,
        "seed": EXTRACT_SEED,
        "balanced_fraction": BALANCED_FRACTION,
        "row_counts": ROW_COUNTS,
    }


def _corpus_files(cache_dir: Path) -> list[PhantomFiles]:
    return [
        PhantomFiles(
            name=name,
            volume=cache_dir / f"{name}.orgv",
            truth=cache_dir / f"{name}_truth.orgm",
            rows=cache_dir / f"{name}.orgd",
            manifest=cache_dir / f"{name}.txt",
        )
        for name in ROW_COUNTS
    ]


def _cache_is_valid(cache_dir: Path, files: list[PhantomFiles]) -> bool:
    meta_path = cache_dir / "meta.json"
    if not meta_path.exists():
        return False
    try:
        recorded = json.loads(meta_path.read_text())
    except json.JSONDecodeError:
        return False
    if recorded != _cache_meta():
        return False
    return all(f.volume.exists() and f.truth.exists() and f.rows.exists()
               and f.manifest.exists() for f in files)


def build_corpus(cache_dir: Path) -> list[PhantomFiles]:
    """Create (or reuse) the cached phantom volumes and extracted rows."""
    cache_dir.mkdir(parents=True, exist_ok=True)
    files = _corpus_files(cache_dir)
    if _cache_is_valid(cache_dir, files):
        return files

    spacing = (SPACING_MM,) * 3
    for f in files:
        intensities, truth = build_phantom(f.name)
        write_volume(f.volume, intensities, spacing)
        write_mask(f.truth, truth, spacing)
        run_engine([
            "extract",
            "--volume", str(f.volume),
            "--mask", str(f.truth),
            "--count", str(ROW_COUNTS[f.name]),
            "--balanced-fraction", str(BALANCED_FRACTION),
            "--seed", str(EXTRACT_SEED),
            "--volume-id", f.name,
            "--out", str(f.rows),
            "--manifest", str(f.manifest),
        ])
    (cache_dir / "meta.json").write_text(json.dumps(_cache_meta(), indent=2))
    return files


@pytest.fixture(scope="session")
def phantom_corpus() -> list[PhantomFiles]:
    repo_root = Path(__file__).resolve().parents[2]
    return build_corpus(repo_root / ".cache" / "trainer-corpus")
