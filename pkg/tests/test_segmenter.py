"""Coarse grid classification, refinement, smoothing, and determinism."""

from __future__ import annotations

import numpy as np
import pytest

from organpoint.classify import MaskLookupClassifier
from organpoint.metrics import boundary_band
from organpoint.segmenter import (
    GridLevel,
    brute_force_segment,
    coarse_segment,
    refine_level,
    segment,
)
from organpoint.volume import Box, LabelMask, PhantomSpec, Sphere, Volume, synth_phantom


class HashClassifier:
    """Deterministic pure function of the point; exercises grid plumbing."""

    def __init__(self, classes: int = 4):
        self.classes = classes

    def classify(self, volume, point):
        i, j, k = point
        return (3 * i + 5 * j + 7 * k) % self.classes


class CountingClassifier:
    def __init__(self, inner):
        self.inner = inner
        self.calls = 0
        self.saw_plain_ints = True

    def classify(self, volume, point):
        self.calls += 1
        if not all(type(c) is int for c in point):
            self.saw_plain_ints = False
        return self.inner.classify(volume, point)


def flat_volume(dims, spacing=(2.0, 2.0, 2.0)) -> Volume:
    nx, ny, nz = dims
    return Volume(dims, spacing, np.zeros(nx * ny * nz, np.float32))


def small_sphere_phantom(dims=(16, 16, 16)):
    extent = tuple((d - 1) * 2.0 for d in dims)
    center = tuple(e / 2 for e in extent)
    spec = PhantomSpec(dims, (2.0, 2.0, 2.0),
                       (Sphere(center, min(extent) * 0.32, 180.0, 1),))
    return synth_phantom(spec)


# ---------------------------------------------------------------------------
# Grid levels


def test_grid_level_stride_rounds_spacing_ratio():
    v = flat_volume((8, 8, 8), (2.0, 3.0, 5.0))
    level = GridLevel.for_volume(8.0, v)
    assert level.stride_vox == (4, 3, 2)  # 8/2=4, 8/3=2.67->3, 8/5=1.6->2


def test_grid_level_stride_never_drops_below_one_voxel():
    v = flat_volume((8, 8, 8), (2.0, 2.0, 2.0))
    assert GridLevel.for_volume(1.0, v).stride_vox == (1, 1, 1)
    assert GridLevel.for_volume(0.4, v).stride_vox == (1, 1, 1)


def test_grid_level_tie_rounds_up():
    v = flat_volume((8, 8, 8), (4.0, 4.0, 4.0))
    assert GridLevel.for_volume(6.0, v).stride_vox == (2, 2, 2)  # 1.5 -> 2


def test_grid_level_rejects_nonpositive_spacing():
    v = flat_volume((4, 4, 4))
    with pytest.raises(ValueError):
        GridLevel.for_volume(0.0, v)
    with pytest.raises(ValueError):
        GridLevel.for_volume(float("nan"), v)


# ---------------------------------------------------------------------------
# Coarse pass


def test_coarse_segment_matches_cell_anchor_reference():
    v = flat_volume((7, 6, 5))
    clf = HashClassifier()
    level = GridLevel.for_volume(4.0, v)  # stride 2 everywhere
    mask = coarse_segment(v, clf, level)
    for i in range(7):
        for j in range(6):
            for k in range(5):
                anchor = ((i // 2) * 2, (j // 2) * 2, (k // 2) * 2)
                assert mask.grid[k, j, i] == clf.classify(v, anchor)


def test_coarse_segment_covers_trailing_partial_cells():
    v = flat_volume((5, 5, 5))
    level = GridLevel.for_volume(6.0, v)  # stride 3: grid points 0, 3
    mask = coarse_segment(v, HashClassifier(), level)
    # voxel 4 belongs to the cell anchored at 3 even though the cell is cut off
    assert mask.grid[4, 4, 4] == HashClassifier().classify(v, (3, 3, 3))


def test_coarse_segment_call_count_is_grid_product():
    v = flat_volume((7, 6, 5))
    clf = CountingClassifier(HashClassifier())
    coarse_segment(v, clf, GridLevel.for_volume(4.0, v))
    assert clf.calls == 4 * 3 * 3  # ceil(7/2) * ceil(6/2) * ceil(5/2)


# ---------------------------------------------------------------------------
# Refinement


def test_unanimity_threshold_refinement_equals_brute_force():
    # With the smoothing threshold at 27 nothing can be smoothed (a mixed
    # neighborhood never reaches 27 agreeing labels), so every ambiguous
    # point is classified and the result must equal exhaustive classification
    # wherever coarse cells were not unanimously wrong -- which holds when
    # the structure spans several coarse cells, as here (2-voxel cells vs a
    # ~5-voxel sphere radius).
    for dims in [(16, 16, 16), (15, 14, 13)]:
        vol, truth = small_sphere_phantom(dims)
        oracle = MaskLookupClassifier(truth)
        mask, _ = segment(vol, oracle, levels_mm=(4.0, 2.0),
                          majority_threshold=27)
        brute = brute_force_segment(vol, oracle)
        assert np.array_equal(brute.labels, truth.labels)
        assert np.array_equal(mask.labels, truth.labels), dims


def test_strict_refinement_of_an_exact_mask_is_a_fixed_point():
    # Exact algebraic invariant, independent of phantom geometry: feeding the
    # true mask into a strict (threshold 27) refinement returns it unchanged,
    # because unanimous points copy the (correct) center label and every
    # ambiguous point is re-classified by the (exact) oracle.
    vol, truth = small_sphere_phantom()
    oracle = MaskLookupClassifier(truth)
    out, _ = refine_level(vol, oracle, truth, GridLevel.for_volume(2.0, vol),
                          majority_threshold=27)
    assert np.array_equal(out.labels, truth.labels)


def test_refinement_skips_calls_inside_unanimous_regions():
    vol, truth = small_sphere_phantom()
    oracle = CountingClassifier(MaskLookupClassifier(truth))
    mask, stats = segment(vol, oracle, levels_mm=(8.0, 4.0, 2.0))
    assert oracle.calls == stats.classifier_calls
    assert stats.classifier_calls < 0.5 * truth.labels.size
    assert oracle.saw_plain_ints
    # the refined mask still recovers the phantom almost everywhere
    assert np.mean(mask.labels == truth.labels) > 0.95


def neighborhood_labels(mask: LabelMask, point, stride):
    """Reference 3x3x3 read with clamping, one label per neighbor."""
    nx, ny, nz = mask.dims
    i, j, k = point
    out = []
    for dz in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                ii = min(max(i + dx * stride[0], 0), nx - 1)
                jj = min(max(j + dy * stride[1], 0), ny - 1)
                kk = min(max(k + dz * stride[2], 0), nz - 1)
                out.append(int(mask.labels[ii + nx * (jj + ny * kk)]))
    return out


def test_majority_smoothing_only_rewrites_ambiguous_points():
    vol, truth = small_sphere_phantom()
    oracle = MaskLookupClassifier(truth)
    coarse, _ = segment(vol, oracle, levels_mm=(8.0, 4.0))
    level = GridLevel.for_volume(2.0, vol)

    smoothed20, stats20 = refine_level(vol, oracle, coarse, level, majority_threshold=20)
    strict27, stats27 = refine_level(vol, oracle, coarse, level, majority_threshold=27)

    assert stats27.smoothed_assignments == 0
    assert stats27.classifier_calls == stats20.classifier_calls + stats20.smoothed_assignments

    diff = np.flatnonzero(smoothed20.labels != strict27.labels)
    nx, ny, _ = vol.dims
    for flat in diff:
        p = (int(flat % nx), int((flat // nx) % ny), int(flat // (nx * ny)))
        neigh = neighborhood_labels(coarse, p, level.stride_vox)
        counts = {c: neigh.count(c) for c in set(neigh)}
        best = max(counts.values())
        # a disagreement must come from majority smoothing: non-unanimous
        # neighborhood whose modal label reached the threshold
        assert len(counts) > 1
        assert best >= 20
        assert smoothed20.labels[flat] == max(counts, key=lambda c: counts[c])


def test_refine_level_checks_mask_dims():
    vol, _ = small_sphere_phantom()
    wrong = LabelMask((8, 8, 8), np.zeros(512, int), 1)
    with pytest.raises(ValueError):
        refine_level(vol, HashClassifier(), wrong, GridLevel.for_volume(2.0, vol))


def test_segment_applies_majority_shortcut_only_at_final_level():
    spec = PhantomSpec((32, 32, 32), (2.0, 2.0, 2.0),
                       (Box((32.0, 30.0, 34.0), (17.0, 13.0, 15.0), 300.0, 1),))
    vol, truth = synth_phantom(spec)
    oracle = MaskLookupClassifier(truth)
    got, stats = segment(vol, oracle, levels_mm=(8.0, 4.0, 2.0))

    manual = coarse_segment(vol, oracle, GridLevel.for_volume(8.0, vol))
    manual, s4 = refine_level(vol, oracle, manual, GridLevel.for_volume(4.0, vol),
                              majority_threshold=27)
    manual, s2 = refine_level(vol, oracle, manual, GridLevel.for_volume(2.0, vol),
                              majority_threshold=20)

    assert np.array_equal(got.labels, manual.labels)
    assert s4.smoothed_assignments == 0
    assert stats.smoothed_assignments == s2.smoothed_assignments


def test_disagreements_stay_within_one_voxel_of_true_boundaries():
    # Shapes keep more than one coarse (8 mm) cell of clearance from the
    # volume border: neighborhoods clamp at the border, so a label boundary
    # crossing the final coarse cell can never be probed from beyond it.
    specs = (
        PhantomSpec((32, 32, 32), (2.0, 2.0, 2.0),
                    (Sphere((31.0, 33.0, 30.0), 20.0, 200.0, 1),)),
        PhantomSpec((32, 32, 32), (2.0, 2.0, 2.0),
                    (Box((20.0, 32.0, 30.0), (11.0, 15.0, 13.0), 300.0, 1),
                     Box((45.0, 35.0, 33.0), (8.0, 12.0, 14.0), 80.0, 2))),
    )
    for spec in specs:
        vol, truth = synth_phantom(spec)
        oracle = MaskLookupClassifier(truth)
        mask, _ = segment(vol, oracle, levels_mm=(8.0, 4.0, 2.0))
        diffs = mask.grid != truth.grid
        off_boundary = diffs & ~boundary_band(truth.grid, (1, 1, 1))
        assert not off_boundary.any()


# ---------------------------------------------------------------------------
# Full pipeline


def test_segment_validates_levels():
    vol = flat_volume((4, 4, 4))
    clf = HashClassifier()
    with pytest.raises(ValueError):
        segment(vol, clf, levels_mm=())
    with pytest.raises(ValueError):
        segment(vol, clf, levels_mm=(4.0, 4.0))
    with pytest.raises(ValueError):
        segment(vol, clf, levels_mm=(2.0, 8.0))


def test_segment_stats_accounting():
    vol, truth = small_sphere_phantom()
    clf = CountingClassifier(MaskLookupClassifier(truth))
    _, stats = segment(vol, clf, levels_mm=(8.0, 4.0, 2.0))
    assert stats.classifier_calls == clf.calls
    assert stats.points_per_level == [4 ** 3, 8 ** 3, 16 ** 3]
    phases = [name for name, _ in stats.phase_seconds]
    assert phases == ["coarse_8mm", "refine_4mm", "refine_2mm"]
    assert all(dt >= 0 for _, dt in stats.phase_seconds)


def test_segment_single_level_is_pure_coarse():
    vol = flat_volume((9, 9, 9))
    clf = HashClassifier()
    mask, stats = segment(vol, clf, levels_mm=(4.0,))
    direct = coarse_segment(vol, clf, GridLevel.for_volume(4.0, vol))
    assert np.array_equal(mask.labels, direct.labels)
    assert stats.points_per_level == [5 ** 3]


def test_parallel_runs_are_bitwise_deterministic():
    vol, truth = small_sphere_phantom((15, 14, 13))
    oracle = MaskLookupClassifier(truth)
    masks = [
        segment(vol, oracle, levels_mm=(8.0, 4.0, 2.0), threads=t)[0]
        for t in (1, 2, 5)
    ]
    for other in masks[1:]:
        assert np.array_equal(masks[0].labels, other.labels)


def test_parallel_hash_classifier_deterministic():
    vol = flat_volume((13, 11, 9))
    results = [segment(vol, HashClassifier(), levels_mm=(6.0, 2.0), threads=t)[0]
               for t in (1, 4)]
    assert np.array_equal(results[0].labels, results[1].labels)


def test_brute_force_matches_pointwise_loop():
    vol = flat_volume((5, 4, 3))
    clf = HashClassifier()
    mask = brute_force_segment(vol, clf)
    for i in range(5):
        for j in range(4):
            for k in range(3):
                assert mask.grid[k, j, i] == clf.classify(vol, (i, j, k))


def test_brute_force_parallel_deterministic():
    vol = flat_volume((9, 9, 9))
    a = brute_force_segment(vol, HashClassifier(), threads=1)
    b = brute_force_segment(vol, HashClassifier(), threads=4)
    assert np.array_equal(a.labels, b.labels)
