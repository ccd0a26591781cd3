"""Standard synthetic phantoms with known ground-truth labels.

Three 64^3 volumes at 2 mm spacing (128 mm per axis; voxel i sits at
2*i mm). Shapes stay well inside the volume: neighborhoods clamp at the
border, so geometry that hugs the edge cannot be refined past the last
coarse cell. These are the stock inputs for demos, benchmarks, and the
oracle-equivalence test suite.
"""

from __future__ import annotations

from typing import Callable

from .volume import Box, PhantomSpec, Sphere


def sphere_phantom_spec() -> PhantomSpec:
    """A single centered sphere, label 1."""
    return PhantomSpec(
        dims=(64, 64, 64),
        spacing_mm=(2.0, 2.0, 2.0),
        shapes=(Sphere((64.0, 64.0, 64.0), 40.0, 200.0, 1),),
    )


def nested_spheres_phantom_spec() -> PhantomSpec:
    """Concentric spheres; the inner one carves label 2 out of label 1."""
    return PhantomSpec(
        dims=(64, 64, 64),
        spacing_mm=(2.0, 2.0, 2.0),
        shapes=(
            Sphere((64.0, 64.0, 64.0), 44.0, 150.0, 1),
            Sphere((64.0, 64.0, 64.0), 24.0, 500.0, 2),
        ),
    )


def two_boxes_phantom_spec() -> PhantomSpec:
    """Two disjoint axis-aligned boxes, labels 1 and 2; sharp edges and corners."""
    return PhantomSpec(
        dims=(64, 64, 64),
        spacing_mm=(2.0, 2.0, 2.0),
        shapes=(
            Box((40.0, 64.0, 64.0), (22.0, 30.0, 26.0), 300.0, 1),
            Box((96.0, 70.0, 60.0), (18.0, 24.0, 28.0), 80.0, 2),
        ),
    )


STANDARD_PHANTOMS: dict[str, Callable[[], PhantomSpec]] = {
    "sphere": sphere_phantom_spec,
    "nested-spheres": nested_spheres_phantom_spec,
    "two-boxes": two_boxes_phantom_spec,
}
