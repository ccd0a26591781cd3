"""Real-time organ-label point classification on CT volumes.

A point query gathers a sparse multi-resolution intensity descriptor (three
orthogonal 27x27 planes plus six 9x9x9 cubes, 6561 samples total) and feeds
it to a small residual network.  Full-volume segmentation runs the same
classifier on a coarse grid and refines toward native resolution, smoothing
locally uniform regions without spending classifier calls on them.
"""

from .classify import MaskLookupClassifier, ModelClassifier
from .dataset import (
    DescriptorDataset,
    SampleSpec,
    export_dataset,
    read_dataset,
    write_dataset,
)
from .errors import ConsistencyError, OrganPointError, ParseError
from .metrics import ConfusionCounts, accuracy_and_macro_f1, dice_per_class
from .model import ModelWeights, forward, load_weights, predict, save_weights
from .sampler import (
    DESCRIPTOR_DIM,
    Descriptor,
    OffsetTable,
    VoxelOffsetTable,
    bind_to_spacing,
    build_offset_table,
    decode_descriptor,
    extract_descriptor,
    extract_descriptors,
)
from .phantoms import STANDARD_PHANTOMS
from .segmenter import SegmentationStats, brute_force_segment, segment
from .volume import (
    Box,
    LabelMask,
    PhantomSpec,
    Sphere,
    Volume,
    parse_mask,
    parse_nifti,
    parse_raw,
    synth_phantom,
    write_mask,
    write_raw,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "ConfusionCounts",
    "ConsistencyError",
    "DESCRIPTOR_DIM",
    "Descriptor",
    "DescriptorDataset",
    "LabelMask",
    "MaskLookupClassifier",
    "ModelClassifier",
    "ModelWeights",
    "OffsetTable",
    "OrganPointError",
    "ParseError",
    "PhantomSpec",
    "SampleSpec",
    "STANDARD_PHANTOMS",
    "SegmentationStats",
    "Sphere",
    "VoxelOffsetTable",
    "Volume",
    "accuracy_and_macro_f1",
    "bind_to_spacing",
    "brute_force_segment",
    "build_offset_table",
    "decode_descriptor",
    "dice_per_class",
    "export_dataset",
    "extract_descriptor",
    "extract_descriptors",
    "forward",
    "load_weights",
    "parse_mask",
    "parse_nifti",
    "parse_raw",
    "predict",
    "read_dataset",
    "save_weights",
    "segment",
    "synth_phantom",
    "write_dataset",
    "write_mask",
    "write_raw",
]
