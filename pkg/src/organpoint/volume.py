"""3D intensity volumes, label masks, synthetic phantoms, and their file formats.

Arrays are stored flat with x fastest (index = i + nx*(j + ny*k)); the
``grid`` views expose the same buffer as (nz, ny, nx) ndarrays. Voxel i sits
at physical position i * spacing_mm along its axis.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimsMismatch,
    MalformedHeader,
    TruncatedData,
    UnsupportedDatatype,
    UnsupportedDimensionality,
    UnsupportedVersion,
)

RAW_MAGIC = b"ORGV"
MASK_MAGIC = b"ORGM"
RAW_VERSION = 1

# NIfTI-1 datatype codes we decode. Anything else is rejected.
_NIFTI_DTYPES = {2: "u1", 4: "i2", 8: "i4", 16: "f4"}
_NIFTI_HEADER_BYTES = 348


def _as_dims(dims) -> tuple[int, int, int]:
    d = tuple(int(x) for x in dims)
    if len(d) != 3 or any(x <= 0 for x in d):
        raise ValueError(f"dims must be 3 positive integers, got {dims!r}")
    return d


def _as_spacing(spacing) -> tuple[float, float, float]:
    s = tuple(float(x) for x in spacing)
    if len(s) != 3 or any(not np.isfinite(x) or x <= 0 for x in s):
        raise ValueError(f"spacing must be 3 positive finite reals, got {spacing!r}")
    return s


@dataclass(frozen=True)
class Volume:
    """Scalar intensity grid with physical voxel spacing in mm."""

    dims: tuple[int, int, int]
    spacing_mm: tuple[float, float, float]
    intensities: np.ndarray  # flat float32, x fastest

    def __post_init__(self):
        object.__setattr__(self, "dims", _as_dims(self.dims))
        object.__setattr__(self, "spacing_mm", _as_spacing(self.spacing_mm))
        arr = np.ascontiguousarray(self.intensities, dtype=np.float32).ravel()
        if arr.size != self.dims[0] * self.dims[1] * self.dims[2]:
            raise ValueError(
                f"intensity count {arr.size} does not match dims {self.dims}"
            )
        object.__setattr__(self, "intensities", arr)

    @property
    def grid(self) -> np.ndarray:
        """(nz, ny, nx) view of the flat intensity buffer."""
        nx, ny, nz = self.dims
        return self.intensities.reshape(nz, ny, nx)

    def gather(self, coords: np.ndarray) -> np.ndarray:
        """Intensities at integer voxel coords, shape (N, 3) as (i, j, k).

        Rows with any coordinate out of range read as 0.0; this is the
        vectorized form of :func:`voxel_at`.
        """
        nx, ny, nz = self.dims
        c = np.asarray(coords, dtype=np.int64)
        inside = (
            (c[:, 0] >= 0) & (c[:, 0] < nx)
            & (c[:, 1] >= 0) & (c[:, 1] < ny)
            & (c[:, 2] >= 0) & (c[:, 2] < nz)
        )
        # Clip instead of branching so one take() serves every row.
        i = np.clip(c[:, 0], 0, nx - 1)
        j = np.clip(c[:, 1], 0, ny - 1)
        k = np.clip(c[:, 2], 0, nz - 1)
        out = self.intensities.take(i + nx * (j + ny * k))
        out[~inside] = 0.0
        return out


@dataclass(frozen=True)
class LabelMask:
    """Per-voxel organ labels aligned with a Volume (label 0 = background)."""

    dims: tuple[int, int, int]
    labels: np.ndarray  # flat uint16, x fastest
    num_classes: int

    def __post_init__(self):
        object.__setattr__(self, "dims", _as_dims(self.dims))
        src = np.asarray(self.labels)
        if src.size and src.min() < 0:
            raise ValueError("labels must be non-negative")
        arr = np.ascontiguousarray(src, dtype=np.uint16).ravel()
        if arr.size != self.dims[0] * self.dims[1] * self.dims[2]:
            raise ValueError(f"label count {arr.size} does not match dims {self.dims}")
        if self.num_classes < 1:
            raise ValueError("num_classes must be positive")
        if arr.size and int(arr.max()) >= self.num_classes:
            raise ValueError(
                f"label {int(arr.max())} out of range for num_classes {self.num_classes}"
            )
        object.__setattr__(self, "labels", arr)
        object.__setattr__(self, "num_classes", int(self.num_classes))

    @property
    def grid(self) -> np.ndarray:
        nx, ny, nz = self.dims
        return self.labels.reshape(nz, ny, nx)


def voxel_at(v: Volume, i: int, j: int, k: int) -> float:
    """Intensity at voxel (i, j, k); 0.0 for any out-of-range coordinate."""
    nx, ny, nz = v.dims
    if 0 <= i < nx and 0 <= j < ny and 0 <= k < nz:
        return float(v.intensities[i + nx * (j + ny * k)])
    return 0.0


# ---------------------------------------------------------------------------
# Synthetic phantoms


@dataclass(frozen=True)
class Sphere:
    center_mm: tuple[float, float, float]
    radius_mm: float
    intensity: float
    label: int


@dataclass(frozen=True)
class Box:
    center_mm: tuple[float, float, float]
    half_extents_mm: tuple[float, float, float]
    intensity: float
    label: int


@dataclass(frozen=True)
class PhantomSpec:
    """Geometric ground truth for a synthetic test volume.

    Shape labels must form a contiguous range starting at 1. Later shapes
    win where shapes overlap; geometry outside the volume is clipped.
    """

    dims: tuple[int, int, int]
    spacing_mm: tuple[float, float, float]
    shapes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "dims", _as_dims(self.dims))
        object.__setattr__(self, "spacing_mm", _as_spacing(self.spacing_mm))
        object.__setattr__(self, "shapes", tuple(self.shapes))
        labels = sorted({s.label for s in self.shapes})
        if labels and labels != list(range(1, len(labels) + 1)):
            raise ValueError(f"shape labels must be contiguous from 1, got {labels}")


def synth_phantom(spec: PhantomSpec, background_intensity: float = 0.0) -> tuple[Volume, LabelMask]:
    """Rasterize a phantom spec into an intensity volume and its label mask."""
    nx, ny, nz = spec.dims
    sx, sy, sz = spec.spacing_mm
    vol = np.full((nz, ny, nx), background_intensity, dtype=np.float32)
    lab = np.zeros((nz, ny, nx), dtype=np.uint16)

    xs = (np.arange(nx) * sx)[None, None, :]
    ys = (np.arange(ny) * sy)[None, :, None]
    zs = (np.arange(nz) * sz)[:, None, None]

    for shape in spec.shapes:
        cx, cy, cz = shape.center_mm
        if isinstance(shape, Sphere):
            inside = (xs - cx) ** 2 + (ys - cy) ** 2 + (zs - cz) ** 2 <= shape.radius_mm**2
        elif isinstance(shape, Box):
            hx, hy, hz = shape.half_extents_mm
            inside = (
                (np.abs(xs - cx) <= hx)
                & (np.abs(ys - cy) <= hy)
                & (np.abs(zs - cz) <= hz)
            )
        else:
            raise TypeError(f"unknown phantom shape {type(shape).__name__}")
        vol[inside] = np.float32(shape.intensity)
        lab[inside] = shape.label

    num_classes = max((s.label for s in spec.shapes), default=0) + 1
    return (
        Volume(spec.dims, spec.spacing_mm, vol.ravel()),
        LabelMask(spec.dims, lab.ravel(), num_classes),
    )


# ---------------------------------------------------------------------------
# ORGV raw volume format: magic, u32 version, 3*u32 dims, 3*f32 spacing_mm,
# then dims-product little-endian f32 intensities.

_RAW_HEADER = struct.Struct("<4sI3I3f")


def write_raw(v: Volume) -> bytes:
    header = _RAW_HEADER.pack(RAW_MAGIC, RAW_VERSION, *v.dims, *v.spacing_mm)
    return header + v.intensities.astype("<f4", copy=False).tobytes()


def parse_raw(data: bytes) -> Volume:
    if len(data) < _RAW_HEADER.size:
        raise TruncatedData(f"ORGV stream of {len(data)} bytes is shorter than the header")
    magic, version, nx, ny, nz, sx, sy, sz = _RAW_HEADER.unpack_from(data, 0)
    if magic != RAW_MAGIC:
        raise MalformedHeader(f"bad ORGV magic {magic!r}")
    if version != RAW_VERSION:
        raise UnsupportedVersion(f"ORGV version {version}")
    if min(nx, ny, nz) <= 0:
        raise MalformedHeader(f"non-positive dims ({nx}, {ny}, {nz})")
    count = nx * ny * nz
    payload = data[_RAW_HEADER.size:]
    if len(payload) < 4 * count:
        raise TruncatedData(f"expected {4 * count} payload bytes, found {len(payload)}")
    if len(payload) > 4 * count:
        raise MalformedHeader(f"{len(payload) - 4 * count} trailing bytes after payload")
    intensities = np.frombuffer(payload, dtype="<f4", count=count)
    return Volume((nx, ny, nz), (sx, sy, sz), intensities)


# ---------------------------------------------------------------------------
# ORGM mask format: same header as ORGV, u16 label payload.


def write_mask(m: LabelMask, spacing_mm) -> bytes:
    spacing = _as_spacing(spacing_mm)
    header = _RAW_HEADER.pack(MASK_MAGIC, RAW_VERSION, *m.dims, *spacing)
    return header + m.labels.astype("<u2", copy=False).tobytes()


def parse_mask(data: bytes) -> tuple[LabelMask, tuple[float, float, float]]:
    if len(data) < _RAW_HEADER.size:
        raise TruncatedData(f"ORGM stream of {len(data)} bytes is shorter than the header")
    magic, version, nx, ny, nz, sx, sy, sz = _RAW_HEADER.unpack_from(data, 0)
    if magic != MASK_MAGIC:
        raise MalformedHeader(f"bad ORGM magic {magic!r}")
    if version != RAW_VERSION:
        raise UnsupportedVersion(f"ORGM version {version}")
    if min(nx, ny, nz) <= 0:
        raise MalformedHeader(f"non-positive dims ({nx}, {ny}, {nz})")
    count = nx * ny * nz
    payload = data[_RAW_HEADER.size:]
    if len(payload) < 2 * count:
        raise TruncatedData(f"expected {2 * count} payload bytes, found {len(payload)}")
    if len(payload) > 2 * count:
        raise MalformedHeader(f"{len(payload) - 2 * count} trailing bytes after payload")
    labels = np.frombuffer(payload, dtype="<u2", count=count)
    num_classes = int(labels.max()) + 1 if count else 1
    return LabelMask((nx, ny, nz), labels, num_classes), (sx, sy, sz)


# ---------------------------------------------------------------------------
# NIfTI-1 single-file reader (uncompressed .nii, 3D or 4D with one frame).


def parse_nifti(data: bytes) -> tuple[Volume, np.ndarray | None]:
    """Decode a NIfTI-1 volume.

    Returns the volume plus, when the file stores unscaled integers (the
    usual encoding of segmentation label maps), the raw integer voxels.
    Orientation metadata (qform/sform) is ignored: axes are taken as stored.
    """
    if len(data) < _NIFTI_HEADER_BYTES + 4:
        raise MalformedHeader(f"{len(data)} bytes is too short for a NIfTI-1 file")

    # sizeof_hdr doubles as a byte-order probe.
    (size_le,) = struct.unpack_from("<i", data, 0)
    if size_le == _NIFTI_HEADER_BYTES:
        bo = "<"
    elif struct.unpack_from(">i", data, 0)[0] == _NIFTI_HEADER_BYTES:
        bo = ">"
    else:
        raise MalformedHeader(f"sizeof_hdr {size_le} != 348 in either byte order")

    magic = data[344:348]
    if magic != b"n+1\x00":
        raise MalformedHeader(f"unsupported NIfTI magic {magic!r} (single-file n+1 required)")

    dim = struct.unpack_from(bo + "8h", data, 40)
    if dim[0] == 3 or (dim[0] == 4 and dim[4] == 1):
        pass
    else:
        raise UnsupportedDimensionality(f"dim[0]={dim[0]} (dim[4]={dim[4]})")
    dims = (dim[1], dim[2], dim[3])
    if min(dims) <= 0:
        raise MalformedHeader(f"non-positive image dims {dims}")

    (datatype,) = struct.unpack_from(bo + "h", data, 70)
    if datatype not in _NIFTI_DTYPES:
        raise UnsupportedDatatype(f"NIfTI datatype code {datatype}")
    dtype = np.dtype(bo + _NIFTI_DTYPES[datatype])

    pixdim = struct.unpack_from(bo + "8f", data, 76)
    spacing = pixdim[1:4]
    if any(not np.isfinite(s) or s <= 0 for s in spacing):
        raise MalformedHeader(f"non-positive pixdim {spacing}")

    vox_offset, scl_slope, scl_inter = struct.unpack_from(bo + "3f", data, 108)
    offset = int(round(vox_offset))
    if offset < _NIFTI_HEADER_BYTES or offset > len(data):
        raise MalformedHeader(f"vox_offset {vox_offset} outside file")

    count = dims[0] * dims[1] * dims[2]
    need = count * dtype.itemsize
    if len(data) - offset < need:
        raise TruncatedData(
            f"dims {dims} need {need} payload bytes, only {len(data) - offset} present"
        )
    raw = np.frombuffer(data, dtype=dtype, count=count, offset=offset)

    rescale = np.isfinite(scl_slope) and scl_slope != 0 and not (
        scl_slope == 1 and scl_inter == 0
    )
    if rescale:
        values = raw.astype(np.float32) * np.float32(scl_slope) + np.float32(scl_inter)
    else:
        values = raw.astype(np.float32)

    ints = None
    if datatype in (2, 4, 8) and not rescale:
        ints = raw.astype(np.int32)
    return Volume(dims, spacing, values), ints


def require_label_data(ints: np.ndarray | None, dims, num_classes: int | None = None) -> LabelMask:
    """Build a LabelMask from parse_nifti's integer payload, or raise."""
    if ints is None:
        raise UnsupportedDatatype("file does not store unscaled integer labels")
    if ints.size and int(ints.min()) < 0:
        raise UnsupportedDatatype("negative values cannot be labels")
    if num_classes is None:
        num_classes = int(ints.max()) + 1 if ints.size else 1
    return LabelMask(_as_dims(dims), ints.astype(np.uint16), num_classes)


def check_mask_pairing(v: Volume, m: LabelMask) -> None:
    if v.dims != m.dims:
        raise DimsMismatch(f"volume dims {v.dims} != mask dims {m.dims}")
