"""Bit-exact file formats: raw volumes, detection CSVs, YAML reports.

Volume container (``.v3dr``), all fields little-endian::

    bytes 0..3    magic "V3DR"
    bytes 4..7    version, u32, currently 1
    bytes 8..11   dtype tag, u32: 0=u8, 1=u16, 2=i32, 3=f32
    bytes 12..27  channels, nz, ny, nx as u32
    bytes 28..51  voxel size (dz, dy, dx) as f64
    bytes 52..    payload, C-order with (c, z, y, x) indexing, x fastest

The i32 dtype is reserved for label volumes (single channel); everything
else reads back as a :class:`~nuclei3d.core.Volume`. Detections are CSV
with header ``z,y,x,score``, floats at 17 significant digits so that a
write/read round trip is lossless. Reports and configs are YAML with keys
emitted in a fixed order so files diff cleanly.
"""

import struct
from typing import NamedTuple

import numpy as np
import yaml

from .core import LabelVolume, Volume, VoxelSize
from .errors import (
    BadMagicError,
    FormatError,
    MalformedRowError,
    TruncatedPayloadError,
    UnsupportedDtypeError,
    UnsupportedVersionError,
)

__all__ = [
    "Detection",
    "read_volume",
    "write_volume",
    "read_detections",
    "write_detections",
    "read_report",
    "write_report",
]

_MAGIC = b"V3DR"
_VERSION = 1
_HEADER = struct.Struct("<4sIIIIIIddd")

_DTYPE_TAGS = {
    np.dtype(np.uint8): 0,
    np.dtype(np.uint16): 1,
    np.dtype(np.int32): 2,
    np.dtype(np.float32): 3,
}
_TAG_DTYPES = {
    0: np.dtype("<u1"),
    1: np.dtype("<u2"),
    2: np.dtype("<i4"),
    3: np.dtype("<f4"),
}


class Detection(NamedTuple):
    """One detected center point, continuous voxel coordinates plus score."""

    z: float
    y: float
    x: float
    score: float


def write_volume(path, volume):
    """Write a Volume or LabelVolume; round trips bit-exactly.

    Label volumes are stored as single-channel i32. Scalar volumes must
    already carry one of the supported dtypes (u8, u16, f32); i32 is
    reserved for labels.
    """
    if isinstance(volume, LabelVolume):
        data = volume.labels
        if data.max(initial=0) > np.iinfo(np.int32).max:
            raise UnsupportedDtypeError("label IDs exceed i32 range")
        data = data.astype(np.int32, copy=False)[np.newaxis]
        voxel_size = volume.voxel_size
    elif isinstance(volume, Volume):
        data = volume.data
        voxel_size = volume.voxel_size
        if data.dtype == np.dtype(np.int32):
            raise UnsupportedDtypeError(
                "i32 is reserved for label volumes; cast scalar data to f32"
            )
        if data.dtype not in _DTYPE_TAGS:
            raise UnsupportedDtypeError(f"unsupported volume dtype {data.dtype}")
    else:
        raise TypeError(f"expected Volume or LabelVolume, got {type(volume)!r}")

    tag = _DTYPE_TAGS[np.dtype(data.dtype)]
    channels, nz, ny, nx = data.shape
    header = _HEADER.pack(
        _MAGIC, _VERSION, tag, channels, nz, ny, nx,
        voxel_size.dz, voxel_size.dy, voxel_size.dx,
    )
    payload = np.ascontiguousarray(data).astype(data.dtype.newbyteorder("<")).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_volume(path):
    """Read a ``.v3dr`` file back into a Volume or LabelVolume."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise TruncatedPayloadError(f"{path}: header truncated")
        magic, version, tag, channels, nz, ny, nx, dz, dy, dx = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise BadMagicError(f"{path}: bad magic {magic!r}")
        if version != _VERSION:
            raise UnsupportedVersionError(f"{path}: unsupported version {version}")
        if tag not in _TAG_DTYPES:
            raise UnsupportedDtypeError(f"{path}: unknown dtype tag {tag}")
        if min(channels, nz, ny, nx) <= 0:
            raise FormatError(f"{path}: non-positive count in header")
        dtype = _TAG_DTYPES[tag]
        expected = channels * nz * ny * nx * dtype.itemsize
        payload = fh.read()
    if len(payload) != expected:
        raise TruncatedPayloadError(
            f"{path}: payload has {len(payload)} bytes, header declares {expected}"
        )
    data = np.frombuffer(payload, dtype=dtype).reshape(channels, nz, ny, nx)
    data = data.astype(dtype.newbyteorder("="))
    voxel_size = VoxelSize(dz, dy, dx)
    if tag == 2:
        if channels != 1:
            raise FormatError(f"{path}: label volumes must be single-channel")
        return LabelVolume(data[0], voxel_size)
    return Volume(data, voxel_size)


def write_detections(path, detections):
    """Write detections as CSV, sorted by descending score (stable)."""
    if not all(np.isfinite(d).all() for d in map(np.asarray, detections)):
        raise ValueError("detections must be finite")
    rows = sorted(detections, key=lambda d: -d.score)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("z,y,x,score\n")
        for d in rows:
            fh.write(f"{d.z:.17g},{d.y:.17g},{d.x:.17g},{d.score:.17g}\n")


def read_detections(path):
    """Read a detection CSV; raises MalformedRowError naming the bad line."""
    detections = []
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "z,y,x,score":
        raise MalformedRowError(f"{path}: line 1: expected header 'z,y,x,score'")
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 4:
            raise MalformedRowError(f"{path}: line {lineno}: expected 4 fields")
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise MalformedRowError(f"{path}: line {lineno}: non-numeric field") from None
        if not all(np.isfinite(values)):
            raise MalformedRowError(f"{path}: line {lineno}: non-finite value")
        detections.append(Detection(*values))
    return detections


def write_report(path, mapping):
    """Write a nested mapping as YAML, preserving key order."""
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(mapping, fh, sort_keys=False, default_flow_style=False)


def read_report(path):
    """Read a YAML report or config file into plain Python objects."""
    with open(path, "r", encoding="utf-8") as fh:
        return yaml.safe_load(fh)
