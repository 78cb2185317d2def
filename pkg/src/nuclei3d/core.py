"""Dense 3d volume containers and basic instance morphology.

Conventions used throughout the toolkit:

* scalar data is indexed ``(c, z, y, x)``, instance labels ``(z, y, x)``
* all coordinates are in voxel units; :class:`VoxelSize` travels along as
  metadata and is consulted only where physical distance matters
* morphology and adjacency use the 6-connected (face adjacency)
  structuring element unless stated otherwise
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage as ndi

from .errors import ShapeMismatchError, UnknownIdError

__all__ = [
    "VoxelSize",
    "Point3",
    "Volume",
    "LabelVolume",
    "center_of_mass",
    "erode_instances",
    "dilate_instances",
    "connected_components",
]


@dataclass(frozen=True)
class VoxelSize:
    """Physical voxel edge lengths ``(dz, dy, dx)`` in micrometers."""

    dz: float = 1.0
    dy: float = 1.0
    dx: float = 1.0

    def __post_init__(self):
        if not (self.dz > 0 and self.dy > 0 and self.dx > 0):
            raise ValueError("voxel edge lengths must be strictly positive")

    def as_tuple(self):
        return (self.dz, self.dy, self.dx)


class Point3(NamedTuple):
    """A continuous coordinate in voxel units."""

    z: float
    y: float
    x: float


def _readonly(arr):
    view = arr.view()
    view.setflags(write=False)
    return view


@dataclass(frozen=True, eq=False)
class Volume:
    """Dense multi-channel scalar grid.

    ``data`` is indexed ``(c, z, y, x)``; a 3d array is accepted and treated
    as a single channel. The stored array is exposed read-only; callers must
    not mutate the array they passed in afterwards.
    """

    data: np.ndarray
    voxel_size: VoxelSize = VoxelSize()

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim == 3:
            data = data[np.newaxis]
        if data.ndim != 4 or data.size == 0:
            raise ShapeMismatchError(
                f"volume data must be a non-empty (c, z, y, x) array, got shape {data.shape}"
            )
        if np.issubdtype(data.dtype, np.floating) and not np.isfinite(data).all():
            raise ValueError("volume values must be finite")
        object.__setattr__(self, "data", _readonly(data))

    @property
    def channels(self):
        return self.data.shape[0]

    @property
    def shape(self):
        """Spatial shape ``(nz, ny, nx)``."""
        return self.data.shape[1:]

    def channel(self, c):
        """Read-only 3d view of channel ``c``."""
        return self.data[c]

    def astype(self, dtype):
        return Volume(self.data.astype(dtype), self.voxel_size)

    def __eq__(self, other):
        if not isinstance(other, Volume):
            return NotImplemented
        return (
            self.data.dtype == other.data.dtype
            and self.data.shape == other.data.shape
            and np.array_equal(self.data, other.data)
            and self.voxel_size == other.voxel_size
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class LabelVolume:
    """Dense 3d grid of instance IDs; 0 is background.

    IDs need not be contiguous. The stored array is exposed read-only.
    """

    labels: np.ndarray
    voxel_size: VoxelSize = VoxelSize()

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 3 or labels.size == 0:
            raise ShapeMismatchError(
                f"labels must be a non-empty (z, y, x) array, got shape {labels.shape}"
            )
        if not np.issubdtype(labels.dtype, np.integer):
            raise ValueError(f"labels must be integer, got dtype {labels.dtype}")
        if labels.min() < 0:
            raise ValueError("labels must be non-negative")
        object.__setattr__(self, "labels", _readonly(labels))

    @property
    def shape(self):
        return self.labels.shape

    def ids(self):
        """Sorted array of the positive instance IDs present."""
        ids = np.unique(self.labels)
        return ids[ids > 0]

    def foreground(self):
        """Boolean mask of all foreground voxels."""
        return self.labels > 0

    def __eq__(self, other):
        if not isinstance(other, LabelVolume):
            return NotImplemented
        return (
            self.labels.dtype == other.labels.dtype
            and self.labels.shape == other.labels.shape
            and np.array_equal(self.labels, other.labels)
            and self.voxel_size == other.voxel_size
        )

    __hash__ = None


def center_of_mass(labels, instance_id):
    """Unweighted mean of the voxel-center coordinates carrying ``instance_id``.

    Parameters
    ----------
    labels : LabelVolume
    instance_id : int
        Positive instance ID; must be present in ``labels``.

    Returns
    -------
    Point3
        Center of mass in voxel units.
    """
    coords = np.nonzero(labels.labels == instance_id)
    if coords[0].size == 0:
        raise UnknownIdError(f"instance id {instance_id} not present")
    return Point3(*(float(c.mean()) for c in coords))


def _face_neighbor(lab, axis, step):
    """Neighbor labels along one face direction; out-of-bounds reads as 0."""
    out = np.zeros_like(lab)
    src = [slice(None)] * 3
    dst = [slice(None)] * 3
    if step > 0:
        src[axis] = slice(1, None)
        dst[axis] = slice(0, -1)
    else:
        src[axis] = slice(0, -1)
        dst[axis] = slice(1, None)
    out[tuple(dst)] = lab[tuple(src)]
    return out


def erode_instances(labels, iterations):
    """Erode every instance independently with the 6-connected element.

    A foreground voxel survives one iteration iff all six face neighbors
    carry the same ID; neighbors outside the volume count as background.
    Instances may vanish entirely.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    lab = labels.labels.copy()
    for _ in range(iterations):
        if not lab.any():
            break
        keep = lab > 0
        for axis in range(3):
            for step in (-1, 1):
                keep &= _face_neighbor(lab, axis, step) == lab
        lab = np.where(keep, lab, 0)
    return LabelVolume(lab, labels.voxel_size)


def dilate_instances(labels, iterations):
    """Grow every instance by the 6-connected element.

    Existing foreground is never overwritten. A background voxel adjacent
    to several distinct instances is claimed by the smallest ID.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    lab = labels.labels.copy()
    sentinel = np.iinfo(np.int64).max
    for _ in range(iterations):
        candidate = np.full(lab.shape, sentinel, dtype=np.int64)
        for axis in range(3):
            for step in (-1, 1):
                neighbor = _face_neighbor(lab, axis, step)
                np.minimum(
                    candidate,
                    np.where(neighbor > 0, neighbor.astype(np.int64), sentinel),
                    out=candidate,
                )
        claim = (lab == 0) & (candidate != sentinel)
        lab[claim] = candidate[claim].astype(lab.dtype)
    return LabelVolume(lab, labels.voxel_size)


def connected_components(mask, connectivity=6):
    """Label maximal connected foreground regions of a binary mask.

    IDs are assigned in deterministic raster-scan first-encounter order,
    starting at 1.

    Parameters
    ----------
    mask : Volume or ndarray
        Single-channel binary mask with values in {0, 1}.
    connectivity : {6, 26}
        Face adjacency or full adjacency.
    """
    if isinstance(mask, Volume):
        if mask.channels != 1:
            raise ShapeMismatchError("connected_components expects a single channel")
        arr = mask.channel(0)
        voxel_size = mask.voxel_size
    else:
        arr = np.asarray(mask)
        voxel_size = VoxelSize()
    if arr.ndim != 3:
        raise ShapeMismatchError(f"mask must be 3d, got shape {arr.shape}")
    if arr.dtype != bool and not np.isin(arr, (0, 1)).all():
        raise ValueError("mask values must be 0 or 1")
    if connectivity not in (6, 26):
        raise ValueError("connectivity must be 6 or 26")
    structure = ndi.generate_binary_structure(3, 1 if connectivity == 6 else 3)
    lab, n = ndi.label(arr != 0, structure=structure)
    lab = lab.astype(np.int32)
    if n > 0:
        lab = _relabel_raster_order(lab, n)
    return LabelVolume(lab, voxel_size)


def _relabel_raster_order(lab, n):
    # scipy does not document its ID ordering; enforce first-encounter order.
    ids, first = np.unique(lab.ravel(), return_index=True)
    keep = ids > 0
    ids, first = ids[keep], first[keep]
    remap = np.zeros(n + 1, dtype=np.int32)
    remap[ids[np.argsort(first, kind="stable")]] = np.arange(1, ids.size + 1)
    return remap[lab]
