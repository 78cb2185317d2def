"""Encode ground-truth labels into the five training-target representations.

Encoders return float64 volumes (uint8 for the 3-label class map); cast to
float32 before writing to disk. Channel layouts of the bundled targets are
normative for files on disk:

    sdt         [sdt]
    3label      [p_background, p_interior, p_boundary]   (one-hot)
    affinities  [aff_z, aff_y, aff_x, foreground]
    gauss       [gauss]
    +cpv        ... followed by [vz, vy, vx]

The 3-label class map itself uses 0 = background, 1 = interior,
2 = boundary; the one-hot channels follow that class order.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi

from .core import LabelVolume, Volume, erode_instances

__all__ = [
    "VARIANTS",
    "MAIN_CHANNELS",
    "BACKGROUND",
    "INTERIOR",
    "BOUNDARY",
    "TargetBundle",
    "signed_boundary_distance",
    "encode_sdt",
    "encode_three_label",
    "encode_affinities",
    "encode_cpv",
    "encode_gauss",
    "encode_bundle",
]

VARIANTS = ("sdt", "3label", "affinities", "gauss")
MAIN_CHANNELS = {"sdt": 1, "3label": 3, "affinities": 4, "gauss": 1}

BACKGROUND, INTERIOR, BOUNDARY = 0, 1, 2


@dataclass(frozen=True)
class TargetBundle:
    """Encoded training target for one model variant.

    ``volume`` holds the variant's main channels, followed by the three
    center-point-vector channels when ``with_cpv`` is set.
    """

    volume: Volume
    variant: str
    with_cpv: bool

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        expected = MAIN_CHANNELS[self.variant] + (3 if self.with_cpv else 0)
        if self.volume.channels != expected:
            raise ValueError(
                f"{self.variant} bundle needs {expected} channels, got {self.volume.channels}"
            )

    @property
    def main_channels(self):
        return MAIN_CHANNELS[self.variant]


def _boundary_mask(lab):
    """Foreground voxels with an in-bounds face neighbor of different label."""
    diff = np.zeros(lab.shape, dtype=bool)
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        ne = lab[tuple(lo)] != lab[tuple(hi)]
        diff[tuple(lo)] |= ne
        diff[tuple(hi)] |= ne
    return (lab > 0) & diff


def signed_boundary_distance(labels, anisotropic=False):
    """Signed Euclidean distance to the nearest boundary voxel.

    Boundary voxels are the foreground voxels adjacent (6-connected) to
    background or to a different instance; they get distance 0. Values are
    negative strictly inside instances, positive in the background. If no
    boundary voxel exists the result is ±inf.

    Parameters
    ----------
    labels : LabelVolume
    anisotropic : bool
        Measure distance in physical units using the label volume's voxel
        size instead of voxel units.
    """
    lab = labels.labels
    fg = lab > 0
    boundary = _boundary_mask(lab)
    if not boundary.any():
        dist = np.full(lab.shape, np.inf)
    else:
        sampling = labels.voxel_size.as_tuple() if anisotropic else None
        dist = ndi.distance_transform_edt(~boundary, sampling=sampling)
    return np.where(fg, -dist, dist)


def encode_sdt(labels, scale=5.0, anisotropic=False):
    """Tanh-capped signed boundary distance, negative inside instances.

    ``scale`` divides the distance before the tanh; with no boundary at all
    the output saturates to ±1.
    """
    if scale <= 0:
        raise ValueError("scale must be > 0")
    signed = signed_boundary_distance(labels, anisotropic=anisotropic)
    return Volume(np.tanh(signed / scale)[np.newaxis], labels.voxel_size)


def encode_three_label(labels):
    """Classify voxels into background (0), interior (1), boundary (2).

    Boundary is every foreground voxel with a 6-connected in-bounds neighbor
    that is background or belongs to a different instance.
    """
    lab = labels.labels
    out = np.zeros(lab.shape, dtype=np.uint8)
    out[lab > 0] = INTERIOR
    out[_boundary_mask(lab)] = BOUNDARY
    return Volume(out[np.newaxis], labels.voxel_size)


def encode_affinities(labels):
    """Direct-neighbor affinities plus foreground mask, on eroded labels.

    Instances are eroded once before encoding so that touching instances are
    separated by more than one voxel. Channel c in (0, 1, 2) is 1 where the
    voxel and its +z/+y/+x neighbor carry the same positive ID; the last
    slice along each axis stays 0. Channel 3 is the eroded foreground.
    """
    er = erode_instances(labels, 1).labels
    out = np.zeros((4,) + er.shape, dtype=np.float64)
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        same = (er[tuple(lo)] == er[tuple(hi)]) & (er[tuple(lo)] > 0)
        out[axis][tuple(lo)] = same
    out[3] = er > 0
    return Volume(out, labels.voxel_size)


def _instance_centers(lab):
    """Per-instance center of mass, bit-identical to core.center_of_mass."""
    zz, yy, xx = np.nonzero(lab)
    ids = lab[zz, yy, xx]
    order = np.argsort(ids, kind="stable")
    ids_sorted = ids[order]
    cut = np.flatnonzero(np.diff(ids_sorted)) + 1
    starts = np.concatenate(([0], cut))
    ends = np.concatenate((cut, [ids_sorted.size]))
    centers = {}
    for a, b in zip(starts, ends):
        i = int(ids_sorted[a])
        sel = order[a:b]
        centers[i] = (zz[sel].mean(), yy[sel].mean(), xx[sel].mean())
    return centers


def encode_cpv(labels):
    """Per-voxel vector from each foreground voxel to its instance center.

    Channels are (vz, vy, vx) in voxel units; background voxels carry the
    zero vector. Centers are computed on the un-eroded labels.
    """
    lab = labels.labels
    out = np.zeros((3,) + lab.shape, dtype=np.float64)
    zz, yy, xx = np.nonzero(lab)
    if zz.size:
        centers = _instance_centers(lab)
        table = np.zeros((max(centers) + 1, 3))
        for i, c in centers.items():
            table[i] = c
        per_voxel = table[lab[zz, yy, xx]]
        out[0][zz, yy, xx] = per_voxel[:, 0] - zz
        out[1][zz, yy, xx] = per_voxel[:, 1] - yy
        out[2][zz, yy, xx] = per_voxel[:, 2] - xx
    return Volume(out, labels.voxel_size)


def encode_gauss(labels, sigma=2.0):
    """Gaussian blobs around instance centers, combined by per-voxel maximum.

    The value at voxel p is max over centers c of exp(-|p - c|^2 / (2 sigma^2)),
    so isolated centers peak at 1 regardless of how many instances exist.
    """
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    lab = labels.labels
    out = np.zeros(lab.shape, dtype=np.float64)
    nz, ny, nx = lab.shape
    z = np.arange(nz, dtype=np.float64)[:, None, None]
    y = np.arange(ny, dtype=np.float64)[None, :, None]
    x = np.arange(nx, dtype=np.float64)[None, None, :]
    for cz, cy, cx in _instance_centers(lab).values():
        d2 = (z - cz) ** 2 + (y - cy) ** 2 + (x - cx) ** 2
        np.maximum(out, np.exp(d2 / (-2.0 * sigma * sigma)), out=out)
    return Volume(out[np.newaxis], labels.voxel_size)


def encode_bundle(labels, variant, with_cpv=False, tanh_scale=5.0, sigma=2.0):
    """Encode one variant's training target, optionally with CPV channels.

    The 3-label variant is bundled as three one-hot probability channels in
    class order (background, interior, boundary) so the result is shaped
    like the matching model output and feeds post-processing directly.
    """
    if variant == "sdt":
        main = encode_sdt(labels, scale=tanh_scale).data
    elif variant == "3label":
        cls = encode_three_label(labels).channel(0)
        main = (cls[np.newaxis] == np.arange(3)[:, None, None, None]).astype(np.float64)
    elif variant == "affinities":
        main = encode_affinities(labels).data
    elif variant == "gauss":
        main = encode_gauss(labels, sigma=sigma).data
    else:
        raise ValueError(f"unknown variant {variant!r}")
    main = main.astype(np.float64)
    if with_cpv:
        main = np.concatenate([main, encode_cpv(labels).data], axis=0)
    return TargetBundle(Volume(main, labels.voxel_size), variant, with_cpv)
