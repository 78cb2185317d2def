"""Center-point detection: NMS on blob maps, centroids of segmentations."""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi

from .core import center_of_mass
from .errors import ShapeMismatchError
from .io import Detection

__all__ = ["NmsConfig", "nms_detect", "centroids_from_labels"]


@dataclass(frozen=True)
class NmsConfig:
    """Detection threshold plus the cube window radius for suppression."""

    gauss_threshold: float
    nms_distance: int

    def __post_init__(self):
        if self.nms_distance < 1:
            raise ValueError("nms_distance must be >= 1")
        if not np.isfinite(self.gauss_threshold):
            raise ValueError("gauss_threshold must be finite")


def nms_detect(pred, cfg):
    """Window-local maxima of a blob map, at or above the score threshold.

    A voxel is a detection iff its value reaches ``gauss_threshold`` and no
    voxel in the Chebyshev cube of radius ``nms_distance`` around it is
    larger. Candidates are visited in raster order and dropped when an
    already-accepted detection lies within the window radius, so a tied
    plateau inside one window emits exactly its raster-first voxel.
    """
    if pred.channels != 1:
        raise ShapeMismatchError(f"nms expects a single channel, got {pred.channels}")
    vals = pred.channel(0).astype(np.float64, copy=False)
    size = 2 * cfg.nms_distance + 1
    winmax = ndi.maximum_filter(vals, size=size, mode="constant", cval=-np.inf)
    candidates = np.argwhere((vals >= cfg.gauss_threshold) & (vals >= winmax))

    detections = []
    kept = []
    r = cfg.nms_distance
    for z, y, x in candidates:
        z, y, x = int(z), int(y), int(x)
        if any(
            max(abs(z - kz), abs(y - ky), abs(x - kx)) <= r for kz, ky, kx in kept
        ):
            continue
        kept.append((z, y, x))
        detections.append(Detection(float(z), float(y), float(x), float(vals[z, y, x])))
    return detections


def centroids_from_labels(seg):
    """One detection per instance at its center of mass, scored by size.

    Lets segmentation outputs be scored under the detection metric. The
    centroid of a non-convex instance may fall outside its own voxels; it is
    emitted unmoved and may then count as a false positive.
    """
    detections = []
    counts = np.bincount(seg.labels.ravel())
    for i in seg.ids():
        c = center_of_mass(seg, int(i))
        detections.append(Detection(c.z, c.y, c.x, float(counts[int(i)])))
    return detections
