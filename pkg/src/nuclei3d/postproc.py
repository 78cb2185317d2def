"""From predicted maps to instance segmentations: topography, seeds, watershed.

Per variant the topographic map (low floods first) and foreground are:

    sdt         map = prediction;                 fg = pred <= fg_threshold
    3label      map = 1 - P(interior);            fg = 1 - P(background) >= fg_threshold
    affinities  map = 1 - mean(3 affinities);     fg = fg channel >= fg_threshold

Seed rules: sdt thresholds the map strictly below the (negative) seed
threshold; 3label keeps P(interior) >= threshold; affinities keeps voxels
where at least two of the three affinity channels reach the threshold.
Alternatively seeds come from center-point-vector vote accumulation.

The watershed is a deterministic priority flood: claims are queued with key
(map value, insertion sequence number) and resolved lowest-first, so ties
are FIFO. Predictions may be probabilities (default) or logits.
"""

import heapq
from dataclasses import dataclass, asdict

import numpy as np
from scipy.special import expit

from .core import LabelVolume, Volume, VoxelSize, connected_components, dilate_instances
from .errors import ChannelCountError, ShapeMismatchError
from .targets import MAIN_CHANNELS, TargetBundle

__all__ = [
    "PostprocConfig",
    "TopographicMap",
    "build_topography",
    "extract_seeds_main",
    "extract_seeds_cpv",
    "accumulate_votes",
    "watershed",
    "segment",
]

_SEG_VARIANTS = ("sdt", "3label", "affinities")


@dataclass(frozen=True)
class PostprocConfig:
    """One post-processing recipe: variant, thresholds, seed source."""

    variant: str
    seed_source: str = "main"
    seed_threshold: float = 0.0
    foreground_threshold: float = 0.0
    cpv_seed_threshold: float = 0.0
    dilate_result: bool = False

    def __post_init__(self):
        if self.variant not in _SEG_VARIANTS:
            raise ValueError(f"unknown segmentation variant {self.variant!r}")
        if self.seed_source not in ("main", "cpv"):
            raise ValueError(f"seed_source must be 'main' or 'cpv', got {self.seed_source!r}")
        if not np.isfinite([self.seed_threshold, self.foreground_threshold]).all():
            raise ValueError("thresholds must be finite")
        if self.cpv_seed_threshold < 0:
            raise ValueError("cpv_seed_threshold must be >= 0")

    def to_mapping(self):
        return {k: v for k, v in asdict(self).items()}

    @classmethod
    def from_mapping(cls, mapping):
        return cls(**mapping)


@dataclass(frozen=True)
class TopographicMap:
    """Scalar field flooded lowest-first plus the mask it may flood."""

    values: np.ndarray
    foreground: np.ndarray
    voxel_size: VoxelSize = VoxelSize()

    def __post_init__(self):
        if self.values.shape != self.foreground.shape:
            raise ShapeMismatchError("topography values and foreground shapes differ")
        if not np.isfinite(self.values).all():
            raise ValueError("topography values must be finite")


def _pred_volume(pred):
    return pred.volume if isinstance(pred, TargetBundle) else pred


def _main_data(pred, variant, logits):
    """Main channels as float64 probabilities, validating channel count."""
    vol = _pred_volume(pred)
    main = MAIN_CHANNELS[variant]
    if vol.channels not in (main, main + 3):
        raise ChannelCountError(
            f"variant {variant!r} expects {main} or {main + 3} channels, got {vol.channels}"
        )
    data = vol.data[:main].astype(np.float64, copy=False)
    if logits and variant == "3label":
        shifted = data - data.max(axis=0, keepdims=True)
        data = np.exp(shifted)
        data /= data.sum(axis=0, keepdims=True)
    elif logits and variant == "affinities":
        data = expit(data)
    return data, vol


def build_topography(pred, cfg, logits=False):
    """Build the watershed map and foreground mask for one variant."""
    data, vol = _main_data(pred, cfg.variant, logits)
    if cfg.variant == "sdt":
        values = data[0]
        fg = values <= cfg.foreground_threshold
    elif cfg.variant == "3label":
        values = 1.0 - data[1]
        fg = (1.0 - data[0]) >= cfg.foreground_threshold
    else:
        values = 1.0 - data[:3].mean(axis=0)
        fg = data[3] >= cfg.foreground_threshold
    return TopographicMap(values, fg, vol.voxel_size)


def extract_seeds_main(pred, cfg, logits=False):
    """Seed regions from the main prediction channels, labeled 6-connected."""
    data, vol = _main_data(pred, cfg.variant, logits)
    if cfg.variant == "sdt":
        mask = data[0] < cfg.seed_threshold
    elif cfg.variant == "3label":
        mask = data[1] >= cfg.seed_threshold
    else:
        mask = (data[:3] >= cfg.seed_threshold).sum(axis=0) >= 2
    return connected_components(Volume(mask.astype(np.uint8), vol.voxel_size))


def accumulate_votes(cpv_pred, fg_mask):
    """Count, per voxel, how many foreground vectors point at it.

    Each foreground voxel p casts one vote at round(p + v(p)), rounding
    half away from zero per component; votes leaving the volume are
    discarded. The counter total therefore equals the number of foreground
    voxels whose vote lands in bounds.
    """
    vol = _pred_volume(cpv_pred)
    if isinstance(vol, Volume):
        if vol.channels != 3:
            raise ChannelCountError(f"cpv prediction needs 3 channels, got {vol.channels}")
        vec = vol.data.astype(np.float64, copy=False)
    else:
        vec = np.asarray(vol, dtype=np.float64)
    fg = np.asarray(fg_mask, dtype=bool)
    if vec.shape[1:] != fg.shape:
        raise ShapeMismatchError("cpv channels and foreground mask shapes differ")

    counts = np.zeros(fg.shape, dtype=np.int64)
    zz, yy, xx = np.nonzero(fg)
    if zz.size:
        targets = []
        for coords, v in zip((zz, yy, xx), vec):
            t = coords + v[zz, yy, xx]
            targets.append(np.copysign(np.floor(np.abs(t) + 0.5), t).astype(np.int64))
        tz, ty, tx = targets
        ok = (
            (tz >= 0) & (tz < fg.shape[0])
            & (ty >= 0) & (ty < fg.shape[1])
            & (tx >= 0) & (tx < fg.shape[2])
        )
        np.add.at(counts, (tz[ok], ty[ok], tx[ok]), 1)
    return counts


def extract_seeds_cpv(cpv_pred, fg_mask, cpv_seed_threshold):
    """Seed regions from center-point-vector vote accumulation."""
    if cpv_seed_threshold < 0:
        raise ValueError("cpv_seed_threshold must be >= 0")
    counts = accumulate_votes(cpv_pred, fg_mask)
    mask = counts >= cpv_seed_threshold
    vol = _pred_volume(cpv_pred)
    voxel_size = vol.voxel_size if isinstance(vol, Volume) else VoxelSize()
    return connected_components(Volume(mask.astype(np.uint8), voxel_size))


_OFFSETS = ((-1, 0, 0), (1, 0, 0), (0, -1, 0), (0, 1, 0), (0, 0, -1), (0, 0, 1))


def watershed(topo, seeds):
    """Priority-flood the topography from seed regions.

    Seeds are clipped to the foreground mask; each claimed voxel takes its
    claiming seed's ID. Pending claims are ordered by (map value at the
    claimed voxel, insertion sequence number), which makes the result fully
    deterministic. Foreground voxels unreachable from any seed stay
    background.
    """
    if seeds.shape != topo.values.shape:
        raise ShapeMismatchError("seeds and topography shapes differ")
    nz, ny, nx = topo.values.shape
    values = topo.values.ravel().tolist()
    fg = topo.foreground.ravel().tolist()

    out = np.where(topo.foreground, seeds.labels, 0).astype(np.int32)
    result = out.ravel().tolist()

    heap = []
    seq = 0
    seed_voxels = np.argwhere(out > 0)
    for z, y, x in seed_voxels:
        z, y, x = int(z), int(y), int(x)
        idx = (z * ny + y) * nx + x
        lab = result[idx]
        for dz, dy, dx in _OFFSETS:
            az, ay, ax = z + dz, y + dy, x + dx
            if 0 <= az < nz and 0 <= ay < ny and 0 <= ax < nx:
                aidx = (az * ny + ay) * nx + ax
                if fg[aidx] and result[aidx] == 0:
                    heapq.heappush(heap, (values[aidx], seq, az, ay, ax, lab))
                    seq += 1

    while heap:
        _, _, z, y, x, lab = heapq.heappop(heap)
        idx = (z * ny + y) * nx + x
        if result[idx] != 0:
            continue
        result[idx] = lab
        for dz, dy, dx in _OFFSETS:
            az, ay, ax = z + dz, y + dy, x + dx
            if 0 <= az < nz and 0 <= ay < ny and 0 <= ax < nx:
                aidx = (az * ny + ay) * nx + ax
                if fg[aidx] and result[aidx] == 0:
                    heapq.heappush(heap, (values[aidx], seq, az, ay, ax, lab))
                    seq += 1

    out = np.asarray(result, dtype=np.int32).reshape(nz, ny, nx)
    return LabelVolume(out, topo.voxel_size)


def segment(pred, cfg, logits=False):
    """Full pipeline: topography, seeds (main or cpv), watershed, dilation.

    With ``seed_source == 'cpv'`` the prediction must carry the three vector
    channels after the variant's main channels.
    """
    vol = _pred_volume(pred)
    topo = build_topography(pred, cfg, logits=logits)
    if cfg.seed_source == "main":
        seeds = extract_seeds_main(pred, cfg, logits=logits)
    else:
        main = MAIN_CHANNELS[cfg.variant]
        if vol.channels != main + 3:
            raise ChannelCountError(
                f"cpv seeding for {cfg.variant!r} needs {main + 3} channels, got {vol.channels}"
            )
        cpv = Volume(vol.data[main:], vol.voxel_size)
        seeds = extract_seeds_cpv(cpv, topo.foreground, cfg.cpv_seed_threshold)
    out = watershed(topo, seeds)
    if cfg.dilate_result:
        out = dilate_instances(out, 1)
    return out
