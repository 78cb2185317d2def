"""Segmentation AP over IoU thresholds and the center-point detection AP.

AP is TP / (TP + FP + FN) throughout. Segmentation matching is one-to-one,
greedy by descending IoU among pairs with IoU strictly above the threshold;
a detection is a true positive iff it lies within a ground-truth instance,
at most one per instance.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError

__all__ = [
    "IOU_THRESHOLDS",
    "EvalReport",
    "iou_matrix",
    "segmentation_ap",
    "detection_ap",
    "evaluate",
    "aggregate_reports",
]

IOU_THRESHOLDS = tuple(t / 10 for t in range(1, 10))


@dataclass(frozen=True)
class EvalReport:
    """AP per IoU threshold, their mean, detection AP, and the raw counts.

    Fields belonging to an input that was not supplied stay None.
    """

    ap_per_iou: dict = None
    seg_counts: dict = None
    av_ap: float = None
    detection_ap: float = None
    detection_counts: tuple = None

    def to_mapping(self):
        """Stable-order mapping for the YAML report format."""
        out = {}
        if self.ap_per_iou is not None:
            seg = {"av_ap": self.av_ap, "ap": {}, "counts": {}}
            for t in IOU_THRESHOLDS:
                key = f"{t:.2f}"
                seg["ap"][key] = self.ap_per_iou[t]
                tp, fp, fn = self.seg_counts[t]
                seg["counts"][key] = {"tp": tp, "fp": fp, "fn": fn}
            out["segmentation"] = seg
        if self.detection_ap is not None:
            tp, fp, fn = self.detection_counts
            out["detection"] = {"ap": self.detection_ap, "counts": {"tp": tp, "fp": fp, "fn": fn}}
        return out


def _instance_sizes(lab):
    counts = np.bincount(lab.ravel())
    counts[0] = 0
    return counts


def iou_matrix(gt, pred):
    """IoU per overlapping (gt_id, pred_id) pair, as a sparse dict."""
    if gt.shape != pred.shape:
        raise ShapeMismatchError(f"gt shape {gt.shape} vs pred shape {pred.shape}")
    g = gt.labels
    p = pred.labels
    both = (g > 0) & (p > 0)
    gsz = _instance_sizes(g)
    psz = _instance_sizes(p)
    out = {}
    if both.any():
        stride = int(p.max()) + 1
        keys = g[both].astype(np.int64) * stride + p[both].astype(np.int64)
        pair, inter = np.unique(keys, return_counts=True)
        for k, n in zip(pair, inter):
            gi, pi = int(k // stride), int(k % stride)
            union = int(gsz[gi]) + int(psz[pi]) - int(n)
            out[(gi, pi)] = float(n) / float(union)
    return out


def segmentation_ap(gt, pred, iou_threshold):
    """Greedy one-to-one matching above an IoU threshold.

    Pairs with IoU strictly greater than the threshold are matched in order
    of descending IoU, ties broken by (smaller gt id, smaller pred id).

    Returns
    -------
    (ap, tp, fp, fn)
    """
    if not 0 < iou_threshold < 1:
        raise ValueError("iou_threshold must be in (0, 1)")
    ious = iou_matrix(gt, pred)
    pairs = sorted(
        ((iou, g, p) for (g, p), iou in ious.items() if iou > iou_threshold),
        key=lambda t: (-t[0], t[1], t[2]),
    )
    matched_gt = set()
    matched_pred = set()
    tp = 0
    for _, g, p in pairs:
        if g in matched_gt or p in matched_pred:
            continue
        matched_gt.add(g)
        matched_pred.add(p)
        tp += 1
    fp = len(pred.ids()) - tp
    fn = len(gt.ids()) - tp
    return _ap(tp, fp, fn), tp, fp, fn


def _ap(tp, fp, fn):
    denom = tp + fp + fn
    return float(tp) / denom if denom else 1.0


def _round_half_away(v):
    return int(np.copysign(np.floor(abs(v) + 0.5), v))


def detection_ap(gt, detections):
    """Center-point detection AP with the one-detection-per-instance rule.

    Each detection is assigned to the instance containing its rounded
    coordinate (half away from zero). Per instance the highest-scoring
    contained detection is the TP, ties going to the earliest detection in
    the list; every other detection, including out-of-bounds and background
    hits, is a FP. Instances containing no detection are FN.

    Returns
    -------
    (ap, tp, fp, fn)
    """
    lab = gt.labels
    nz, ny, nx = lab.shape
    hits = {}
    n_background = 0
    for det in detections:
        z, y, x = (_round_half_away(v) for v in (det.z, det.y, det.x))
        if 0 <= z < nz and 0 <= y < ny and 0 <= x < nx and lab[z, y, x] > 0:
            hits[int(lab[z, y, x])] = hits.get(int(lab[z, y, x]), 0) + 1
        else:
            n_background += 1
    tp = len(hits)
    extra = sum(h - 1 for h in hits.values())
    fp = n_background + extra
    fn = len(gt.ids()) - tp
    return _ap(tp, fp, fn), tp, fp, fn


def evaluate(gt, seg=None, detections=None):
    """Fill an EvalReport for whichever predictions are supplied."""
    ap_per_iou = seg_counts = av_ap = None
    det_ap = det_counts = None
    if seg is not None:
        ap_per_iou = {}
        seg_counts = {}
        for t in IOU_THRESHOLDS:
            ap, tp, fp, fn = segmentation_ap(gt, seg, t)
            ap_per_iou[t] = ap
            seg_counts[t] = (tp, fp, fn)
        av_ap = sum(ap_per_iou[t] for t in IOU_THRESHOLDS) / len(IOU_THRESHOLDS)
    if detections is not None:
        det_ap, tp, fp, fn = detection_ap(gt, detections)
        det_counts = (tp, fp, fn)
    return EvalReport(ap_per_iou, seg_counts, av_ap, det_ap, det_counts)


def aggregate_reports(reports, mode="mean"):
    """Field-wise mean of AP values; counts are summed."""
    if mode != "mean":
        raise ValueError(f"unknown aggregation mode {mode!r}")
    if not reports:
        raise ValueError("cannot aggregate an empty report list")
    has_seg = reports[0].ap_per_iou is not None
    has_det = reports[0].detection_ap is not None
    if any((r.ap_per_iou is not None) != has_seg for r in reports) or any(
        (r.detection_ap is not None) != has_det for r in reports
    ):
        raise ValueError("reports carry different fields; cannot aggregate")

    ap_per_iou = seg_counts = av_ap = None
    det_ap = det_counts = None
    if has_seg:
        ap_per_iou = {
            t: sum(r.ap_per_iou[t] for r in reports) / len(reports) for t in IOU_THRESHOLDS
        }
        seg_counts = {
            t: tuple(sum(r.seg_counts[t][i] for r in reports) for i in range(3))
            for t in IOU_THRESHOLDS
        }
        av_ap = sum(ap_per_iou[t] for t in IOU_THRESHOLDS) / len(IOU_THRESHOLDS)
    if has_det:
        det_ap = sum(r.detection_ap for r in reports) / len(reports)
        det_counts = tuple(sum(r.detection_counts[i] for r in reports) for i in range(3))
    return EvalReport(ap_per_iou, seg_counts, av_ap, det_ap, det_counts)
