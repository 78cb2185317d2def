import numpy as np
import pytest

from nuclei3d import (
    IOU_THRESHOLDS,
    Detection,
    LabelVolume,
    aggregate_reports,
    detection_ap,
    evaluate,
    iou_matrix,
    segmentation_ap,
)
from nuclei3d.errors import ShapeMismatchError

from conftest import random_blob_labels
from oracles import iou_pairs_oracle, optimal_match_count


def labels_from(arr):
    return LabelVolume(np.asarray(arr, dtype=np.int32))


class TestIouMatrix:
    def test_identical_instance(self):
        lab = np.zeros((3, 3, 3), dtype=np.int32)
        lab[1, 1, 1] = 1
        assert iou_matrix(labels_from(lab), labels_from(lab)) == {(1, 1): 1.0}

    def test_disjoint_no_entry(self):
        a = np.zeros((3, 3, 3), dtype=np.int32)
        b = np.zeros((3, 3, 3), dtype=np.int32)
        a[0, 0, 0] = 1
        b[2, 2, 2] = 1
        assert iou_matrix(labels_from(a), labels_from(b)) == {}

    def test_counting_example(self):
        gt = np.zeros((2, 4, 4), dtype=np.int32)
        pred = np.zeros((2, 4, 4), dtype=np.int32)
        gt[:, 0:2, 0:2] = 1  # 8 voxels
        pred[:, 1:3, 0:2] = 1  # 8 voxels, overlap 2x2x1... checked below
        got = iou_matrix(labels_from(gt), labels_from(pred))
        assert got == {(1, 1): pytest.approx(4 / 12)}

    def test_matches_set_oracle(self, rng):
        for _ in range(5):
            gt = random_blob_labels(rng, (7, 7, 7), 3)
            pred = random_blob_labels(rng, (7, 7, 7), 3)
            got = iou_matrix(labels_from(gt), labels_from(pred))
            expected = iou_pairs_oracle(gt, pred)
            assert got.keys() == expected.keys()
            for k in got:
                assert got[k] == pytest.approx(expected[k], abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            iou_matrix(
                labels_from(np.zeros((2, 2, 2))), labels_from(np.zeros((3, 2, 2)))
            )


class TestSegmentationAp:
    def test_perfect_segmentation(self, rng):
        lab = random_blob_labels(rng, (8, 8, 8), 5)
        lv = labels_from(lab)
        for t in (0.3, 0.5, 0.9):
            ap, tp, fp, fn = segmentation_ap(lv, lv, t)
            assert ap == 1.0 and fp == fn == 0 and tp == len(lv.ids())

    def test_formula(self):
        # 2 matches, 1 extra prediction, 1 missed instance -> AP 0.5
        gt = np.zeros((1, 1, 9), dtype=np.int32)
        pred = np.zeros((1, 1, 9), dtype=np.int32)
        gt[0, 0, 0:2] = 1
        pred[0, 0, 0:2] = 1
        gt[0, 0, 3:5] = 2
        pred[0, 0, 3:5] = 2
        gt[0, 0, 6:8] = 3  # missed
        pred[0, 0, 8] = 4  # spurious
        ap, tp, fp, fn = segmentation_ap(labels_from(gt), labels_from(pred), 0.5)
        assert (ap, tp, fp, fn) == (0.5, 2, 1, 1)

    def test_iou_strictly_greater_than_threshold(self):
        gt = np.zeros((1, 1, 4), dtype=np.int32)
        pred = np.zeros((1, 1, 4), dtype=np.int32)
        gt[0, 0, :2] = 1
        pred[0, 0, 1:3] = 1  # IoU exactly 1/3
        third = 1 / 3
        ap, tp, _, _ = segmentation_ap(labels_from(gt), labels_from(pred), third)
        assert tp == 0 and ap == 0.0

    def test_monotone_in_threshold(self, rng):
        gt = random_blob_labels(rng, (8, 8, 8), 4)
        pred = np.roll(gt, 1, axis=2)
        aps = [
            segmentation_ap(labels_from(gt), labels_from(pred), t)[0]
            for t in IOU_THRESHOLDS
        ]
        assert all(a >= b for a, b in zip(aps, aps[1:]))

    def test_relabeling_invariance(self, rng):
        gt = random_blob_labels(rng, (8, 8, 8), 4)
        pred = np.roll(gt, 1, axis=1)
        permuted = np.zeros_like(pred)
        ids = [int(i) for i in np.unique(pred) if i > 0]
        for new, old in enumerate(reversed(ids), start=1):
            permuted[pred == old] = new
        a = segmentation_ap(labels_from(gt), labels_from(pred), 0.3)
        b = segmentation_ap(labels_from(gt), labels_from(permuted), 0.3)
        assert a == b

    def test_greedy_equals_exhaustive_on_random_layouts(self, rng):
        for _ in range(30):
            gt = random_blob_labels(rng, (7, 7, 7), int(rng.integers(1, 5)))
            pred = np.roll(gt, tuple(rng.integers(-1, 2, size=3)), axis=(0, 1, 2))
            gtv, prv = labels_from(gt), labels_from(pred)
            for t in (0.3, 0.5, 0.7):
                _, tp, fp, fn = segmentation_ap(gtv, prv, t)
                best = optimal_match_count(iou_pairs_oracle(gt, pred), gtv.ids(), t)
                assert tp == best
                assert fp == len(prv.ids()) - best and fn == len(gtv.ids()) - best

    def test_empty_gt_and_pred_is_one(self):
        empty = labels_from(np.zeros((2, 2, 2)))
        ap, tp, fp, fn = segmentation_ap(empty, empty, 0.5)
        assert ap == 1.0 and tp == fp == fn == 0

    def test_threshold_domain(self, rng):
        lv = labels_from(random_blob_labels(rng, (4, 4, 4), 1))
        with pytest.raises(ValueError):
            segmentation_ap(lv, lv, 0.0)


class TestDetectionAp:
    def make_gt(self):
        lab = np.zeros((5, 5, 12), dtype=np.int32)
        lab[1:4, 1:4, 1:4] = 1
        lab[1:4, 1:4, 7:10] = 2
        return labels_from(lab)

    def test_one_detection_per_instance(self):
        gt = self.make_gt()
        dets = [Detection(2, 2, 2, 1.0), Detection(2, 2, 8, 0.9)]
        assert detection_ap(gt, dets) == (1.0, 2, 0, 0)

    def test_two_in_one_counts_once(self):
        lab = np.zeros((5, 5, 5), dtype=np.int32)
        lab[1:4, 1:4, 1:4] = 1
        dets = [Detection(2, 2, 2, 1.0), Detection(2, 2, 3, 0.8)]
        assert detection_ap(labels_from(lab), dets) == (0.5, 1, 1, 0)

    def test_background_only(self):
        lab = np.zeros((5, 5, 5), dtype=np.int32)
        lab[1:4, 1:4, 1:4] = 1
        dets = [Detection(4, 4, 4, 1.0)]
        assert detection_ap(labels_from(lab), dets) == (0.0, 0, 1, 1)

    def test_out_of_bounds_is_fp(self):
        gt = self.make_gt()
        dets = [Detection(-3.0, 2, 2, 1.0)]
        ap, tp, fp, fn = detection_ap(gt, dets)
        assert (tp, fp, fn) == (0, 1, 2)

    def test_rounding_half_away_from_zero(self):
        lab = np.zeros((3, 3, 3), dtype=np.int32)
        lab[1, 1, 2] = 1
        # x = 1.5 rounds to 2 (inside), not to 1 (outside)
        assert detection_ap(labels_from(lab), [Detection(1.0, 1.0, 1.5, 1.0)])[1] == 1

    def test_count_identities(self, rng):
        gt = labels_from(random_blob_labels(rng, (8, 8, 8), 4))
        dets = [
            Detection(float(rng.integers(0, 8)), float(rng.integers(0, 8)), float(rng.integers(0, 8)), float(s))
            for s in rng.random(10)
        ]
        _, tp, fp, fn = detection_ap(gt, dets)
        assert tp + fn == len(gt.ids())
        assert tp + fp == len(dets)

    def test_centroids_of_convex_instances_are_perfect(self, rng):
        from nuclei3d import centroids_from_labels
        from test_targets import ball_labels

        lv = ball_labels()
        assert detection_ap(lv, centroids_from_labels(lv))[0] == 1.0


class TestEvaluateAndAggregate:
    def test_perfect_inputs(self, rng):
        lab = labels_from(random_blob_labels(rng, (8, 8, 8), 4))
        from nuclei3d import centroids_from_labels

        report = evaluate(lab, seg=lab, detections=centroids_from_labels(lab))
        assert report.av_ap == 1.0 and report.detection_ap == 1.0
        assert all(report.ap_per_iou[t] == 1.0 for t in IOU_THRESHOLDS)

    def test_empty_prediction(self, rng):
        lab = labels_from(random_blob_labels(rng, (8, 8, 8), 4))
        empty = labels_from(np.zeros((8, 8, 8)))
        report = evaluate(lab, seg=empty)
        assert report.av_ap == 0.0
        n = len(lab.ids())
        assert all(report.seg_counts[t] == (0, 0, n) for t in IOU_THRESHOLDS)

    def test_av_ap_is_mean_and_formula_holds(self, rng):
        gt = random_blob_labels(rng, (9, 9, 9), 5)
        pred = np.roll(gt, 1, axis=2)
        report = evaluate(labels_from(gt), seg=labels_from(pred))
        assert report.av_ap == pytest.approx(
            np.mean([report.ap_per_iou[t] for t in IOU_THRESHOLDS]), abs=1e-12
        )
        for t in IOU_THRESHOLDS:
            tp, fp, fn = report.seg_counts[t]
            expected = tp / (tp + fp + fn) if tp + fp + fn else 1.0
            assert report.ap_per_iou[t] == pytest.approx(expected, abs=1e-12)

    def test_omitted_inputs_stay_none(self, rng):
        lab = labels_from(random_blob_labels(rng, (6, 6, 6), 2))
        report = evaluate(lab, seg=lab)
        assert report.detection_ap is None and report.detection_counts is None
        report = evaluate(lab, detections=[])
        assert report.ap_per_iou is None and report.av_ap is None

    def test_aggregate_single_report_is_itself(self, rng):
        lab = labels_from(random_blob_labels(rng, (6, 6, 6), 3))
        report = evaluate(lab, seg=lab)
        agg = aggregate_reports([report])
        assert agg.ap_per_iou == report.ap_per_iou and agg.av_ap == report.av_ap

    def test_aggregate_means_and_sums(self):
        a = type(evaluate(labels_from(np.zeros((2, 2, 2)))))  # EvalReport class
        r1 = a(
            ap_per_iou={t: 0.4 for t in IOU_THRESHOLDS},
            seg_counts={t: (4, 3, 3) for t in IOU_THRESHOLDS},
            av_ap=0.4,
            detection_ap=0.5,
            detection_counts=(1, 1, 0),
        )
        r2 = a(
            ap_per_iou={t: 0.6 for t in IOU_THRESHOLDS},
            seg_counts={t: (6, 2, 2) for t in IOU_THRESHOLDS},
            av_ap=0.6,
            detection_ap=0.7,
            detection_counts=(3, 1, 0),
        )
        agg = aggregate_reports([r1, r2])
        assert agg.av_ap == pytest.approx(0.5, abs=1e-15)
        assert agg.ap_per_iou[0.3] == pytest.approx(0.5, abs=1e-15)
        assert agg.seg_counts[0.5] == (10, 5, 5)
        assert agg.detection_ap == pytest.approx(0.6, abs=1e-15)
        assert agg.detection_counts == (4, 2, 0)

    def test_aggregate_three_matches_manual_mean(self, rng):
        reports = []
        for shift in (1, 2, 3):
            gt = random_blob_labels(rng, (8, 8, 8), 4)
            pred = np.roll(gt, shift, axis=0)
            reports.append(evaluate(labels_from(gt), seg=labels_from(pred)))
        agg = aggregate_reports(reports)
        for t in IOU_THRESHOLDS:
            manual = sum(r.ap_per_iou[t] for r in reports) / 3
            assert agg.ap_per_iou[t] == pytest.approx(manual, abs=1e-15)

    def test_aggregate_empty_list_raises(self):
        with pytest.raises(ValueError):
            aggregate_reports([])

    def test_report_mapping_field_order(self, rng):
        lab = labels_from(random_blob_labels(rng, (6, 6, 6), 2))
        from nuclei3d import centroids_from_labels

        report = evaluate(lab, seg=lab, detections=centroids_from_labels(lab))
        mapping = report.to_mapping()
        assert list(mapping) == ["segmentation", "detection"]
        assert list(mapping["segmentation"]) == ["av_ap", "ap", "counts"]
        assert list(mapping["segmentation"]["ap"]) == [f"{t:.2f}" for t in IOU_THRESHOLDS]
