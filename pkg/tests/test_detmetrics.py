"""
Tests for IoU, greedy matching, average precision and the detection report.
"""
import numpy as np
import pytest

from gsv_mode_share.detections import Detection, GroundTruthBox, VehicleClass
from gsv_mode_share.detmetrics import average_precision, evaluate_detections, f1, iou, match_detections, mean_ap
from gsv_mode_share.errors import UndefinedAPError

PEDAL, MOTOR = VehicleClass.PEDAL, VehicleClass.MOTOR


def det(image_id, cls, confidence, bbox):
    return Detection(image_id=image_id, vehicle_class=cls, confidence=confidence, bbox=bbox)


def gt(image_id, cls, bbox):
    return GroundTruthBox(image_id=image_id, vehicle_class=cls, bbox=bbox)


def random_box(rng, extent=100.0):
    x, y = rng.uniform(0.0, extent, 2)
    w, h = rng.uniform(2.0, 30.0, 2)
    return (float(x), float(y), float(x + w), float(y + h))


def random_scene(seed, n_images=25):
    """Ground truths with jittered copies and spurious boxes over a few images."""
    rng = np.random.default_rng(seed)
    gts, dets = [], []
    for index in range(n_images):
        image = f"img{index:02d}"
        for _ in range(int(rng.integers(0, 5))):
            cls = (PEDAL, MOTOR)[int(rng.integers(2))]
            box = random_box(rng)
            gts.append(gt(image, cls, box))
            for _ in range(int(rng.integers(0, 3))):
                jitter = rng.normal(0.0, 2.0, 4)
                x0, y0 = box[0] + jitter[0], box[1] + jitter[1]
                x1, y1 = max(box[2] + jitter[2], x0 + 1.0), max(box[3] + jitter[3], y0 + 1.0)
                dets.append(det(image, cls, float(rng.uniform()), (float(x0), float(y0), float(x1), float(y1))))
        for _ in range(int(rng.integers(0, 3))):
            dets.append(det(image, (PEDAL, MOTOR)[int(rng.integers(2))], float(rng.uniform()), random_box(rng)))
    return dets, gts


class TestIoU:
    def test_identical(self):
        assert iou((0, 0, 10, 10), (0, 0, 10, 10)) == 1.0

    def test_disjoint(self):
        assert iou((0, 0, 10, 10), (20, 20, 30, 30)) == 0.0

    def test_touching_edges(self):
        assert iou((0, 0, 10, 10), (10, 0, 20, 10)) == 0.0

    def test_half_overlap(self):
        # intersection 50, union 150
        assert iou((0, 0, 10, 10), (5, 0, 15, 10)) == pytest.approx(1 / 3)

    def test_contained(self):
        assert iou((0, 0, 10, 10), (0, 0, 5, 5)) == pytest.approx(0.25)

    def test_symmetric(self):
        a, b = (1.5, 2.0, 9.0, 7.5), (3.0, 1.0, 12.0, 6.0)
        assert iou(a, b) == iou(b, a)

    def test_translation_invariant(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            a, b = random_box(rng), random_box(rng)
            dx, dy = rng.uniform(-500.0, 500.0, 2)
            shifted_a = (a[0] + dx, a[1] + dy, a[2] + dx, a[3] + dy)
            shifted_b = (b[0] + dx, b[1] + dy, b[2] + dx, b[3] + dy)
            assert iou(shifted_a, shifted_b) == pytest.approx(iou(a, b), abs=1e-9)


class TestMatching:
    def test_three_detection_ap(self):
        gts = [gt("img", PEDAL, (0, 0, 10, 10)), gt("img", PEDAL, (20, 20, 30, 30))]
        dets = [
            det("img", PEDAL, 0.9, (0, 0, 10, 10)),
            det("img", PEDAL, 0.8, (50, 50, 60, 60)),
            det("img", PEDAL, 0.7, (20, 20, 30, 30)),
        ]
        match = match_detections(dets, gts)
        assert [hit for _, hit in match.flags[PEDAL]] == [True, False, True]
        # 0.5 recall at precision 1, then 0.5 more at precision 2/3
        assert average_precision(match, PEDAL) == pytest.approx(0.5 + 0.5 * 2 / 3, abs=1e-9)
        assert average_precision(match, PEDAL) == pytest.approx(0.8333, abs=1e-4)

    def test_duplicate_detection_is_false_positive(self):
        gts = [gt("img", MOTOR, (0, 0, 10, 10))]
        dets = [det("img", MOTOR, 0.9, (0, 0, 10, 10)), det("img", MOTOR, 0.8, (0, 0, 10, 9))]
        match = match_detections(dets, gts)
        assert (match.tp(MOTOR), match.fp(MOTOR), match.fn(MOTOR)) == (1, 1, 0)

    def test_class_and_image_must_agree(self):
        gts = [gt("a", MOTOR, (0, 0, 10, 10))]
        dets = [det("a", PEDAL, 0.9, (0, 0, 10, 10)), det("b", MOTOR, 0.9, (0, 0, 10, 10))]
        match = match_detections(dets, gts)
        assert match.tp(MOTOR) == 0
        assert match.fn(MOTOR) == 1
        assert match.fp(PEDAL) == 1

    def test_iou_threshold_is_inclusive(self):
        gts = [gt("a", PEDAL, (0, 0, 10, 10))]
        dets = [det("a", PEDAL, 0.9, (0, 0, 10, 5))]
        assert match_detections(dets, gts, iou_thr=0.5).tp(PEDAL) == 1
        assert match_detections(dets, gts, iou_thr=0.51).tp(PEDAL) == 0

    def test_low_confidence_detections_are_ignored(self):
        gts = [gt("a", PEDAL, (0, 0, 10, 10))]
        dets = [det("a", PEDAL, 0.2, (0, 0, 10, 10))]
        match = match_detections(dets, gts, conf_thr=0.25)
        assert match.flags[PEDAL] == []
        assert match.fn(PEDAL) == 1

    def test_best_iou_wins(self):
        gts = [gt("a", PEDAL, (0, 0, 10, 10)), gt("a", PEDAL, (2, 0, 12, 10))]
        dets = [det("a", PEDAL, 0.9, (2, 0, 12, 10)), det("a", PEDAL, 0.8, (0, 0, 10, 10))]
        match = match_detections(dets, gts)
        assert match.tp(PEDAL) == 2


    @pytest.mark.parametrize("seed", range(10))
    def test_counting_identities(self, seed):
        dets, gts = random_scene(seed)
        match = match_detections(dets, gts, conf_thr=0.25)
        for cls in VehicleClass:
            n_gt = sum(1 for box in gts if box.vehicle_class is cls)
            n_det = sum(1 for d in dets if d.vehicle_class is cls and d.confidence >= 0.25)
            assert match.tp(cls) + match.fn(cls) == n_gt
            assert match.tp(cls) + match.fp(cls) == n_det

    @pytest.mark.parametrize("seed", range(10))
    def test_raising_iou_threshold_never_adds_true_positives(self, seed):
        dets, gts = random_scene(seed)
        previous = None
        for threshold in np.linspace(0.05, 0.95, 19):
            match = match_detections(dets, gts, iou_thr=float(threshold), conf_thr=0.0)
            current = [match.tp(cls) for cls in VehicleClass]
            if previous is not None:
                assert all(now <= before for now, before in zip(current, previous))
            previous = current


class TestAveragePrecision:
    def test_perfect(self):
        gts = [gt("a", PEDAL, (0, 0, 10, 10)), gt("b", PEDAL, (0, 0, 10, 10))]
        dets = [det("a", PEDAL, 0.9, (0, 0, 10, 10)), det("b", PEDAL, 0.8, (0, 0, 10, 10))]
        assert average_precision(match_detections(dets, gts), PEDAL) == 1.0

    def test_no_detections(self):
        match = match_detections([], [gt("a", PEDAL, (0, 0, 10, 10))])
        assert average_precision(match, PEDAL) == 0.0

    def test_no_ground_truth(self):
        match = match_detections([det("a", PEDAL, 0.9, (0, 0, 10, 10))], [])
        with pytest.raises(UndefinedAPError):
            average_precision(match, PEDAL)

    def test_invariant_to_confidence_rescaling(self):
        gts = [gt("a", PEDAL, (0, 0, 10, 10)), gt("b", PEDAL, (0, 0, 10, 10)), gt("c", PEDAL, (0, 0, 10, 10))]
        boxes = [("a", 0.9, (0, 0, 10, 10)), ("x", 0.7, (0, 0, 10, 10)), ("b", 0.6, (0, 0, 10, 10)),
                 ("c", 0.3, (40, 40, 50, 50)), ("c", 0.2, (0, 0, 10, 10))]
        original = [det(i, PEDAL, c, b) for i, c, b in boxes]
        rescaled = [det(i, PEDAL, c / 2, b) for i, c, b in boxes]
        ap = average_precision(match_detections(original, gts, conf_thr=0.0), PEDAL)
        assert average_precision(match_detections(rescaled, gts, conf_thr=0.0), PEDAL) == pytest.approx(ap)


class TestSummaries:
    def test_f1(self):
        assert f1(0.87, 0.78) == pytest.approx(2 * 0.87 * 0.78 / (0.87 + 0.78))
        assert f1(0.87, 0.78) == pytest.approx(0.8225, abs=1e-4)

    def test_f1_zero(self):
        assert f1(0.0, 0.0) == 0.0

    def test_mean_ap(self):
        assert mean_ap([0.87, 0.91, 0.83, 0.93]) == pytest.approx(0.885)

    def test_mean_ap_empty(self):
        with pytest.raises(ValueError):
            mean_ap([])

    def test_report(self):
        gts = [gt("a", PEDAL, (0, 0, 10, 10)), gt("a", MOTOR, (20, 20, 30, 30)), gt("b", MOTOR, (0, 0, 10, 10))]
        dets = [
            det("a", PEDAL, 0.9, (0, 0, 10, 10)),
            det("a", MOTOR, 0.8, (20, 20, 30, 30)),
            det("b", MOTOR, 0.7, (50, 50, 60, 60)),
        ]
        report = evaluate_detections(dets, gts)
        assert (report.total_tp, report.total_fp, report.total_fn) == (2, 1, 1)
        assert report.precision == pytest.approx(2 / 3)
        assert report.recall == pytest.approx(2 / 3)
        assert report.tp_over_detections == report.precision
        assert report.tp_over_ground_truth == report.recall
        assert report.classes[PEDAL].average_precision == 1.0
        assert report.classes[VehicleClass.CARGO].average_precision is None
        assert report.map50 == pytest.approx((1.0 + 0.5) / 2)
        frame = report.frame()
        assert list(frame["class"])[-1] == "total"

    def test_engineered_totals(self):
        # 330 of 380 labelled vehicles found and 91 spurious boxes
        gts, dets = [], []
        for index in range(380):
            cls = PEDAL if index < 200 else MOTOR
            gts.append(gt(f"g{index:03d}", cls, (0, 0, 10, 10)))
            if index < 175 or index >= 225:
                dets.append(det(f"g{index:03d}", cls, 0.9, (0, 0, 10, 10)))
        for index in range(91):
            dets.append(det(f"s{index:03d}", (PEDAL, MOTOR)[index % 2], 0.6, (0, 0, 10, 10)))
        report = evaluate_detections(dets, gts)
        assert (report.total_tp, report.total_fp, report.total_fn) == (330, 91, 50)
        assert report.precision == pytest.approx(330 / 421, abs=1e-12)
        assert report.recall == pytest.approx(330 / 380, abs=1e-12)
        assert report.precision == pytest.approx(0.784, abs=5e-4)
        assert report.recall == pytest.approx(0.868, abs=5e-4)
        assert report.tp_over_detections == pytest.approx(330 / 421, abs=1e-12)
        assert report.tp_over_ground_truth == pytest.approx(330 / 380, abs=1e-12)
        assert report.f1 == pytest.approx(2 * 330 / (2 * 330 + 91 + 50), abs=1e-12)
