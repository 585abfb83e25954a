"""
Tests for detection loading, per-city aggregation, manual validation and saturation.
"""
import numpy as np
import pytest

from gsv_mode_share.detections import (
    CityCounts,
    Detection,
    GroundTruthBox,
    ManualCounts,
    VehicleClass,
    aggregate_city_counts,
    aggregate_partitioned,
    class_totals,
    compare_manual,
    comparison_frame,
    counts_frame,
    load_city_counts,
    load_detections,
    load_manifest,
    load_manual_counts,
    per_image_counts,
    saturation_from_counts,
)
from gsv_mode_share.errors import ConsistencyError, RowError
from gsv_mode_share.reporting import write_frame

BOX = (10.0, 10.0, 50.0, 50.0)


def det(image_id, cls, confidence=0.9, bbox=BOX):
    return Detection(image_id=image_id, vehicle_class=cls, confidence=confidence, bbox=bbox)


@pytest.fixture
def bogota():
    """Images of one city with 408 pedal and 857 motor detections above threshold."""
    manifest = [f"b{i:04d}_{h}" for i in range(2000) for h in (0, 90, 180, 270)]
    dets = [det(manifest[(7 * i) % len(manifest)], VehicleClass.PEDAL) for i in range(408)]
    dets += [det(manifest[(13 * i + 1) % len(manifest)], VehicleClass.MOTOR) for i in range(857)]
    # below the confidence threshold
    dets += [det(manifest[i], VehicleClass.PEDAL, confidence=0.1) for i in range(40)]
    dets += [det(manifest[i], VehicleClass.CARGO, confidence=0.6) for i in range(5)]
    return dets, manifest


class TestModels:
    def test_invalid_box(self):
        with pytest.raises(ValueError):
            det("a", VehicleClass.PEDAL, bbox=(5.0, 5.0, 5.0, 10.0))

    def test_confidence_range(self):
        with pytest.raises(ValueError):
            det("a", VehicleClass.PEDAL, confidence=1.2)

    def test_merge(self):
        a = CityCounts(city_id="x", gsv_cycle=1, gsv_motorcycle=2, n_images=4)
        b = CityCounts(city_id="x", gsv_cycle=3, gsv_rickshaw=1, n_images=4)
        merged = a.merge(b)
        assert (merged.gsv_cycle, merged.gsv_motorcycle, merged.gsv_rickshaw, merged.n_images) == (4, 2, 1, 8)


class TestAggregation:
    def test_bogota_counts(self, bogota):
        dets, manifest = bogota
        counts = aggregate_city_counts(dets, manifest, city_id="bogota")
        assert counts.gsv_cycle == 408
        assert counts.gsv_motorcycle == 857
        assert counts.gsv_cargo == 5
        assert counts.gsv_rickshaw == 0
        assert counts.n_images == 8000

    def test_threshold_is_inclusive(self):
        counts = aggregate_city_counts([det("a", VehicleClass.MOTOR, confidence=0.25)], ["a"])
        assert counts.gsv_motorcycle == 1

    def test_images_without_detections_count(self):
        counts = aggregate_city_counts([], ["a", "b", "c"])
        assert counts.n_images == 3
        assert counts.gsv_cycle == 0

    def test_unknown_image(self):
        with pytest.raises(ConsistencyError):
            aggregate_city_counts([det("zzz", VehicleClass.PEDAL)], ["a"])

    @pytest.mark.parametrize("partitions", [1, 3, 7])
    def test_partitioned_matches_sequential(self, bogota, partitions):
        dets, manifest = bogota
        expected = aggregate_city_counts(dets, manifest, city_id="bogota")
        assert aggregate_partitioned(dets, manifest, city_id="bogota", partitions=partitions, workers=3) == expected

    @pytest.mark.parametrize("seed", range(5))
    def test_detection_order_does_not_matter(self, bogota, seed):
        dets, manifest = bogota
        order = np.random.default_rng(seed).permutation(len(dets))
        shuffled = [dets[i] for i in order]
        assert aggregate_city_counts(shuffled, manifest[::-1], city_id="bogota") == aggregate_city_counts(
            dets, manifest, city_id="bogota"
        )

    def test_raising_threshold_never_adds_detections(self, bogota):
        dets, manifest = bogota
        rng = np.random.default_rng(11)
        dets = [d.model_copy(update={"confidence": float(rng.uniform())}) for d in dets]
        previous = None
        for threshold in np.linspace(0.0, 1.0, 21):
            counts = aggregate_city_counts(dets, manifest, conf_threshold=float(threshold))
            current = [counts.count(cls) for cls in VehicleClass]
            if previous is not None:
                assert all(now <= before for now, before in zip(current, previous))
            previous = current
        everything = aggregate_city_counts(dets, manifest, conf_threshold=0.0)
        assert sum(everything.count(cls) for cls in VehicleClass) == len(dets)

    @pytest.mark.parametrize("threshold", [0.0, 0.25, 0.5, 0.95])
    @pytest.mark.parametrize("vehicle_class", list(VehicleClass))
    def test_per_image_counts_sum_to_city_total(self, bogota, threshold, vehicle_class):
        dets, manifest = bogota
        counts = aggregate_city_counts(dets, manifest, conf_threshold=threshold)
        per_image = per_image_counts(dets, manifest, vehicle_class, conf_threshold=threshold)
        assert len(per_image) == len(manifest)
        assert sum(per_image) == counts.count(vehicle_class)

    def test_class_totals(self):
        boxes = [GroundTruthBox(image_id="a", vehicle_class=cls, bbox=BOX) for cls in (VehicleClass.PEDAL,) * 3]
        totals = class_totals(boxes)
        assert totals[VehicleClass.PEDAL] == 3
        assert totals[VehicleClass.MOTOR] == 0


class TestLoaders:
    def test_load_detections(self, write_text):
        path = write_text(
            "dets.csv",
            "image_id,class,confidence,x_min,y_min,x_max,y_max\n"
            "p1_0,pedal,0.91,1,2,30,40\n"
            "p1_90,Motor,0.40,5,5,25.5,60\n",
        )
        first, second = load_detections(path)
        assert first.vehicle_class is VehicleClass.PEDAL
        assert second.vehicle_class is VehicleClass.MOTOR
        assert second.bbox == (5.0, 5.0, 25.5, 60.0)

    def test_unknown_class_reports_line(self, write_text):
        path = write_text(
            "dets.csv",
            "image_id,class,confidence,x_min,y_min,x_max,y_max\np1_0,pedal,0.9,1,2,30,40\np1_0,tram,0.9,1,2,30,40\n",
        )
        with pytest.raises(RowError) as info:
            load_detections(path)
        assert info.value.line == 3

    def test_manifest_skips_blank_lines(self, write_text):
        assert load_manifest(write_text("m.txt", "a_0\n\nb_90\n")) == ["a_0", "b_90"]

    def test_counts_table_round_trip(self, tmp_path):
        counts = [CityCounts(city_id="007", gsv_cycle=5, gsv_motorcycle=9, n_images=8000)]
        path = write_frame(tmp_path / "counts.csv", counts_frame(counts))
        assert load_city_counts(path) == {"007": counts[0]}


class TestManualValidation:
    def test_ratios(self, bogota):
        dets, manifest = bogota
        auto = aggregate_city_counts(dets, manifest, city_id="bogota")
        report = compare_manual(auto, _manual("bogota", pedal=371, motor=802))
        assert report.ratio(VehicleClass.PEDAL) == pytest.approx(371 / 408, abs=1e-9)
        assert report.ratio(VehicleClass.MOTOR) == pytest.approx(802 / 857, abs=1e-9)
        assert report.yolo_sum == 408 + 857
        assert report.tp_sum == 371 + 802
        assert not report.sum_mismatch

    def test_san_francisco_row(self):
        auto = CityCounts(city_id="san_francisco", gsv_cycle=117, gsv_motorcycle=181)
        report = compare_manual(auto, _manual("san_francisco", pedal=86, motor=127))
        assert report.ratio(VehicleClass.PEDAL) == pytest.approx(86 / 117, abs=1e-9)
        assert report.ratio(VehicleClass.MOTOR) == pytest.approx(127 / 181, abs=1e-9)
        assert report.ratio(VehicleClass.PEDAL) == pytest.approx(0.735, abs=5e-4)
        assert report.ratio(VehicleClass.MOTOR) == pytest.approx(0.702, abs=5e-4)
        assert (report.yolo_sum, report.tp_sum) == (298, 213)

    def test_identical_counts_give_unit_ratios(self):
        auto = CityCounts(city_id="c", gsv_cycle=40, gsv_motorcycle=7)
        report = compare_manual(auto, _manual("c", pedal=40, motor=7))
        assert report.ratio(VehicleClass.PEDAL) == 1.0
        assert report.ratio(VehicleClass.MOTOR) == 1.0

    def test_hamburg_missing_motor_entry(self, write_text):
        path = write_text("manual.csv", "city_id,tp_cycle,tp_motorcycle,yolo_sum,tp_sum\nhamburg,323,Na,469,Na\n")
        auto = CityCounts(city_id="hamburg", gsv_cycle=359, gsv_motorcycle=110)
        report = compare_manual(auto, load_manual_counts(path)["hamburg"])
        assert report.skipped == [VehicleClass.MOTOR]
        assert report.ratio(VehicleClass.MOTOR) is None
        assert report.ratio(VehicleClass.PEDAL) == pytest.approx(323 / 359, abs=1e-9)
        assert report.yolo_sum == 469
        assert report.tp_sum is None
        assert not report.sum_mismatch

    def test_missing_entry_is_skipped_not_zero(self):
        auto = CityCounts(city_id="c", gsv_cycle=10, gsv_motorcycle=20)
        report = compare_manual(auto, _manual("c", pedal=None, motor=15))
        assert report.skipped == [VehicleClass.PEDAL]
        assert report.ratio(VehicleClass.PEDAL) is None
        assert report.tp_sum is None

    def test_printed_sum_mismatch_is_flagged(self):
        auto = CityCounts(city_id="c", gsv_cycle=10, gsv_motorcycle=20)
        report = compare_manual(auto, _manual("c", pedal=8, motor=15, printed_tp_sum=24))
        assert report.tp_sum == 23
        assert report.sum_mismatch

    def test_load_manual_counts(self, write_text):
        path = write_text("manual.csv", "city_id,tp_cycle,tp_motorcycle,yolo_sum,tp_sum\nbogota,371,Na,1265,\n")
        manual = load_manual_counts(path)["bogota"]
        assert manual.true_positives[VehicleClass.PEDAL] == 371
        assert manual.true_positives[VehicleClass.MOTOR] is None
        assert manual.printed_yolo_sum == 1265
        assert manual.printed_tp_sum is None

    def test_comparison_frame(self):
        auto = CityCounts(city_id="c", gsv_cycle=10, gsv_motorcycle=20)
        frame = comparison_frame([compare_manual(auto, _manual("c", pedal=5, motor=10))])
        assert frame.loc[0, "ratio_cycle"] == pytest.approx(0.5)
        assert frame.loc[0, "yolo_sum"] == 30


def _manual(city_id, pedal, motor, printed_yolo_sum=None, printed_tp_sum=None):
    return ManualCounts(
        city_id=city_id,
        true_positives={VehicleClass.PEDAL: pedal, VehicleClass.MOTOR: motor},
        printed_yolo_sum=printed_yolo_sum,
        printed_tp_sum=printed_tp_sum,
    )


class TestSaturation:
    def test_series(self):
        assert saturation_from_counts([1, 0, 2, 1, 0, 0], step=2) == [(2, 0.5), (4, 1.0), (6, 4 / 6)]

    def test_poisson_stream_plateaus(self):
        rate = 0.1
        counts = np.random.default_rng(2024).poisson(rate, size=8000)
        for n, ratio in saturation_from_counts(counts, step=1000):
            if n >= 4000:
                assert abs(ratio - rate) <= 3.0 * np.sqrt(rate / n)

    def test_step_must_be_positive(self):
        with pytest.raises(ValueError):
            saturation_from_counts([1, 2], step=0)
