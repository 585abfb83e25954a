"""
End-to-end tests of the pipeline stages through the command-line entry point.
"""
import json
from pathlib import Path
from typing import Dict, List

import numpy as np
import pytest
from scipy.special import expit

from gsv_mode_share import EXIT_CONFIG_ERROR, EXIT_OK, EXIT_STAGE_FAILED, main

CYCLE_BETA = np.array([1.138, -0.39, -0.863])

HEADER = "city_id,name,country,role,cycle_share_pct,motorcycle_share_pct,survey_year,survey_scope,population,area_km2\n"
N_TRAINING = 20
N_DEMO = 2


def _detection_rows(cycle: int, motor: int) -> List[str]:
    rows = [f"img{k:04d},pedal,0.9,10,10,60,90" for k in range(cycle)]
    rows += [f"img{cycle + k:04d},motor,0.8,5,5,80,70" for k in range(motor)]
    # below the default confidence threshold
    rows.append(f"img{cycle + motor:04d},pedal,0.1,1,1,20,20")
    return rows


@pytest.fixture
def workspace(tmp_path: Path) -> Dict[str, Path]:
    """Synthetic city table, manifests and detections for training and demo cities."""
    rng = np.random.default_rng(42)
    manifests, detections = tmp_path / "manifests", tmp_path / "detections"
    manifests.mkdir()
    detections.mkdir()
    lines = [HEADER]
    for i in range(N_TRAINING + N_DEMO):
        city_id = f"c{i:02d}"
        cycle, motor = int(rng.integers(60, 400)), int(rng.integers(60, 450))
        area = 100.0
        population = float(rng.uniform(2466.0, 4780.0)) * area
        eta = CYCLE_BETA @ np.log([cycle, motor, population / area])
        mu = expit(eta)
        cycle_pct = float(np.clip(rng.beta(mu * 40.0, (1.0 - mu) * 40.0) * 100.0, 0.2, 90.0))
        motor_pct = float(rng.uniform(1.0, 30.0))
        if i < N_TRAINING:
            lines.append(f"{city_id},City {i},NL,training,{cycle_pct:.6f},{motor_pct:.6f},2019,all_trips,{population:.1f},{area}\n")
        else:
            lines.append(f"{city_id},Demo {i},ID,demo,,{motor_pct:.6f},2018,all_trips,{population:.1f},{area}\n")

        n_images = cycle + motor + 50
        (manifests / f"{city_id}.txt").write_text("\n".join(f"img{k:04d}" for k in range(n_images)) + "\n")
        rows = _detection_rows(cycle, motor)
        (detections / f"{city_id}.csv").write_text(
            "image_id,class,confidence,x_min,y_min,x_max,y_max\n" + "\n".join(rows) + "\n"
        )
    cities = tmp_path / "cities.csv"
    cities.write_text("".join(lines), encoding="utf-8")
    return {"root": tmp_path, "cities": cities, "manifests": manifests, "detections": detections}


def input_args(workspace: Dict[str, Path], out: Path) -> List[str]:
    return [
        "--out", str(out),
        "--paths.city_table", str(workspace["cities"]),
        "--paths.manifests", str(workspace["manifests"]),
        "--paths.detections", str(workspace["detections"]),
        "--workers", "2",
    ]


def run_all(workspace: Dict[str, Path], out: Path) -> None:
    for stage in ("aggregate", "fit", "loocv", "predict", "report"):
        assert main([stage, *input_args(workspace, out)]) == EXIT_OK, stage


def read_json(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


class TestStages:
    def test_full_run(self, workspace):
        out = workspace["root"] / "out"
        run_all(workspace, out)

        counts = (out / "city_counts.csv").read_text().splitlines()
        assert counts[0] == "city_id,gsv_cycle,gsv_motorcycle,gsv_cargo,gsv_rickshaw,n_images"
        assert len(counts) == N_TRAINING + N_DEMO + 1

        fit_doc = read_json(out / "fit_cycle.json")
        assert fit_doc["n"] == N_TRAINING
        assert fit_doc["converged"]
        assert set(fit_doc["coefficients"]) == {"gsv_cycle", "gsv_motorcycle", "pop_density"}
        assert fit_doc["diagnostics"]["k"] == 4

        loocv_doc = read_json(out / "loocv_cycle.json")
        report_doc = read_json(out / "report_cycle.json")
        assert loocv_doc["summary"]["n"] == N_TRAINING
        assert report_doc["loocv"]["mdae_pp"] == loocv_doc["summary"]["mdae_pp"]
        assert report_doc["loocv"]["rmse_pp"] >= report_doc["loocv"]["mae_pp"]
        assert report_doc["fit"] == fit_doc

        predictions = (out / "predictions_cycle.csv").read_text().splitlines()
        assert predictions[0] == "city_id,name,country,predicted_share,predicted_pct"
        assert [line.split(",")[0] for line in predictions[1:]] == ["c20", "c21"]
        assert read_json(out / "predictions_cycle.json")["model_source"] == "fitted"

        svg = (out / "scatter_cycle.svg").read_text()
        assert svg.startswith("<?xml")
        assert 'id="points"' in svg
        scatter = (out / "scatter_cycle.csv").read_text().splitlines()
        assert len(scatter) == N_TRAINING + 1
        assert 'id="identity"' in svg

    def test_rerun_is_byte_identical(self, workspace):
        first, second = workspace["root"] / "first", workspace["root"] / "second"
        run_all(workspace, first)
        run_all(workspace, second)
        names = sorted(path.name for path in first.iterdir())
        assert names == sorted(path.name for path in second.iterdir())
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name

    def test_confidence_threshold_applies(self, workspace):
        out = workspace["root"] / "out"
        assert main(["aggregate", *input_args(workspace, out), "--thresholds.confidence", "0.05"]) == EXIT_OK
        low = (out / "city_counts.csv").read_text().splitlines()[1].split(",")
        assert main(["aggregate", *input_args(workspace, out)]) == EXIT_OK
        default = (out / "city_counts.csv").read_text().splitlines()[1].split(",")
        assert int(low[1]) == int(default[1]) + 1

    def test_bundled_model_predictions(self, workspace):
        out = workspace["root"] / "out"
        args = input_args(workspace, out)
        assert main(["aggregate", *args]) == EXIT_OK
        assert main(["predict", *args, "--model.source", "bundled"]) == EXIT_OK
        summary = read_json(out / "predictions_cycle.json")
        assert summary["model_source"] == "published"
        assert summary["n"] == N_DEMO

    def test_motorcycle_mode(self, workspace):
        out = workspace["root"] / "out"
        args = input_args(workspace, out)
        assert main(["aggregate", *args]) == EXIT_OK
        assert main(["fit", *args, "--model.mode", "motorcycle"]) == EXIT_OK
        assert read_json(out / "fit_motorcycle.json")["mode"] == "motorcycle"
        assert not (out / "fit_cycle.json").exists()

    def test_weighted_fit_uses_cities_with_metadata(self, workspace):
        out = workspace["root"] / "out"
        metadata = workspace["root"] / "metadata"
        metadata.mkdir()
        for i in range(15):
            (metadata / f"c{i:02d}_metadata.csv").write_text(
                "point_id,available,capture_year,capture_month\np0,true,2017,5\np1,true,2019,\np2,false,,\n"
            )
        args = input_args(workspace, out)
        assert main(["aggregate", *args]) == EXIT_OK
        assert main(["fit", *args, "--model.weighted", "true", "--paths.metadata", str(metadata)]) == EXIT_OK
        fit_doc = read_json(out / "fit_cycle.json")
        assert fit_doc["weighted"] is True
        assert fit_doc["n"] == 15

    def test_eval_detections(self, write_text, tmp_path):
        dets = write_text(
            "eval/dets.csv",
            "image_id,class,confidence,x_min,y_min,x_max,y_max\n"
            "a,pedal,0.9,0,0,10,10\n"
            "a,motor,0.8,20,20,40,40\n"
            "b,pedal,0.7,50,50,60,60\n",
        )
        gts = write_text(
            "eval/gt.csv",
            "image_id,class,x_min,y_min,x_max,y_max\na,pedal,0,0,10,10\na,motor,20,20,40,40\n",
        )
        out = tmp_path / "out"
        code = main(
            ["eval-detections", "--out", str(out), "--paths.eval_detections", str(dets), "--paths.ground_truth", str(gts)]
        )
        assert code == EXIT_OK
        report = read_json(out / "detection_metrics.json")
        assert (report["total_tp"], report["total_fp"], report["total_fn"]) == (2, 1, 0)
        assert report["precision"] == pytest.approx(2 / 3)
        assert report["map50"] == pytest.approx(1.0)
        instances = (out / "ground_truth_instances.csv").read_text().splitlines()
        assert "pedal,1" in instances and "motor,1" in instances

    def test_sample_with_metadata_fixture(self, grid_network, write_geojson, write_text, tmp_path):
        write_geojson("networks/town.geojson", grid_network(n_edges=2, edge_length_m=200.0))
        fixture_rows = [
            f"e{edge:03d}-{k},{'false' if k == 1 else 'true'},{2016 + k % 4},6"
            for edge in range(2)
            for k in range(10)
        ]
        fixture = write_text(
            "fixture.csv", "point_id,available,capture_year,capture_month\n" + "\n".join(fixture_rows) + "\n"
        )
        out = tmp_path / "out"
        code = main(
            [
                "sample",
                "--out", str(out),
                "--paths.road_networks", str(tmp_path / "networks"),
                "--paths.metadata_fixture", str(fixture),
                "--seed", "3",
            ]
        )
        assert code == EXIT_OK
        sample = out / "sample"
        points = (sample / "town_points.csv").read_text().splitlines()
        plan = (sample / "town_plan.csv").read_text().splitlines()
        metadata = (sample / "town_metadata.csv").read_text().splitlines()
        assert len(points) > 1
        assert len(plan) - 1 == 4 * (len(points) - 1)
        assert len(metadata) >= len(points)
        assert not any(line.startswith("e000-1,") or line.startswith("e001-1,") for line in points[1:])
        assert "town" in read_json(sample / "capture_years.json")


class TestFailures:
    def test_invalid_spacing_is_a_config_error(self, workspace):
        out = workspace["root"] / "out"
        assert main(["aggregate", *input_args(workspace, out), "--sampling.spacing_m", "10"]) == EXIT_CONFIG_ERROR
        assert not out.exists()

    def test_empty_city_table(self, workspace):
        out = workspace["root"] / "out"
        args = input_args(workspace, out)
        assert main(["aggregate", *args]) == EXIT_OK
        workspace["cities"].write_text(HEADER, encoding="utf-8")
        assert main(["fit", *args]) == EXIT_CONFIG_ERROR

    def test_fit_before_aggregate(self, workspace):
        assert main(["fit", *input_args(workspace, workspace["root"] / "out")]) == EXIT_CONFIG_ERROR

    def test_missing_required_path(self, tmp_path):
        assert main(["eval-detections", "--out", str(tmp_path / "out")]) == EXIT_CONFIG_ERROR

    def test_override_without_value(self):
        assert main(["fit", "--sampling.seed"]) == EXIT_CONFIG_ERROR

    def test_failed_stage_removes_partial_outputs(self, workspace, write_text):
        manual = write_text("manual.csv", "city_id,tp_cycle\nc00,10\n")
        out = workspace["root"] / "out"
        code = main(["aggregate", *input_args(workspace, out), "--paths.manual_counts", str(manual)])
        assert code == EXIT_STAGE_FAILED
        assert not (out / "city_counts.csv").exists()
        assert not (out / "saturation.csv").exists()

    def test_inconsistent_detections_fail(self, workspace):
        with open(workspace["detections"] / "c00.csv", "a", encoding="utf-8") as handle:
            handle.write("unknown_image,pedal,0.9,1,1,5,5\n")
        out = workspace["root"] / "out"
        assert main(["aggregate", *input_args(workspace, out)]) == EXIT_STAGE_FAILED
        assert not (out / "city_counts.csv").exists()
