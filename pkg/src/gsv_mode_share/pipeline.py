"""
Pipeline stages for GSV Mode Share.

Every stage reads its inputs from the configuration, writes its artifacts
atomically below ``output_dir`` and removes whatever it wrote if it fails.
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import pandas as pd
from pydantic import BaseModel, Field

from gsv_mode_share import settings
from gsv_mode_share.betareg import (
    COVARIATES,
    DesignMatrix,
    FittedModel,
    build_design,
    compute_weights,
    fit,
    load_bundled_model,
    load_model,
    model_to_json,
    predict,
    raw_covariates,
    standard_errors,
)
from gsv_mode_share.config import PipelineConfig
from gsv_mode_share.dataset import (
    CityRecord,
    Role,
    attach_population,
    harmonize_survey_scope,
    load_boundary,
    load_city_table,
    load_population_grid,
)
from gsv_mode_share.detections import (
    CityCounts,
    VehicleClass,
    aggregate_city_counts,
    class_totals,
    compare_manual,
    comparison_frame,
    counts_frame,
    load_city_counts,
    load_detections,
    load_ground_truth,
    load_manifest,
    load_manual_counts,
    saturation_curve,
)
from gsv_mode_share.detmetrics import evaluate_detections
from gsv_mode_share.errors import ConfigError
from gsv_mode_share.evaluation import (
    EvalReport,
    corr_matrix,
    describe_variables,
    loocv,
    residual_report,
    scatter_points,
    summarize_predictions,
)
from gsv_mode_share.reporting import ArtifactLog, render_scatter_svg
from gsv_mode_share.sampler import (
    FixtureMetadataClient,
    ImageMetadata,
    ImageRequest,
    MetadataClient,
    SamplePoint,
    StreetViewMetadataClient,
    filter_by_availability,
    load_road_network,
    metadata_frame,
    plan_frame,
    plan_requests,
    points_frame,
    sample_points,
    summarize_capture_years,
)

logger = logging.getLogger(__name__)

STAGES = ("sample", "aggregate", "eval-detections", "fit", "loocv", "predict", "report")

SATURATION_CLASSES = (VehicleClass.PEDAL, VehicleClass.MOTOR)

T = TypeVar("T")
R = TypeVar("R")


class StageResult(BaseModel):
    """What a stage produced: its artifacts and a few headline numbers."""

    stage: str
    artifacts: List[Path] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)


class PipelineRunner:
    """Runs pipeline stages against one validated configuration."""

    def __init__(self, config: PipelineConfig) -> None:
        """Initialize the runner.

        Args:
            config: Validated pipeline configuration
        """
        self.config = config
        self.out = config.output_dir
        self.artifacts = ArtifactLog()
        self._stages: Dict[str, Callable[[], Dict[str, Any]]] = {
            "sample": self.sample,
            "aggregate": self.aggregate,
            "eval-detections": self.eval_detections,
            "fit": self.fit,
            "loocv": self.loocv,
            "predict": self.predict,
            "report": self.report,
        }

    def run(self, stage: str) -> StageResult:
        """Run one stage.

        Raises:
            ConfigError: If the stage is unknown or its inputs are not configured
        """
        if stage not in self._stages:
            raise ConfigError([f"stage: unknown stage '{stage}' (expected one of {', '.join(STAGES)})"])
        self.artifacts = ArtifactLog()
        logger.info("Running stage %s", stage)
        try:
            summary = self._stages[stage]()
        except BaseException:
            self.artifacts.remove_all()
            raise
        return StageResult(stage=stage, artifacts=list(self.artifacts.written), summary=summary)

    # helpers

    def _require(self, name: str) -> Path:
        path = getattr(self.config.paths, name)
        if path is None:
            raise ConfigError([f"paths.{name}: required by this stage"])
        return path

    def _map(self, func: Callable[[T], R], items: Sequence[T]) -> List[R]:
        """Apply ``func`` over a worker pool; results keep the input order."""
        with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
            return list(pool.map(func, items))

    @staticmethod
    def _city_files(directory: Path, suffix: str) -> Dict[str, Path]:
        return {path.name[: -len(suffix)]: path for path in sorted(directory.glob(f"*{suffix}"))}

    @property
    def _mode(self) -> str:
        return self.config.model.mode.value

    def _read_json(self, path: Path, produced_by: str) -> Dict[str, Any]:
        if not path.exists():
            raise ConfigError([f"{path}: not found; run '{produced_by}' first"])
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)

    # sample

    def _metadata_client(self) -> Optional[MetadataClient]:
        if self.config.paths.metadata_fixture is not None:
            return FixtureMetadataClient.from_csv(self.config.paths.metadata_fixture)
        if self.config.sampling.live_metadata:
            if not settings.SV_API_KEY:
                raise ConfigError(["SV_API_KEY: required when sampling.live_metadata is true"])
            return StreetViewMetadataClient(settings.SV_API_KEY)
        return None

    def _sample_city(
        self, city_id: str, path: Path, client: Optional[MetadataClient]
    ) -> Tuple[str, List[SamplePoint], List[ImageRequest], Optional[List[ImageMetadata]]]:
        sampling = self.config.sampling
        network = load_road_network(path)
        points = sample_points(network, sampling.spacing_m, sampling.max_points, sampling.seed)
        metadata = None
        if client is not None:
            points, metadata = filter_by_availability(points, client)
        logger.info("%s: %d points over %.1f km of road", city_id, len(points), network.length_m / 1000.0)
        return city_id, points, plan_requests(points), metadata

    def sample(self) -> Dict[str, Any]:
        networks_dir = self._require("road_networks")
        networks = self._city_files(networks_dir, ".geojson")
        if not networks:
            raise ConfigError([f"paths.road_networks: no <city_id>.geojson files in {networks_dir}"])
        client = self._metadata_client()
        results = self._map(lambda item: self._sample_city(item[0], item[1], client), list(networks.items()))

        sample_dir = self.out / "sample"
        rows, capture_years = [], {}
        for city_id, points, requests, metadata in results:
            self.artifacts.frame(sample_dir / f"{city_id}_points.csv", points_frame(points))
            self.artifacts.frame(sample_dir / f"{city_id}_plan.csv", plan_frame(requests))
            if metadata is not None:
                self.artifacts.frame(sample_dir / f"{city_id}_metadata.csv", metadata_frame(metadata))
                summary = summarize_capture_years(metadata, self.config.evaluation.split_year)
                capture_years[city_id] = summary.model_dump(mode="json")
            rows.append({"city_id": city_id, "points": len(points), "requests": len(requests)})
        self.artifacts.frame(sample_dir / "summary.csv", pd.DataFrame(rows, columns=["city_id", "points", "requests"]))
        if capture_years:
            self.artifacts.json(sample_dir / "capture_years.json", capture_years)
        return {"cities": len(rows), "requests": sum(row["requests"] for row in rows)}

    # aggregate

    def _aggregate_city(self, item: Tuple[str, Path]) -> Tuple[CityCounts, List[Dict[str, Any]]]:
        city_id, manifest_path = item
        manifest = load_manifest(manifest_path)
        detections_path = self._require("detections") / f"{city_id}.csv"
        if detections_path.exists():
            dets = load_detections(detections_path)
        else:
            logger.warning("%s: no detection file, counting zero detections", city_id)
            dets = []
        conf = self.config.thresholds.confidence
        counts = aggregate_city_counts(dets, manifest, conf, city_id)
        saturation = [
            {"city_id": city_id, "class": cls.value, "n_images": n, "detections_per_image": ratio}
            for cls in SATURATION_CLASSES
            for n, ratio in saturation_curve(dets, manifest, cls, self.config.evaluation.saturation_step, conf)
        ]
        return counts, saturation

    def aggregate(self) -> Dict[str, Any]:
        self._require("detections")
        manifests_dir = self._require("manifests")
        manifests = self._city_files(manifests_dir, ".txt")
        if not manifests:
            raise ConfigError([f"paths.manifests: no <city_id>.txt files in {manifests_dir}"])
        results = self._map(self._aggregate_city, list(manifests.items()))
        counts = [c for c, _ in results]
        self.artifacts.frame(self.out / "city_counts.csv", counts_frame(counts))
        saturation = [row for _, rows in results for row in rows]
        self.artifacts.frame(
            self.out / "saturation.csv",
            pd.DataFrame(saturation, columns=["city_id", "class", "n_images", "detections_per_image"]),
        )
        if self.config.paths.manual_counts is not None:
            manual = load_manual_counts(self.config.paths.manual_counts)
            reports = [compare_manual(c, manual[c.city_id]) for c in counts if c.city_id in manual]
            self.artifacts.frame(self.out / "manual_comparison.csv", comparison_frame(reports))
        return {"cities": len(counts), "images": sum(c.n_images for c in counts)}

    # eval-detections

    def eval_detections(self) -> Dict[str, Any]:
        dets = load_detections(self._require("eval_detections"))
        gts = load_ground_truth(self._require("ground_truth"))
        report = evaluate_detections(
            dets, gts, iou_thr=self.config.thresholds.iou, conf_thr=self.config.thresholds.confidence
        )
        self.artifacts.frame(self.out / "detection_metrics.csv", report.frame())
        instances = pd.DataFrame(
            [{"class": cls.value, "instances": n} for cls, n in class_totals(gts).items()], columns=["class", "instances"]
        )
        self.artifacts.frame(self.out / "ground_truth_instances.csv", instances)
        self.artifacts.json(self.out / "detection_metrics.json", report.model_dump(mode="json"))
        return {"map50": report.map50, "precision": report.precision, "recall": report.recall, "f1": report.f1}

    # regression inputs

    def _load_records(self) -> List[CityRecord]:
        path = self._require("city_table")
        records = load_city_table(path, strict=self.config.dataset.strict)
        if not records:
            raise ConfigError([f"paths.city_table: {path} contains no cities"])
        dataset = self.config.dataset
        records = harmonize_survey_scope(records, dataset.commute_factor, dataset.country_commute_factors)
        boundaries, population = self.config.paths.boundaries, self.config.paths.population
        if boundaries is None or population is None:
            return records
        attached = []
        for record in records:
            boundary_path = boundaries / f"{record.city_id}.geojson"
            grid_path = population / f"{record.city_id}.csv"
            if boundary_path.exists() and grid_path.exists():
                record = attach_population(record, load_population_grid(grid_path), load_boundary(boundary_path))
            attached.append(record)
        return attached

    def _load_counts(self) -> Dict[str, CityCounts]:
        path = self.config.city_counts_path()
        if not path.exists():
            raise ConfigError([f"paths.city_counts: {path} not found; run 'aggregate' first"])
        return load_city_counts(path)

    def _weights(self, records: Sequence[CityRecord]) -> Dict[str, float]:
        """Temporal weights from the capture years of each city's sampled images."""
        metadata_dir = self.config.metadata_dir()
        weights = {}
        for record in records:
            path = metadata_dir / f"{record.city_id}_metadata.csv"
            if not path.exists():
                continue
            years = [
                meta.capture_year
                for meta in FixtureMetadataClient.from_csv(path).answers.values()
                if meta.available and meta.capture_year is not None
            ]
            if years:
                weights[record.city_id] = compute_weights(record.survey_year, years)
        logger.info("Capture-year weights for %d of %d cities", len(weights), len(records))
        if not weights:
            raise ValueError(f"weighted fit needs capture-year metadata; none found in {metadata_dir}")
        return weights

    def _design(self, records: Sequence[CityRecord], counts: Dict[str, CityCounts]) -> DesignMatrix:
        model = self.config.model
        weights = self._weights(records) if model.weighted else None
        design = build_design(records, counts, model.mode, intercept=model.intercept, weights=weights)
        logger.info("%s", design)
        return design

    def _variables_frame(self, records: Sequence[CityRecord], counts: Dict[str, CityCounts], design: DesignMatrix) -> pd.DataFrame:
        by_id = {record.city_id: record for record in records}
        rows = []
        for city_id, y in zip(design.row_ids, design.y):
            row = {f"{self._mode}_share_pct": float(y) * 100.0}
            row.update(raw_covariates(by_id[city_id], counts[city_id]))
            rows.append(row)
        return pd.DataFrame(rows, columns=[f"{self._mode}_share_pct", *COVARIATES])

    # fit

    def fit(self) -> Dict[str, Any]:
        records, counts = self._load_records(), self._load_counts()
        design = self._design(records, counts)
        model, fit_diagnostics = fit(design)
        model = model.model_copy(update={"mode": self._mode})
        se = standard_errors(model, design)
        self.artifacts.text(self.out / f"model_{self._mode}.json", model_to_json(model))
        self.artifacts.json(
            self.out / f"fit_{self._mode}.json",
            {
                "mode": self._mode,
                "n": design.n_rows,
                "cities": design.row_ids,
                "weighted": design.weighted,
                "coefficients": dict(zip(model.columns, model.beta)),
                "phi": model.phi,
                "standard_errors": dict(zip([*model.columns, "phi"], (float(s) for s in se))),
                "converged": model.converged,
                "n_iter": model.n_iter,
                "diagnostics": fit_diagnostics.model_dump(),
            },
        )

        variables = self._variables_frame(records, counts, design)
        self.artifacts.frame(self.out / f"variables_{self._mode}.csv", describe_variables(variables))
        try:
            matrix = corr_matrix(
                {name: variables[name].tolist() for name in variables.columns},
                {name: name in COVARIATES for name in variables.columns},
            )
        except ValueError as exc:
            logger.warning("Correlation matrix skipped: %s", exc)
        else:
            self.artifacts.frame(self.out / f"correlation_{self._mode}.csv", matrix.rename_axis("variable").reset_index())
        return {
            "n": design.n_rows,
            "log_lik": fit_diagnostics.log_lik,
            "aic": fit_diagnostics.aic,
            "bic": fit_diagnostics.bic,
            "pseudo_r2": fit_diagnostics.pseudo_r2,
        }

    # loocv

    def loocv(self) -> Dict[str, Any]:
        records, counts = self._load_records(), self._load_counts()
        design = self._design(records, counts)
        threshold = self.config.evaluation.threshold_pp
        report = loocv(design, workers=self.config.workers, threshold_pp=threshold)
        self.artifacts.frame(self.out / f"loocv_{self._mode}.csv", report.frame())
        self.artifacts.frame(self.out / f"residuals_{self._mode}.csv", residual_report(report, threshold))
        self.artifacts.json(
            self.out / f"loocv_{self._mode}.json",
            {"mode": self._mode, "summary": report.summary(), "report": report.model_dump(mode="json")},
        )
        return report.summary()

    # predict

    def _model(self) -> FittedModel:
        if self.config.model.source == "bundled":
            return load_bundled_model(self.config.model.mode)
        path = self.config.model_path()
        if not path.exists():
            raise ConfigError([f"model.source: {path} not found; run 'fit' first or set model.source = \"bundled\""])
        return load_model(path)

    def _centroid(self, city_id: str) -> Tuple[Optional[float], Optional[float]]:
        boundaries = self.config.paths.boundaries
        if boundaries is None or not (boundaries / f"{city_id}.geojson").exists():
            return None, None
        return load_boundary(boundaries / f"{city_id}.geojson").centroid()

    def predict(self) -> Dict[str, Any]:
        model = self._model()
        records, counts = self._load_records(), self._load_counts()
        rows = []
        for record in records:
            if record.role is not Role.DEMO:
                continue
            if record.city_id not in counts:
                logger.warning("%s: no detection counts, skipped", record.city_id)
                continue
            try:
                share = predict(model, raw_covariates(record, counts[record.city_id]))
            except ValueError as exc:
                logger.warning("%s: %s, skipped", record.city_id, exc)
                continue
            lat, lon = self._centroid(record.city_id)
            rows.append(
                {
                    "city_id": record.city_id,
                    "name": record.name,
                    "country": record.country,
                    "lat": lat,
                    "lon": lon,
                    "predicted_share": share,
                    "predicted_pct": share * 100.0,
                }
            )
        if not rows:
            raise ValueError("no demo city has detection counts to predict from")

        frame = pd.DataFrame(rows)
        self.artifacts.frame(
            self.out / f"predictions_{self._mode}.csv",
            frame[["city_id", "name", "country", "predicted_share", "predicted_pct"]],
        )
        self.artifacts.frame(self.out / f"map_{self._mode}.csv", frame[["city_id", "lat", "lon", "predicted_pct"]])
        summary = summarize_predictions(frame["predicted_pct"].tolist())
        self.artifacts.json(
            self.out / f"predictions_{self._mode}.json",
            {"mode": self._mode, "model_source": model.source, "n": len(rows), "predicted_pct": summary},
        )
        return {"n": len(rows), **summary}

    # report

    def report(self) -> Dict[str, Any]:
        loocv_doc = self._read_json(self.out / f"loocv_{self._mode}.json", "loocv")
        report = EvalReport.model_validate(loocv_doc["report"])
        fit_path = self.out / f"fit_{self._mode}.json"
        predictions_path = self.out / f"predictions_{self._mode}.json"
        threshold = self.config.evaluation.threshold_pp

        combined = {
            "mode": self._mode,
            "loocv": report.summary(),
            "error_distribution_pp": summarize_predictions([row.abs_error_pp for row in report.rows]),
            "residuals": residual_report(report, threshold).to_dict(orient="records"),
            "fit": self._read_json(fit_path, "fit") if fit_path.exists() else None,
            "predictions": self._read_json(predictions_path, "predict") if predictions_path.exists() else None,
        }
        self.artifacts.json(self.out / f"report_{self._mode}.json", combined)

        points = scatter_points(report, hide_small=self.config.evaluation.hide_small)
        self.artifacts.frame(self.out / f"scatter_{self._mode}.csv", points)
        svg = render_scatter_svg(
            list(zip(points["observed_pct"], points["predicted_pct"])),
            title=f"Observed vs predicted {self._mode} mode share",
        )
        self.artifacts.text(self.out / f"scatter_{self._mode}.svg", svg)
        return report.summary()
