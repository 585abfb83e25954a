"""
Declarative pipeline configuration for GSV Mode Share.

A run is described by one TOML file whose tables mirror the sections below.
Any value can be overridden from the command line with a flag of the same
dotted name, e.g. ``--sampling.spacing_m 40`` or ``--model.mode=motorcycle``.
"""
import tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from gsv_mode_share.dataset.records import COMMUTE_FACTOR, Mode
from gsv_mode_share.errors import ConfigError
from gsv_mode_share.settings import WORKERS


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PathsConfig(_Section):
    """Input locations. Directory inputs hold one file per city named by city id."""

    city_table: Optional[Path] = None
    boundaries: Optional[Path] = None  # <city_id>.geojson
    population: Optional[Path] = None  # <city_id>.csv
    road_networks: Optional[Path] = None  # <city_id>.geojson
    detections: Optional[Path] = None  # <city_id>.csv
    manifests: Optional[Path] = None  # <city_id>.txt
    manual_counts: Optional[Path] = None
    eval_detections: Optional[Path] = None
    ground_truth: Optional[Path] = None
    metadata_fixture: Optional[Path] = None
    metadata: Optional[Path] = None  # <city_id>_metadata.csv, defaults to <output_dir>/sample
    city_counts: Optional[Path] = None  # defaults to <output_dir>/city_counts.csv
    model: Optional[Path] = None  # defaults to <output_dir>/model_<mode>.json

    @model_validator(mode="after")
    def _paths_exist(self) -> "PathsConfig":
        missing = [
            f"{name} ({path})"
            for name, path in self
            if path is not None and name not in ("city_counts", "model", "metadata") and not path.exists()
        ]
        if missing:
            raise ValueError(f"referenced paths do not exist: {', '.join(missing)}")
        return self


class SamplingConfig(_Section):
    spacing_m: float = Field(default=50.0, ge=20.0, le=100.0)
    max_points: int = Field(default=2000, gt=0)
    seed: int = 0
    live_metadata: bool = False


class ThresholdsConfig(_Section):
    confidence: float = Field(default=0.25, ge=0.0, le=1.0)
    iou: float = Field(default=0.5, ge=0.0, le=1.0)


class ModelConfig(_Section):
    mode: Mode = Mode.CYCLE
    intercept: bool = False
    weighted: bool = False
    source: Literal["fitted", "bundled"] = "fitted"


class DatasetConfig(_Section):
    """Survey harmonization applied when the city table is loaded."""

    commute_factor: float = Field(default=COMMUTE_FACTOR, gt=0.0, le=1.0)
    country_commute_factors: Dict[str, float] = Field(default_factory=dict)
    strict: bool = True

    @model_validator(mode="after")
    def _factors_in_range(self) -> "DatasetConfig":
        for country, factor in self.country_commute_factors.items():
            if not 0.0 < factor <= 1.0:
                raise ValueError(f"commute factor for '{country}' must lie in (0, 1], got {factor}")
        return self


class EvaluationConfig(_Section):
    threshold_pp: float = Field(default=10.0, ge=0.0)
    hide_small: bool = False
    split_year: int = 2018
    saturation_step: int = Field(default=1000, gt=0)


class PipelineConfig(_Section):
    """Everything a pipeline run needs."""

    paths: PathsConfig = Field(default_factory=PathsConfig)
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)
    thresholds: ThresholdsConfig = Field(default_factory=ThresholdsConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    output_dir: Path = Path("out")
    workers: int = Field(default=WORKERS, ge=1)

    def metadata_dir(self) -> Path:
        return self.paths.metadata or self.output_dir / "sample"

    def city_counts_path(self) -> Path:
        return self.paths.city_counts or self.output_dir / "city_counts.csv"

    def model_path(self) -> Path:
        return self.paths.model or self.output_dir / f"model_{self.model.mode.value}.json"


def _parse_value(raw: str) -> Any:
    """Interpret an override value as a TOML scalar, falling back to a plain string."""
    try:
        return tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        return raw


def apply_overrides(document: Dict[str, Any], overrides: Mapping[str, str]) -> Dict[str, Any]:
    """Set dotted keys (``section.key``) in a nested config document."""
    for dotted, raw in overrides.items():
        *parents, leaf = dotted.split(".")
        node = document
        for part in parents:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError([f"{dotted}: '{part}' is not a section"])
            node = child
        node[leaf] = _parse_value(raw) if isinstance(raw, str) else raw
    return document


def _messages(exc: ValidationError) -> List[str]:
    return [f"{'.'.join(str(part) for part in error['loc']) or 'config'}: {error['msg']}" for error in exc.errors()]


def load_config(path: Optional[Path] = None, overrides: Optional[Mapping[str, str]] = None) -> PipelineConfig:
    """Load, override and validate a pipeline configuration.

    Args:
        path: Optional TOML file
        overrides: Dotted-name overrides, values as given on the command line

    Returns:
        The validated configuration

    Raises:
        ConfigError: If the file cannot be read or any field is invalid
    """
    document: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "rb") as handle:
                document = tomllib.load(handle)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError([f"config file {path}: {exc}"]) from None
    apply_overrides(document, overrides or {})
    try:
        return PipelineConfig.model_validate(document)
    except ValidationError as exc:
        raise ConfigError(_messages(exc)) from None
