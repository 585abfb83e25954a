"""
File loaders and writers for city tables, population grids and boundaries.
"""
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from gsv_mode_share.dataset.geometry import Boundary, PopulationGrid, population_inside
from gsv_mode_share.dataset.records import CityRecord, Role, SurveyScope, parse_survey_year
from gsv_mode_share.errors import GeometryError, RowError, SchemaError
from gsv_mode_share.reporting.artifacts import write_frame

logger = logging.getLogger(__name__)

CITY_TABLE_COLUMNS = [
    "city_id",
    "name",
    "country",
    "role",
    "cycle_share_pct",
    "motorcycle_share_pct",
    "survey_year",
    "survey_scope",
    "population",
    "area_km2",
]

GRID_COLUMNS = ["lat", "lon", "population"]


def _require_columns(frame: pd.DataFrame, columns: List[str], source: str) -> None:
    for column in columns:
        if column not in frame.columns:
            raise SchemaError(column, source)


def _parse_number(raw: str, column: str, line: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise RowError(line, f"column '{column}': cannot parse '{raw}' as a number") from None
    if not math.isfinite(value):
        raise RowError(line, f"column '{column}': value '{raw}' is not finite")
    return value


def _parse_share(raw: str, column: str, line: int) -> Optional[float]:
    """Convert a percent cell to a proportion; empty means absent."""
    if raw.strip() == "":
        return None
    pct = _parse_number(raw, column, line)
    if not (0.0 <= pct <= 100.0):
        raise RowError(line, f"column '{column}': share {pct}% outside [0, 100]")
    if pct == 0.0 or pct == 100.0:
        raise RowError(line, f"column '{column}': share must lie strictly between 0% and 100%")
    return pct / 100.0


def _parse_row(row: Dict[str, str], line: int) -> CityRecord:
    try:
        survey_year = parse_survey_year(row["survey_year"])
    except ValueError:
        raise RowError(line, f"column 'survey_year': cannot parse '{row['survey_year']}'") from None
    try:
        return CityRecord(
            city_id=row["city_id"].strip(),
            name=row["name"].strip(),
            country=row["country"].strip(),
            role=Role(row["role"].strip().lower()),
            cycle_share=_parse_share(row["cycle_share_pct"], "cycle_share_pct", line),
            motorcycle_share=_parse_share(row["motorcycle_share_pct"], "motorcycle_share_pct", line),
            survey_year=survey_year,
            survey_scope=SurveyScope(row["survey_scope"].strip().lower() or SurveyScope.ALL_TRIPS.value),
            population=_parse_number(row["population"], "population", line),
            area_km2=_parse_number(row["area_km2"], "area_km2", line),
        )
    except ValidationError as exc:
        messages = "; ".join(error["msg"] for error in exc.errors())
        raise RowError(line, messages) from None
    except ValueError as exc:
        if isinstance(exc, RowError):
            raise
        raise RowError(line, str(exc)) from None


def load_city_table(path: Path, strict: bool = True) -> List[CityRecord]:
    """Load the city mode-share table.

    Percent columns are converted to proportions. Line numbers in errors count the
    header as line 1.

    Args:
        path: CSV file with the documented header
        strict: If True, the first bad row raises; otherwise bad rows are logged and skipped

    Returns:
        One CityRecord per accepted row

    Raises:
        SchemaError: If a required column is missing
        RowError: If a row cannot be parsed or validated (strict mode)
    """
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    _require_columns(frame, CITY_TABLE_COLUMNS, str(path))

    records: List[CityRecord] = []
    seen = set()
    for index, row in enumerate(frame.to_dict(orient="records")):
        line = index + 2
        try:
            record = _parse_row(row, line)
            if record.city_id in seen:
                raise RowError(line, f"duplicate city_id '{record.city_id}'")
        except RowError as exc:
            if strict:
                raise
            logger.warning("Skipping city table row: %s", exc)
            continue
        seen.add(record.city_id)
        records.append(record)
    logger.info("Loaded %d cities from %s", len(records), path)
    return records


def _format_pct(share: Optional[float]) -> str:
    return "" if share is None else format(share * 100.0, ".12g")


def write_city_table(records: List[CityRecord], path: Path) -> Path:
    """Write records back in the city table format (shares in percent)."""
    rows = [
        {
            "city_id": r.city_id,
            "name": r.name,
            "country": r.country,
            "role": r.role.value,
            "cycle_share_pct": _format_pct(r.cycle_share),
            "motorcycle_share_pct": _format_pct(r.motorcycle_share),
            "survey_year": str(r.survey_year),
            "survey_scope": r.survey_scope.value,
            "population": format(r.population, ".17g"),
            "area_km2": format(r.area_km2, ".17g"),
        }
        for r in records
    ]
    return write_frame(path, pd.DataFrame(rows, columns=CITY_TABLE_COLUMNS))


def load_population_grid(path: Path) -> PopulationGrid:
    """Load a population grid CSV.

    The first line declares the resolution, e.g. ``# cell_size_m=250``; the rest is
    a ``lat,lon,population`` table.
    """
    with open(path, encoding="utf-8") as handle:
        first = handle.readline().strip()
    if not first.startswith("#") or "cell_size_m" not in first:
        raise SchemaError("cell_size_m", str(path))
    key, _, value = first.lstrip("#").strip().partition("=")
    if key.strip() != "cell_size_m":
        raise SchemaError("cell_size_m", str(path))
    try:
        cell_size_m = float(value)
    except ValueError:
        raise SchemaError("cell_size_m", str(path)) from None
    frame = pd.read_csv(path, skiprows=1)
    _require_columns(frame, GRID_COLUMNS, str(path))
    cells = frame[GRID_COLUMNS].to_numpy(dtype=float)
    return PopulationGrid(cell_size_m, cells)


def _polygons_from_geometry(geometry: Dict[str, Any]) -> List[List[List[Any]]]:
    kind = geometry.get("type")
    if kind == "Polygon":
        return [geometry["coordinates"]]
    if kind == "MultiPolygon":
        return list(geometry["coordinates"])
    raise GeometryError(f"unsupported boundary geometry type '{kind}'")


def load_boundary(path: Path) -> Boundary:
    """Load a GeoJSON boundary (Polygon, MultiPolygon, Feature or FeatureCollection)."""
    with open(path, encoding="utf-8") as handle:
        document = json.load(handle)
    kind = document.get("type")
    if kind == "FeatureCollection":
        geometries = [feature["geometry"] for feature in document.get("features", [])]
    elif kind == "Feature":
        geometries = [document["geometry"]]
    else:
        geometries = [document]
    polygons = []
    for geometry in geometries:
        polygons.extend(_polygons_from_geometry(geometry))
    return Boundary(polygons)


def attach_population(record: CityRecord, grid: PopulationGrid, boundary: Boundary) -> CityRecord:
    """Replace a record's population and area with grid-derived values.

    The resulting density equals the zonal density of the grid over the boundary.
    """
    population = population_inside(grid, boundary)
    return record.model_copy(update={"population": population, "area_km2": boundary.area_km2})
