"""
Loading detector output and aggregating it to per-city counts.
"""
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from functools import reduce
from pathlib import Path
from typing import Dict, List, Sequence

import pandas as pd
from pydantic import ValidationError

from gsv_mode_share.detections.models import CityCounts, Detection, GroundTruthBox, VehicleClass
from gsv_mode_share.errors import ConsistencyError, RowError, SchemaError

logger = logging.getLogger(__name__)

DEFAULT_CONF_THRESHOLD = 0.25

DETECTION_COLUMNS = ["image_id", "class", "confidence", "x_min", "y_min", "x_max", "y_max"]
GROUND_TRUTH_COLUMNS = ["image_id", "class", "x_min", "y_min", "x_max", "y_max"]
COUNTS_COLUMNS = ["city_id", "gsv_cycle", "gsv_motorcycle", "gsv_cargo", "gsv_rickshaw", "n_images"]

_FIELD_BY_CLASS = {
    VehicleClass.PEDAL: "gsv_cycle",
    VehicleClass.MOTOR: "gsv_motorcycle",
    VehicleClass.CARGO: "gsv_cargo",
    VehicleClass.RICKSHAW: "gsv_rickshaw",
}


def _read_table(path: Path, columns: List[str]) -> pd.DataFrame:
    frame = pd.read_csv(path, dtype={"image_id": str, "class": str})
    for column in columns:
        if column not in frame.columns:
            raise SchemaError(column, str(path))
    return frame


def _bbox(row: dict) -> tuple:
    return (float(row["x_min"]), float(row["y_min"]), float(row["x_max"]), float(row["y_max"]))


def load_detections(path: Path) -> List[Detection]:
    """Load a detection CSV (``image_id,class,confidence,x_min,y_min,x_max,y_max``)."""
    frame = _read_table(path, DETECTION_COLUMNS)
    detections = []
    for index, row in enumerate(frame.to_dict(orient="records")):
        try:
            detections.append(
                Detection(
                    image_id=row["image_id"],
                    vehicle_class=VehicleClass(str(row["class"]).strip().lower()),
                    confidence=float(row["confidence"]),
                    bbox=_bbox(row),
                )
            )
        except (ValidationError, ValueError) as exc:
            raise RowError(index + 2, str(exc)) from None
    return detections


def load_ground_truth(path: Path) -> List[GroundTruthBox]:
    """Load a ground-truth CSV (``image_id,class,x_min,y_min,x_max,y_max``)."""
    frame = _read_table(path, GROUND_TRUTH_COLUMNS)
    boxes = []
    for index, row in enumerate(frame.to_dict(orient="records")):
        try:
            boxes.append(
                GroundTruthBox(
                    image_id=row["image_id"],
                    vehicle_class=VehicleClass(str(row["class"]).strip().lower()),
                    bbox=_bbox(row),
                )
            )
        except (ValidationError, ValueError) as exc:
            raise RowError(index + 2, str(exc)) from None
    return boxes


def load_manifest(path: Path) -> List[str]:
    """Load an image manifest: one image id per line, blank lines ignored."""
    with open(path, encoding="utf-8") as handle:
        return [line.strip() for line in handle if line.strip()]


def aggregate_city_counts(
    dets: Sequence[Detection],
    manifest: Sequence[str],
    conf_threshold: float = DEFAULT_CONF_THRESHOLD,
    city_id: str = "",
) -> CityCounts:
    """Count detections per class for one city's image set.

    Args:
        dets: Detections from the city's images
        manifest: Every image id that was sampled, with or without detections
        conf_threshold: Minimum confidence for a detection to count
        city_id: City the counts belong to

    Returns:
        Per-class counts and the number of distinct images

    Raises:
        ConsistencyError: If a detection references an image absent from the manifest
    """
    images = set(manifest)
    counter: Counter = Counter()
    for det in dets:
        if det.image_id not in images:
            raise ConsistencyError(f"detection references image '{det.image_id}' absent from the manifest")
        if det.confidence >= conf_threshold:
            counter[det.vehicle_class] += 1
    fields = {_FIELD_BY_CLASS[cls]: counter.get(cls, 0) for cls in VehicleClass}
    return CityCounts(city_id=city_id, n_images=len(images), **fields)


def aggregate_partitioned(
    dets: Sequence[Detection],
    manifest: Sequence[str],
    conf_threshold: float = DEFAULT_CONF_THRESHOLD,
    city_id: str = "",
    partitions: int = 4,
    workers: int = 4,
) -> CityCounts:
    """Aggregate disjoint image partitions in parallel and merge the partial counts.

    The result equals :func:`aggregate_city_counts` on the full inputs.
    """
    images = list(dict.fromkeys(manifest))
    partitions = max(1, min(partitions, len(images) or 1))
    chunks = [images[i::partitions] for i in range(partitions)]
    owner = {image: index for index, chunk in enumerate(chunks) for image in chunk}
    grouped: List[List[Detection]] = [[] for _ in chunks]
    for det in dets:
        if det.image_id not in owner:
            raise ConsistencyError(f"detection references image '{det.image_id}' absent from the manifest")
        grouped[owner[det.image_id]].append(det)

    def run(index: int) -> CityCounts:
        return aggregate_city_counts(grouped[index], chunks[index], conf_threshold, city_id)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        partials = list(pool.map(run, range(len(chunks))))
    return reduce(CityCounts.merge, partials, CityCounts(city_id=city_id))


def per_image_counts(
    dets: Sequence[Detection],
    manifest: Sequence[str],
    vehicle_class: VehicleClass,
    conf_threshold: float = DEFAULT_CONF_THRESHOLD,
) -> List[int]:
    """Detections of one class per image, in manifest order (zeros included)."""
    counter: Counter = Counter(
        det.image_id for det in dets if det.vehicle_class is vehicle_class and det.confidence >= conf_threshold
    )
    return [counter.get(image, 0) for image in manifest]


def class_totals(boxes: Sequence[GroundTruthBox]) -> Dict[VehicleClass, int]:
    """Labelled instances per class."""
    counter = Counter(box.vehicle_class for box in boxes)
    return {cls: counter.get(cls, 0) for cls in VehicleClass}


def counts_frame(counts: Sequence[CityCounts]) -> pd.DataFrame:
    return pd.DataFrame([c.model_dump() for c in counts], columns=COUNTS_COLUMNS)


def load_city_counts(path: Path) -> Dict[str, CityCounts]:
    """Load a CityCounts table written by the aggregate stage."""
    frame = pd.read_csv(path, dtype={"city_id": str})
    for column in COUNTS_COLUMNS:
        if column not in frame.columns:
            raise SchemaError(column, str(path))
    counts = {}
    for row in frame[COUNTS_COLUMNS].to_dict(orient="records"):
        city_id = str(row.pop("city_id"))
        counts[city_id] = CityCounts(city_id=city_id, **{key: int(value) for key, value in row.items()})
    return counts
