"""
Comparison of automated counts against manually verified true positives.
"""
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional

import pandas as pd
from pydantic import BaseModel

from gsv_mode_share.detections.models import CityCounts, VehicleClass
from gsv_mode_share.errors import ConsistencyError, SchemaError

logger = logging.getLogger(__name__)

MISSING_MARKERS = ("", "na", "n/a", "nan")
COMPARED_CLASSES = (VehicleClass.PEDAL, VehicleClass.MOTOR)
MANUAL_COLUMNS = ["city_id", "tp_cycle", "tp_motorcycle"]
COMPARISON_COLUMNS = [
    "city_id",
    "cycle_yolo",
    "motorcycle_yolo",
    "tp_cycle",
    "tp_motorcycle",
    "yolo_sum",
    "tp_sum",
    "ratio_cycle",
    "ratio_motorcycle",
    "skipped",
    "sum_mismatch",
]


class ManualCounts(BaseModel):
    """Manually verified true positives for one city; None marks a missing entry."""

    city_id: str
    true_positives: Dict[VehicleClass, Optional[int]]
    printed_yolo_sum: Optional[int] = None
    printed_tp_sum: Optional[int] = None


class ClassComparison(BaseModel):
    vehicle_class: VehicleClass
    auto: int
    manual: int
    ratio: Optional[float]


class ComparisonReport(BaseModel):
    """Automated vs. manual counts for one city."""

    city_id: str
    auto: CityCounts
    classes: List[ClassComparison]
    skipped: List[VehicleClass]
    yolo_sum: int
    tp_sum: Optional[int]
    sum_mismatch: bool

    def ratio(self, vehicle_class: VehicleClass) -> Optional[float]:
        for entry in self.classes:
            if entry.vehicle_class is vehicle_class:
                return entry.ratio
        return None

    def row(self) -> dict:
        by_class = {entry.vehicle_class: entry for entry in self.classes}
        pedal, motor = by_class.get(VehicleClass.PEDAL), by_class.get(VehicleClass.MOTOR)
        return {
            "city_id": self.city_id,
            "cycle_yolo": self.auto.gsv_cycle,
            "motorcycle_yolo": self.auto.gsv_motorcycle,
            "tp_cycle": pedal.manual if pedal else None,
            "tp_motorcycle": motor.manual if motor else None,
            "yolo_sum": self.yolo_sum,
            "tp_sum": self.tp_sum,
            "ratio_cycle": pedal.ratio if pedal else None,
            "ratio_motorcycle": motor.ratio if motor else None,
            "skipped": ";".join(str(cls) for cls in self.skipped),
            "sum_mismatch": self.sum_mismatch,
        }


def _parse_optional_int(raw: object) -> Optional[int]:
    text = str(raw).strip()
    if text.lower() in MISSING_MARKERS:
        return None
    return int(float(text))


def load_manual_counts(path: Path) -> Dict[str, ManualCounts]:
    """Load manual true-positive counts (``city_id,tp_cycle,tp_motorcycle[,yolo_sum,tp_sum]``).

    "Na" entries are kept as missing, never as zero.
    """
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    for column in MANUAL_COLUMNS:
        if column not in frame.columns:
            raise SchemaError(column, str(path))
    manual = {}
    for row in frame.to_dict(orient="records"):
        manual[row["city_id"]] = ManualCounts(
            city_id=row["city_id"],
            true_positives={
                VehicleClass.PEDAL: _parse_optional_int(row["tp_cycle"]),
                VehicleClass.MOTOR: _parse_optional_int(row["tp_motorcycle"]),
            },
            printed_yolo_sum=_parse_optional_int(row.get("yolo_sum", "")),
            printed_tp_sum=_parse_optional_int(row.get("tp_sum", "")),
        )
    return manual


def compare_manual(auto: CityCounts, manual: ManualCounts) -> ComparisonReport:
    """Compare automated counts with manual true positives, class by class.

    Sums are recomputed from the components; when printed sums are supplied a
    disagreement sets ``sum_mismatch`` instead of overriding the recomputed value.

    Raises:
        ConsistencyError: If the two inputs refer to different cities
    """
    if auto.city_id and manual.city_id and auto.city_id != manual.city_id:
        raise ConsistencyError(f"comparing counts of '{auto.city_id}' with manual counts of '{manual.city_id}'")

    classes: List[ClassComparison] = []
    skipped: List[VehicleClass] = []
    for cls in COMPARED_CLASSES:
        tp = manual.true_positives.get(cls)
        if tp is None:
            logger.info("Manual %s count for %s is missing; class skipped", cls, manual.city_id)
            skipped.append(cls)
            continue
        auto_count = auto.count(cls)
        classes.append(
            ClassComparison(
                vehicle_class=cls,
                auto=auto_count,
                manual=tp,
                ratio=tp / auto_count if auto_count else None,
            )
        )

    yolo_sum = sum(auto.count(cls) for cls in COMPARED_CLASSES)
    tp_sum = None if skipped else sum(entry.manual for entry in classes)
    mismatch = (manual.printed_yolo_sum is not None and manual.printed_yolo_sum != yolo_sum) or (
        manual.printed_tp_sum is not None and tp_sum is not None and manual.printed_tp_sum != tp_sum
    )
    if mismatch:
        logger.warning("Printed sums for %s disagree with recomputed sums", manual.city_id)
    return ComparisonReport(
        city_id=auto.city_id or manual.city_id,
        auto=auto,
        classes=classes,
        skipped=skipped,
        yolo_sum=yolo_sum,
        tp_sum=tp_sum,
        sum_mismatch=mismatch,
    )


def comparison_frame(reports: List[ComparisonReport]) -> pd.DataFrame:
    return pd.DataFrame([report.row() for report in reports], columns=COMPARISON_COLUMNS)
