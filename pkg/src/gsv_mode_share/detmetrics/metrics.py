"""
Average precision, mAP and F1 for detector evaluation.
"""
import logging
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel

from gsv_mode_share.detections.models import Detection, GroundTruthBox, VehicleClass
from gsv_mode_share.detmetrics.matching import DEFAULT_IOU_THRESHOLD, MatchResult, match_detections
from gsv_mode_share.errors import UndefinedAPError

logger = logging.getLogger(__name__)


def average_precision(match: MatchResult, cls: VehicleClass) -> float:
    """Area under the precision-recall curve with all-point interpolation.

    The precision envelope is made monotone non-increasing before integrating.

    Raises:
        UndefinedAPError: If the class has no ground-truth instances
    """
    n_gt = match.ground_truth.get(cls, 0)
    if n_gt == 0:
        raise UndefinedAPError(f"class '{cls}' has no ground-truth instances")
    hits = np.array([hit for _, hit in match.flags.get(cls, [])], dtype=bool)
    if hits.size == 0:
        return 0.0
    tp = np.cumsum(hits)
    fp = np.cumsum(~hits)
    recall = tp / n_gt
    precision = tp / (tp + fp)

    mrec = np.concatenate([[0.0], recall, [1.0]])
    mpre = np.concatenate([[0.0], precision, [0.0]])
    mpre = np.maximum.accumulate(mpre[::-1])[::-1]
    changes = np.where(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[changes + 1] - mrec[changes]) * mpre[changes + 1]))


def mean_ap(aps: Sequence[float]) -> float:
    """Unweighted mean of per-class APs."""
    if len(aps) == 0:
        raise ValueError("mean AP of an empty list is undefined")
    return float(sum(aps) / len(aps))


def f1(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


class ClassMetrics(BaseModel):
    vehicle_class: VehicleClass
    average_precision: Optional[float]
    tp: int
    fp: int
    fn: int


class DetectionReport(BaseModel):
    """Detector quality summary.

    ``precision`` and ``recall`` follow the standard definitions. The raw ratios
    TP/(TP+FP) and TP/(TP+FN) are also emitted under neutral names so published
    tables with swapped labels can be compared without relabelling anything.
    """

    iou_threshold: float
    conf_threshold: float
    classes: Dict[VehicleClass, ClassMetrics]
    total_tp: int
    total_fp: int
    total_fn: int
    precision: float
    recall: float
    f1: float
    map50: float
    tp_over_detections: float
    tp_over_ground_truth: float

    def frame(self) -> pd.DataFrame:
        """Per-class rows followed by a totals row."""
        rows = [
            {
                "class": str(metrics.vehicle_class),
                "average_precision": metrics.average_precision,
                "tp": metrics.tp,
                "fp": metrics.fp,
                "fn": metrics.fn,
                "precision": None,
                "recall": None,
                "f1": None,
                "map50": None,
            }
            for metrics in self.classes.values()
        ]
        rows.append(
            {
                "class": "total",
                "average_precision": None,
                "tp": self.total_tp,
                "fp": self.total_fp,
                "fn": self.total_fn,
                "precision": self.precision,
                "recall": self.recall,
                "f1": self.f1,
                "map50": self.map50,
            }
        )
        return pd.DataFrame(rows)


def evaluate_detections(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    iou_thr: float = DEFAULT_IOU_THRESHOLD,
    conf_thr: float = 0.25,
) -> DetectionReport:
    """Match detections and summarize per-class AP, totals, P/R/F1 and mAP@iou_thr."""
    match = match_detections(dets, gts, iou_thr=iou_thr, conf_thr=conf_thr)
    classes: Dict[VehicleClass, ClassMetrics] = {}
    aps = []
    for cls in VehicleClass:
        ap = None
        if match.ground_truth.get(cls, 0) > 0:
            ap = average_precision(match, cls)
            aps.append(ap)
        elif match.flags.get(cls):
            logger.warning("Class %s has detections but no ground truth; AP undefined", cls)
        classes[cls] = ClassMetrics(vehicle_class=cls, average_precision=ap, tp=match.tp(cls), fp=match.fp(cls), fn=match.fn(cls))

    total_tp = sum(m.tp for m in classes.values())
    total_fp = sum(m.fp for m in classes.values())
    total_fn = sum(m.fn for m in classes.values())
    precision = total_tp / (total_tp + total_fp) if total_tp + total_fp else 0.0
    recall = total_tp / (total_tp + total_fn) if total_tp + total_fn else 0.0
    return DetectionReport(
        iou_threshold=iou_thr,
        conf_threshold=conf_thr,
        classes=classes,
        total_tp=total_tp,
        total_fp=total_fp,
        total_fn=total_fn,
        precision=precision,
        recall=recall,
        f1=f1(precision, recall),
        map50=mean_ap(aps) if aps else 0.0,
        tp_over_detections=precision,
        tp_over_ground_truth=recall,
    )
