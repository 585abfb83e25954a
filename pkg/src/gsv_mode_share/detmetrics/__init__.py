"""
Detection quality metrics for GSV Mode Share.
"""
from gsv_mode_share.detmetrics.matching import DEFAULT_IOU_THRESHOLD, MatchResult, iou, match_detections
from gsv_mode_share.detmetrics.metrics import (
    ClassMetrics,
    DetectionReport,
    average_precision,
    evaluate_detections,
    f1,
    mean_ap,
)

__all__ = [
    'DEFAULT_IOU_THRESHOLD', 'MatchResult', 'iou', 'match_detections',
    'ClassMetrics', 'DetectionReport', 'average_precision', 'evaluate_detections', 'f1', 'mean_ap',
]
