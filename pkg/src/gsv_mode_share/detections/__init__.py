"""
Detector output ingestion and per-city aggregation for GSV Mode Share.
"""
from gsv_mode_share.detections.aggregate import (
    COUNTS_COLUMNS,
    DEFAULT_CONF_THRESHOLD,
    aggregate_city_counts,
    aggregate_partitioned,
    class_totals,
    counts_frame,
    load_city_counts,
    load_detections,
    load_ground_truth,
    load_manifest,
    per_image_counts,
)
from gsv_mode_share.detections.models import CityCounts, Detection, GroundTruthBox, VehicleClass
from gsv_mode_share.detections.saturation import saturation_curve, saturation_from_counts
from gsv_mode_share.detections.validation import (
    ComparisonReport,
    ManualCounts,
    compare_manual,
    comparison_frame,
    load_manual_counts,
)

__all__ = [
    'COUNTS_COLUMNS', 'DEFAULT_CONF_THRESHOLD', 'aggregate_city_counts', 'aggregate_partitioned',
    'class_totals', 'counts_frame', 'load_city_counts', 'load_detections', 'load_ground_truth',
    'load_manifest', 'per_image_counts',
    'CityCounts', 'Detection', 'GroundTruthBox', 'VehicleClass',
    'saturation_curve', 'saturation_from_counts',
    'ComparisonReport', 'ManualCounts', 'compare_manual', 'comparison_frame', 'load_manual_counts',
]
