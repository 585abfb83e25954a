"""
Model evaluation for GSV Mode Share.
"""
from gsv_mode_share.evaluation.correlation import corr_matrix
from gsv_mode_share.evaluation.loocv import (
    DEFAULT_THRESHOLD_PP,
    REPORT_COLUMNS,
    CityPrediction,
    EvalReport,
    loocv,
    residual_report,
)
from gsv_mode_share.evaluation.metrics import error_metrics
from gsv_mode_share.evaluation.summaries import describe_variables, scatter_points, summarize_predictions

__all__ = [
    'corr_matrix',
    'DEFAULT_THRESHOLD_PP', 'REPORT_COLUMNS', 'CityPrediction', 'EvalReport', 'loocv', 'residual_report',
    'error_metrics',
    'describe_variables', 'scatter_points', 'summarize_predictions',
]
