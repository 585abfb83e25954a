"""
Descriptive tables and plot data for the evaluation reports.
"""
from typing import Dict, Sequence

import numpy as np
import pandas as pd

from gsv_mode_share.evaluation.loocv import EvalReport

DESCRIBE_COLUMNS = ["variable", "n", "mean", "sd", "min", "p25", "p75", "max"]
SCATTER_COLUMNS = ["city_id", "observed_pct", "predicted_pct"]

# Display filter for scatter plots: points below this share (percent) on either axis
SCATTER_HIDE_BELOW_PP = 0.5


def describe_variables(frame: pd.DataFrame) -> pd.DataFrame:
    """N, mean, standard deviation, min, quartiles and max of every numeric column.

    Missing values are excluded per column, so ``n`` can differ between rows.
    """
    rows = []
    for name in frame.select_dtypes(include="number").columns:
        series = frame[name].dropna()
        rows.append(
            {
                "variable": name,
                "n": int(series.count()),
                "mean": float(series.mean()),
                "sd": float(series.std(ddof=1)) if len(series) > 1 else float("nan"),
                "min": float(series.min()),
                "p25": float(series.quantile(0.25)),
                "p75": float(series.quantile(0.75)),
                "max": float(series.max()),
            }
        )
    return pd.DataFrame(rows, columns=DESCRIBE_COLUMNS)


def summarize_predictions(shares_pct: Sequence[float]) -> Dict[str, float]:
    """Min, median, mean and max of a set of shares (percent)."""
    values = np.asarray(shares_pct, dtype=float)
    if values.size == 0:
        raise ValueError("cannot summarize an empty set of shares")
    return {
        "min": float(values.min()),
        "median": float(np.median(values)),
        "mean": float(values.mean()),
        "max": float(values.max()),
    }


def scatter_points(report: EvalReport, hide_small: bool = False) -> pd.DataFrame:
    """Observed/predicted pairs for an observed-vs-predicted scatter plot.

    Args:
        report: Evaluation report
        hide_small: Drop cities whose observed or predicted share is below 0.5 %

    Returns:
        DataFrame with one row per plotted city, in report order
    """
    frame = report.frame()[SCATTER_COLUMNS]
    if hide_small:
        keep = (frame["observed_pct"] >= SCATTER_HIDE_BELOW_PP) & (frame["predicted_pct"] >= SCATTER_HIDE_BELOW_PP)
        frame = frame[keep]
    return frame.reset_index(drop=True)
