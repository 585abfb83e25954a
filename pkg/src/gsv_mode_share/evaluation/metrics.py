"""
Prediction error metrics in percentage points.
"""
import math
from typing import Sequence, Tuple

import numpy as np


def error_metrics(observed: Sequence[float], predicted: Sequence[float]) -> Tuple[float, float, float]:
    """Root-mean-square, mean and median absolute error of paired values.

    Args:
        observed: Observed shares (percent)
        predicted: Predicted shares (percent), paired with ``observed``

    Returns:
        (rmse, mae, mdae) in the units of the inputs; the median of an even
        count is the mean of the two middle values

    Raises:
        ValueError: If the lists are empty or differ in length
    """
    if len(observed) != len(predicted):
        raise ValueError(f"observed ({len(observed)}) and predicted ({len(predicted)}) differ in length")
    if len(observed) == 0:
        raise ValueError("error metrics need at least one pair")
    errors = np.abs(np.asarray(observed, dtype=float) - np.asarray(predicted, dtype=float))
    rmse = math.sqrt(float(np.mean(errors**2)))
    return rmse, float(np.mean(errors)), float(np.median(errors))
