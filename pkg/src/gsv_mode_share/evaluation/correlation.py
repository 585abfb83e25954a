"""
Correlation matrix of (optionally log-transformed) explanatory variables.
"""
from typing import Mapping, Optional, Sequence

import numpy as np
import pandas as pd

MIN_SERIES_LENGTH = 3


def corr_matrix(
    variables: Mapping[str, Sequence[float]],
    log_transform: Optional[Mapping[str, bool]] = None,
) -> pd.DataFrame:
    """Pearson correlation matrix of named series.

    Args:
        variables: Series keyed by name, all of the same length
        log_transform: Per-name flag; flagged series are log-transformed first

    Returns:
        Symmetric DataFrame indexed and labelled by series name, diagonal exactly 1

    Raises:
        ValueError: On unequal or too-short series, non-positive values in a
            log-flagged series, or a zero-variance series (named in the message)
    """
    log_transform = log_transform or {}
    unknown = set(log_transform) - set(variables)
    if unknown:
        raise ValueError(f"log_transform names unknown series: {', '.join(sorted(unknown))}")
    lengths = {len(values) for values in variables.values()}
    if len(lengths) != 1:
        raise ValueError("all series must have the same length")
    if lengths.pop() < MIN_SERIES_LENGTH:
        raise ValueError(f"correlations need at least {MIN_SERIES_LENGTH} observations")

    columns = {}
    for name, values in variables.items():
        series = np.asarray(values, dtype=float)
        if log_transform.get(name, False):
            if np.any(series <= 0):
                raise ValueError(f"series '{name}' has non-positive values and cannot be log-transformed")
            series = np.log(series)
        if np.std(series) == 0:
            raise ValueError(f"series '{name}' has zero variance")
        columns[name] = series

    frame = pd.DataFrame(columns)
    matrix = frame.corr(method="pearson")
    values = (matrix.to_numpy() + matrix.to_numpy().T) / 2.0
    np.fill_diagonal(values, 1.0)
    return pd.DataFrame(values, index=matrix.index, columns=matrix.columns)
