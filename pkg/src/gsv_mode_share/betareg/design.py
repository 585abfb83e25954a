"""
Design matrices for the mode-share regressions.
"""
import math
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from gsv_mode_share.dataset.records import CityRecord, Mode
from gsv_mode_share.detections.models import CityCounts

# Raw covariates of the mode-share model; each enters on the log scale
COVARIATES = ("gsv_cycle", "gsv_motorcycle", "pop_density")
INTERCEPT = "intercept"


class DesignMatrix:
    """Covariates, responses and optional weights for one regression.

    ``x`` holds the already-transformed covariates; the intercept column (if any)
    is prepended here. Weights are rescaled to mean 1 so log-likelihood magnitudes
    stay comparable between weighted and unweighted fits.
    """

    def __init__(
        self,
        x: np.ndarray,
        y: Sequence[float],
        covariates: Sequence[str],
        intercept: bool = False,
        weights: Optional[Sequence[float]] = None,
        row_ids: Optional[Sequence[str]] = None,
    ) -> None:
        """Initialize a design matrix.

        Args:
            x: n × len(covariates) matrix of transformed covariates
            y: Responses strictly inside (0, 1)
            covariates: Covariate names, one per column of ``x``
            intercept: Whether to prepend an intercept column
            weights: Optional positive per-row weights
            row_ids: Optional row labels (city ids)

        Raises:
            ValueError: On shape mismatch, non-finite entries, responses outside
                (0, 1) or non-positive weights
        """
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        y = np.asarray(y, dtype=float)
        if x.shape[0] != y.shape[0] or x.shape[1] != len(covariates):
            raise ValueError(f"design shape {x.shape} does not match {len(y)} responses / {len(covariates)} covariates")
        if not np.all(np.isfinite(x)):
            raise ValueError("design contains non-finite covariates")
        if not np.all((y > 0.0) & (y < 1.0)):
            raise ValueError("responses must lie strictly inside (0, 1)")

        self.covariates: List[str] = list(covariates)
        self.intercept = intercept
        self.raw_x = x
        self.x = np.hstack([np.ones((x.shape[0], 1)), x]) if intercept else x
        self.y = y
        self.row_ids: List[str] = list(row_ids) if row_ids is not None else [str(i) for i in range(len(y))]
        if len(self.row_ids) != len(y):
            raise ValueError("row_ids length does not match the number of rows")

        self.raw_weights: Optional[np.ndarray] = None
        if weights is not None:
            w = np.asarray(weights, dtype=float)
            if w.shape != y.shape or not np.all(np.isfinite(w)) or not np.all(w > 0):
                raise ValueError("weights must be positive and one per row")
            self.raw_weights = w
        self.weights = self.raw_weights / self.raw_weights.mean() if self.raw_weights is not None else np.ones_like(y)

    @property
    def columns(self) -> List[str]:
        return ([INTERCEPT] if self.intercept else []) + self.covariates

    @property
    def n_rows(self) -> int:
        return len(self.y)

    @property
    def n_params(self) -> int:
        """Number of coefficients plus the precision parameter."""
        return self.x.shape[1] + 1

    @property
    def weighted(self) -> bool:
        return self.raw_weights is not None

    def subset(self, rows: Sequence[int]) -> "DesignMatrix":
        """A new design restricted to the given row indices (weights re-normalized)."""
        rows = list(rows)
        return DesignMatrix(
            self.raw_x[rows],
            self.y[rows],
            self.covariates,
            intercept=self.intercept,
            weights=self.raw_weights[rows] if self.raw_weights is not None else None,
            row_ids=[self.row_ids[i] for i in rows],
        )

    def canonical(self) -> "DesignMatrix":
        """The same rows sorted by covariates, response and weight.

        Fits on permutations of one design then sum their terms in the same order.
        """
        keys = [self.raw_x[:, j] for j in range(self.raw_x.shape[1])] + [self.y]
        if self.raw_weights is not None:
            keys.append(self.raw_weights)
        # lexsort treats the last key as primary
        order = np.lexsort(keys[::-1])
        return self.subset(order.tolist())

    def without(self, row: int) -> "DesignMatrix":
        return self.subset([i for i in range(self.n_rows) if i != row])

    def __len__(self) -> int:
        return self.n_rows

    def __str__(self) -> str:
        weighted = ", weighted" if self.weighted else ""
        return f"DesignMatrix({self.n_rows} rows × {', '.join(self.columns)}{weighted})"


def log_covariates(values: Mapping[str, float], names: Sequence[str]) -> List[float]:
    """Log-transform named raw covariates in the given order.

    Raises:
        KeyError: If a name is missing
        ValueError: If a value is not strictly positive
    """
    logged = []
    for name in names:
        value = float(values[name])
        if not value > 0:
            raise ValueError(f"covariate '{name}' must be positive to take its log, got {value}")
        logged.append(math.log(value))
    return logged


def raw_covariates(record: CityRecord, counts: CityCounts) -> Dict[str, float]:
    return {
        "gsv_cycle": float(counts.gsv_cycle),
        "gsv_motorcycle": float(counts.gsv_motorcycle),
        "pop_density": record.pop_density,
    }


def build_design(
    records: Sequence[CityRecord],
    counts: Mapping[str, CityCounts],
    mode: Mode,
    intercept: bool = False,
    weights: Optional[Mapping[str, float]] = None,
) -> DesignMatrix:
    """Assemble the mode-share regression design.

    Rows are the cities with an observed share for ``mode`` and detection counts
    (and a weight, when weights are given), in record order.

    Args:
        records: City records
        counts: CityCounts keyed by city id
        mode: Response mode
        intercept: Whether to include an intercept
        weights: Optional weights keyed by city id

    Returns:
        DesignMatrix with log covariates
    """
    rows, y, ids, w = [], [], [], []
    for record in records:
        share = record.share(mode)
        if share is None or record.city_id not in counts:
            continue
        if weights is not None and record.city_id not in weights:
            continue
        try:
            rows.append(log_covariates(raw_covariates(record, counts[record.city_id]), COVARIATES))
        except ValueError as exc:
            raise ValueError(f"city '{record.city_id}': {exc}") from None
        y.append(share)
        ids.append(record.city_id)
        if weights is not None:
            w.append(weights[record.city_id])
    return DesignMatrix(
        np.asarray(rows, dtype=float).reshape(-1, len(COVARIATES)),
        y,
        COVARIATES,
        intercept=intercept,
        weights=w if weights is not None else None,
        row_ids=ids,
    )
