"""
Leave-one-out cross-validation and residual reporting.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence

import pandas as pd
from pydantic import BaseModel, Field

from gsv_mode_share.betareg.design import DesignMatrix
from gsv_mode_share.betareg.fitting import fit, predict_design
from gsv_mode_share.errors import FoldError
from gsv_mode_share.evaluation.metrics import error_metrics

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD_PP = 10.0
REPORT_COLUMNS = ["city_id", "observed_pct", "predicted_pct", "abs_error_pp"]


class CityPrediction(BaseModel):
    """Observed against predicted share for one city (percent)."""

    city_id: str
    observed_pct: float
    predicted_pct: float
    abs_error_pp: float = Field(ge=0.0)


class EvalReport(BaseModel):
    """Per-city predictions with summary errors in percentage points."""

    rows: List[CityPrediction]
    rmse: float
    mae: float
    mdae: float
    threshold_pp: float = DEFAULT_THRESHOLD_PP
    flagged: List[str] = Field(default_factory=list)

    @classmethod
    def from_predictions(
        cls,
        city_ids: Sequence[str],
        observed_pct: Sequence[float],
        predicted_pct: Sequence[float],
        threshold_pp: float = DEFAULT_THRESHOLD_PP,
    ) -> "EvalReport":
        """Build a report from paired percentages, keeping the given city order."""
        if not (len(city_ids) == len(observed_pct) == len(predicted_pct)):
            raise ValueError("city ids, observed and predicted values differ in length")
        rows = [
            CityPrediction(city_id=city, observed_pct=obs, predicted_pct=pred, abs_error_pp=abs(obs - pred))
            for city, obs, pred in zip(city_ids, observed_pct, predicted_pct)
        ]
        rmse, mae, mdae = error_metrics(observed_pct, predicted_pct)
        return cls(
            rows=rows,
            rmse=rmse,
            mae=mae,
            mdae=mdae,
            threshold_pp=threshold_pp,
            flagged=[row.city_id for row in rows if row.abs_error_pp > threshold_pp],
        )

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.model_dump() for row in self.rows], columns=REPORT_COLUMNS)

    def summary(self) -> dict:
        return {
            "n": len(self.rows),
            "rmse_pp": self.rmse,
            "mae_pp": self.mae,
            "mdae_pp": self.mdae,
            "threshold_pp": self.threshold_pp,
            "flagged": list(self.flagged),
        }


def _fold(design: DesignMatrix, row: int) -> float:
    """Fit without ``row`` and predict it (as a proportion)."""
    city_id = design.row_ids[row]
    try:
        model, _ = fit(design.without(row))
    except Exception as exc:
        raise FoldError(city_id, exc) from exc
    held_out = design.subset([row])
    return float(predict_design(model, held_out)[0])


def loocv(
    design: DesignMatrix,
    workers: int = 1,
    threshold_pp: float = DEFAULT_THRESHOLD_PP,
) -> EvalReport:
    """Leave-one-out cross-validation of the beta regression on a design.

    Each row is predicted by a model fitted on all other rows. Folds may run in
    parallel; the report keeps the design's row order.

    Args:
        design: Regression design (one row per city)
        workers: Thread-pool size for the folds
        threshold_pp: Error above which a city is flagged

    Returns:
        EvalReport with observed and held-out predicted shares in percent

    Raises:
        ValueError: If the design has too few rows to leave one out
        FoldError: If any fold fails, naming the held-out city
    """
    k = design.x.shape[1]
    if design.n_rows <= k + 2:
        raise ValueError(f"LOOCV needs more than {k + 2} rows, got {design.n_rows}")
    logger.info("Running %d LOOCV folds on %s", design.n_rows, design)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        predicted = list(pool.map(lambda row: _fold(design, row), range(design.n_rows)))
    return EvalReport.from_predictions(
        design.row_ids,
        [float(y) * 100.0 for y in design.y],
        [mu * 100.0 for mu in predicted],
        threshold_pp=threshold_pp,
    )


def residual_report(report: EvalReport, threshold_pp: float = DEFAULT_THRESHOLD_PP) -> pd.DataFrame:
    """Cities whose absolute error exceeds ``threshold_pp``, largest error first."""
    frame = report.frame()
    flagged = frame[frame["abs_error_pp"] > threshold_pp]
    return flagged.sort_values("abs_error_pp", ascending=False, kind="stable").reset_index(drop=True)
