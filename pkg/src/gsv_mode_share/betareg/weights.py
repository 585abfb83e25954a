"""
Temporal observation weights for the weighted mode-share fits.
"""
from typing import Sequence

# Gaps below one year are clamped; metadata only resolves year and month
MIN_GAP_YEARS = 1.0


def compute_weights(survey_year: float, image_years: Sequence[float]) -> float:
    """Sum of inverse gaps between the survey year and each image's capture year.

    Args:
        survey_year: Year the mode share was surveyed
        image_years: Capture year of every image of the city

    Returns:
        Σ 1 / max(|survey_year − image_year|, 1)

    Raises:
        ValueError: If ``image_years`` is empty
    """
    if len(image_years) == 0:
        raise ValueError("compute_weights needs at least one image year")
    return float(sum(1.0 / max(abs(survey_year - year), MIN_GAP_YEARS) for year in image_years))
