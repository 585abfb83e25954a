"""
City records and survey canonicalization for GSV Mode Share.
"""
import logging
import math
import re
from enum import Enum
from typing import Dict, List, Optional, Self

from pydantic import BaseModel, ConfigDict, computed_field, model_validator

from gsv_mode_share.errors import ShareRangeError

logger = logging.getLogger(__name__)

# Commuting-to-all-trips scaling factor for census-style commute surveys
COMMUTE_FACTOR = 0.72


class Role(str, Enum):
    """Whether a city trains the model or only receives predictions."""
    TRAINING = "training"
    DEMO = "demo"

    def __str__(self) -> str:
        return self.value


class SurveyScope(str, Enum):
    """Trip purposes covered by the source survey."""
    ALL_TRIPS = "all_trips"
    COMMUTING = "commuting"

    def __str__(self) -> str:
        return self.value


class Mode(str, Enum):
    """Travel modes with a prediction model."""
    CYCLE = "cycle"
    MOTORCYCLE = "motorcycle"

    def __str__(self) -> str:
        return self.value


class CityRecord(BaseModel):
    """One city's mode shares, survey metadata and population figures.

    Shares are proportions in (0, 1); population density is always derived from
    population and area so the two can never disagree.
    """

    model_config = ConfigDict(frozen=True)

    city_id: str
    name: str
    country: str
    role: Role
    cycle_share: Optional[float] = None
    motorcycle_share: Optional[float] = None
    survey_year: int
    survey_scope: SurveyScope = SurveyScope.ALL_TRIPS
    population: float
    area_km2: float

    @computed_field
    @property
    def pop_density(self) -> float:
        """Persons per km²."""
        return self.population / self.area_km2

    @model_validator(mode="after")
    def _check_invariants(self) -> Self:
        for label, share in (("cycle_share", self.cycle_share), ("motorcycle_share", self.motorcycle_share)):
            if share is not None and not (0.0 < share < 1.0):
                raise ValueError(f"{label} must lie strictly inside (0, 1), got {share}")
        if self.area_km2 <= 0 or not math.isfinite(self.area_km2):
            raise ValueError(f"area_km2 must be positive, got {self.area_km2}")
        if self.population < 0 or not math.isfinite(self.population):
            raise ValueError(f"population must be non-negative, got {self.population}")
        both = self.cycle_share is not None and self.motorcycle_share is not None
        if self.role is Role.TRAINING and not both:
            raise ValueError("training cities need both cycle and motorcycle shares")
        if self.role is Role.DEMO and both:
            raise ValueError("demo cities must lack at least one share")
        return self

    def share(self, mode: Mode) -> Optional[float]:
        """Return the share for a mode."""
        return self.cycle_share if mode is Mode.CYCLE else self.motorcycle_share

    def __str__(self) -> str:
        return f"{self.name}, {self.country} ({self.role})"


def adjust_commute_share(share: float, factor: float = COMMUTE_FACTOR) -> float:
    """Scale a commuting-only mode share to an all-trips share.

    Args:
        share: Commuting mode share as a proportion in (0, 1)
        factor: Positive scaling factor

    Returns:
        share × factor

    Raises:
        ShareRangeError: If the input or the result falls outside (0, 1)
    """
    if not (0.0 < share < 1.0):
        raise ShareRangeError(f"share must lie strictly inside (0, 1), got {share}")
    if factor <= 0:
        raise ShareRangeError(f"factor must be positive, got {factor}")
    adjusted = share * factor
    if not (0.0 < adjusted < 1.0):
        raise ShareRangeError(f"adjusted share {adjusted} outside (0, 1) for factor {factor}")
    return adjusted


_YEAR_RANGE = re.compile(r"^\s*(\d{4})\s*[-–/]\s*(\d{4})\s*$")


def parse_survey_year(text: str) -> int:
    """Parse a survey year, averaging multi-year ranges such as "2016-2018".

    Half years round up (2015-2016 -> 2016).
    """
    match = _YEAR_RANGE.match(text)
    if match:
        start, end = int(match.group(1)), int(match.group(2))
        if end < start:
            raise ValueError(f"survey year range '{text}' ends before it starts")
        return math.floor((start + end) / 2 + 0.5)
    return int(text.strip())


def harmonize_survey_scope(
    records: List[CityRecord],
    default_factor: float = COMMUTE_FACTOR,
    country_factors: Optional[Dict[str, float]] = None,
) -> List[CityRecord]:
    """Convert commuting-scope shares to all-trips shares.

    Records already in all-trips scope pass through untouched, so applying this
    twice is the same as applying it once.

    Args:
        records: City records
        default_factor: Factor used when the country has no specific entry
        country_factors: Optional per-country factors keyed by country code

    Returns:
        New list of records, all in all-trips scope
    """
    country_factors = country_factors or {}
    harmonized = []
    for record in records:
        if record.survey_scope is not SurveyScope.COMMUTING:
            harmonized.append(record)
            continue
        factor = country_factors.get(record.country, default_factor)
        updates = {"survey_scope": SurveyScope.ALL_TRIPS}
        for field in ("cycle_share", "motorcycle_share"):
            value = getattr(record, field)
            if value is not None:
                updates[field] = adjust_commute_share(value, factor)
        logger.debug("Scaled commuting shares of %s by %s", record.city_id, factor)
        harmonized.append(record.model_copy(update=updates))
    return harmonized
