"""
Street-view metadata clients: a live HTTP client and an offline fixture client.
"""
import logging
import threading
import time
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Optional, Self

import pandas as pd
import requests
from pydantic import BaseModel, ConfigDict, Field, model_validator

from gsv_mode_share.errors import MetadataUnavailableError, SchemaError
from gsv_mode_share.sampler.network import SamplePoint

logger = logging.getLogger(__name__)

METADATA_URL = "https://maps.googleapis.com/maps/api/streetview/metadata"
FIXTURE_COLUMNS = ["point_id", "available", "capture_year", "capture_month"]


class ImageMetadata(BaseModel):
    """Availability and capture date of the image at a sample point."""

    model_config = ConfigDict(frozen=True)

    point_id: str
    available: bool
    capture_year: Optional[int] = None
    capture_month: Optional[int] = Field(default=None, ge=1, le=12)

    @model_validator(mode="after")
    def _capture_only_when_available(self) -> Self:
        if not self.available and (self.capture_year is not None or self.capture_month is not None):
            raise ValueError("capture date present for an unavailable image")
        return self


class MetadataClient(ABC):
    """Abstract base class for metadata lookups.

    Implementations must tolerate concurrent calls from a thread pool.
    """

    @abstractmethod
    def fetch(self, point: SamplePoint) -> ImageMetadata:
        """Look up image metadata for a sample point.

        Args:
            point: The sample point

        Returns:
            Metadata for the point

        Raises:
            MetadataUnavailableError: If the lookup fails
        """
        pass


class FixtureMetadataClient(MetadataClient):
    """Answers metadata lookups from a CSV fixture (``point_id,available,capture_year,capture_month``)."""

    def __init__(self, answers: Dict[str, ImageMetadata]) -> None:
        self.answers = dict(answers)

    @classmethod
    def from_csv(cls, path: Path) -> "FixtureMetadataClient":
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
        for column in FIXTURE_COLUMNS:
            if column not in frame.columns:
                raise SchemaError(column, str(path))
        answers = {}
        for row in frame.to_dict(orient="records"):
            available = row["available"].strip().lower() in ("1", "true", "yes")
            answers[row["point_id"]] = ImageMetadata(
                point_id=row["point_id"],
                available=available,
                capture_year=int(row["capture_year"]) if available and row["capture_year"] else None,
                capture_month=int(row["capture_month"]) if available and row["capture_month"] else None,
            )
        return cls(answers)

    def fetch(self, point: SamplePoint) -> ImageMetadata:
        try:
            return self.answers[point.point_id]
        except KeyError:
            raise MetadataUnavailableError(point.point_id, "not present in fixture", retryable=False) from None


class StreetViewMetadataClient(MetadataClient):
    """Live client for the street-view metadata HTTP endpoint.

    Metadata requests are free of image quota; transient failures are retried with
    exponential backoff before a retryable MetadataUnavailableError is raised. A
    rejected request (bad key or parameters) fails at once and is not retryable.
    """

    UNAVAILABLE_STATUSES = ("ZERO_RESULTS", "NOT_FOUND")
    # A retry cannot change the answer for these
    REJECTED_STATUSES = ("REQUEST_DENIED", "INVALID_REQUEST")

    def __init__(
        self,
        api_key: str,
        url: str = METADATA_URL,
        timeout_s: float = 10.0,
        max_retries: int = 3,
        backoff_s: float = 0.5,
    ) -> None:
        """Initialize the live client.

        Args:
            api_key: API key sent as the ``key`` parameter
            url: Metadata endpoint
            timeout_s: Per-request timeout
            max_retries: Attempts after the first failure
            backoff_s: Initial backoff, doubled on every retry
        """
        if not api_key:
            raise ValueError("an API key is required for the live metadata client")
        self.api_key = api_key
        self.url = url
        self.timeout_s = timeout_s
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self._local = threading.local()

    def _session(self) -> requests.Session:
        # one session per worker thread
        session = getattr(self._local, "session", None)
        if session is None:
            session = requests.Session()
            self._local.session = session
        return session

    def _parse(self, point: SamplePoint, payload: dict) -> ImageMetadata:
        status = payload.get("status")
        if status in self.UNAVAILABLE_STATUSES:
            return ImageMetadata(point_id=point.point_id, available=False)
        if status in self.REJECTED_STATUSES:
            message = payload.get("error_message") or "request rejected"
            raise MetadataUnavailableError(point.point_id, f"status {status}: {message}", retryable=False)
        if status != "OK":
            raise MetadataUnavailableError(point.point_id, f"status {status}")
        year, month = None, None
        date = payload.get("date")
        if date:
            parts = str(date).split("-")
            year = int(parts[0])
            month = int(parts[1]) if len(parts) > 1 else None
        return ImageMetadata(point_id=point.point_id, available=True, capture_year=year, capture_month=month)

    def fetch(self, point: SamplePoint) -> ImageMetadata:
        params = {"location": f"{point.lat},{point.lon}", "key": self.api_key}
        delay = self.backoff_s
        last_error: Exception = RuntimeError("no attempt made")
        for attempt in range(self.max_retries + 1):
            try:
                response = self._session().get(self.url, params=params, timeout=self.timeout_s)
                response.raise_for_status()
                return self._parse(point, response.json())
            except (requests.RequestException, ValueError, MetadataUnavailableError) as exc:
                if isinstance(exc, MetadataUnavailableError) and not exc.retryable:
                    raise
                last_error = exc
                logger.debug("Metadata attempt %d for %s failed: %s", attempt + 1, point.point_id, exc)
                if attempt < self.max_retries:
                    time.sleep(delay)
                    delay *= 2
        raise MetadataUnavailableError(point.point_id, str(last_error))
