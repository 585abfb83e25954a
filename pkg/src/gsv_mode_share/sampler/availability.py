"""
Image availability filtering and capture-date summaries.
"""
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Sequence, Tuple

import pandas as pd
from pydantic import BaseModel

from gsv_mode_share.sampler.clients import ImageMetadata, MetadataClient
from gsv_mode_share.sampler.network import SamplePoint

logger = logging.getLogger(__name__)


def filter_by_availability(
    points: Sequence[SamplePoint],
    client: MetadataClient,
    workers: int = 1,
) -> Tuple[List[SamplePoint], List[ImageMetadata]]:
    """Keep the points that have an image, as reported by the metadata client.

    Lookups may run concurrently; results are merged back in input order.

    Args:
        points: Candidate sample points
        client: Metadata client
        workers: Number of concurrent lookups

    Returns:
        The kept points (input order) and the metadata for every input point

    Raises:
        MetadataUnavailableError: If any lookup fails; carries the point id
    """
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            metadata = list(pool.map(client.fetch, points))
    else:
        metadata = [client.fetch(point) for point in points]
    kept = [point for point, meta in zip(points, metadata) if meta.available]
    logger.info("%d of %d sample points have imagery", len(kept), len(points))
    return kept, metadata


class CaptureYearSummary(BaseModel):
    """Distribution of image capture years for one city."""

    years: Dict[int, int]
    split_year: int
    up_to_split: int
    after_split: int
    undated: int


def summarize_capture_years(metadata: Sequence[ImageMetadata], split_year: int = 2018) -> CaptureYearSummary:
    """Count available images per capture year and around a split year."""
    dated = [m.capture_year for m in metadata if m.available and m.capture_year is not None]
    undated = sum(1 for m in metadata if m.available and m.capture_year is None)
    counts = Counter(dated)
    return CaptureYearSummary(
        years=dict(sorted(counts.items())),
        split_year=split_year,
        up_to_split=sum(n for year, n in counts.items() if year <= split_year),
        after_split=sum(n for year, n in counts.items() if year > split_year),
        undated=undated,
    )


def metadata_frame(metadata: Sequence[ImageMetadata]) -> pd.DataFrame:
    """Tabulate metadata in the fixture CSV layout."""
    rows = [
        {
            "point_id": m.point_id,
            "available": "true" if m.available else "false",
            "capture_year": "" if m.capture_year is None else str(m.capture_year),
            "capture_month": "" if m.capture_month is None else str(m.capture_month),
        }
        for m in metadata
    ]
    return pd.DataFrame(rows, columns=["point_id", "available", "capture_year", "capture_month"])
