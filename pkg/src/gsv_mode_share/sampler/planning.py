"""
Image request planning: four camera headings per sample point.
"""
from typing import List, Sequence

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from gsv_mode_share.sampler.network import SamplePoint

HEADINGS = (0, 90, 180, 270)
DEFAULT_FOV = 90
DEFAULT_PITCH = 0
DEFAULT_SIZE = 640

PLAN_COLUMNS = ["point_id", "lat", "lon", "heading", "fov", "pitch", "width", "height"]


class ImageRequest(BaseModel):
    """One planned street-view image."""

    model_config = ConfigDict(frozen=True)

    point_id: str
    lat: float
    lon: float
    heading: int = Field(ge=0, lt=360)
    fov: int = DEFAULT_FOV
    pitch: int = DEFAULT_PITCH
    width: int = DEFAULT_SIZE
    height: int = DEFAULT_SIZE

    @property
    def image_id(self) -> str:
        return image_id(self.point_id, self.heading)


def image_id(point_id: str, heading: int) -> str:
    """Identifier shared by request plans, manifests and detection files."""
    return f"{point_id}_{heading}"


def plan_requests(points: Sequence[SamplePoint]) -> List[ImageRequest]:
    """Plan one request per heading (0, 90, 180, 270) for every point.

    With a 90° field of view the four headings tile the full circle.
    """
    return [
        ImageRequest(point_id=point.point_id, lat=point.lat, lon=point.lon, heading=heading)
        for point in points
        for heading in HEADINGS
    ]


def plan_frame(requests: Sequence[ImageRequest]) -> pd.DataFrame:
    """Tabulate a request plan with the published CSV columns."""
    return pd.DataFrame([request.model_dump() for request in requests], columns=PLAN_COLUMNS)


def points_frame(points: Sequence[SamplePoint]) -> pd.DataFrame:
    return pd.DataFrame(
        [point.model_dump() for point in points],
        columns=["point_id", "lat", "lon", "edge_id", "offset_m"],
    )
