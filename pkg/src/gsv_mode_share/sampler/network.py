"""
Road networks and point sampling along them.
"""
import json
import logging
import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from gsv_mode_share.dataset.geometry import EARTH_RADIUS_M
from gsv_mode_share.errors import EmptyNetworkError, GeometryError

logger = logging.getLogger(__name__)

LatLon = Tuple[float, float]

MIN_SPACING_M = 20.0
MAX_SPACING_M = 100.0
DEFAULT_SPACING_M = 50.0
DEFAULT_MAX_POINTS = 2000

# Candidates closer than this to an edge end are not placed
_END_TOLERANCE_M = 1e-6


def haversine(a: LatLon, b: LatLon) -> float:
    """Great-circle distance in metres between two (lat, lon) points."""
    lat1, lon1 = math.radians(a[0]), math.radians(a[1])
    lat2, lon2 = math.radians(b[0]), math.radians(b[1])
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


class RoadEdge:
    """A single polyline of the road network."""

    def __init__(self, edge_id: str, vertices: Sequence[LatLon]) -> None:
        """Initialize an edge.

        Args:
            edge_id: Identifier of the edge
            vertices: (lat, lon) vertices in WGS84 degrees

        Raises:
            GeometryError: If the polyline has fewer than 2 vertices or zero length
        """
        if len(vertices) < 2:
            raise GeometryError(f"edge {edge_id} needs at least 2 vertices")
        self.edge_id = edge_id
        self.vertices = [(float(lat), float(lon)) for lat, lon in vertices]
        segment_lengths = [haversine(p, q) for p, q in zip(self.vertices, self.vertices[1:])]
        self.cumulative = np.concatenate([[0.0], np.cumsum(segment_lengths)])
        self.length_m = float(self.cumulative[-1])
        if self.length_m <= 0:
            raise GeometryError(f"edge {edge_id} has zero length")

    def locate(self, offset_m: float) -> LatLon:
        """Return the (lat, lon) at a distance along the edge."""
        offset_m = min(max(offset_m, 0.0), self.length_m)
        segment = int(np.searchsorted(self.cumulative, offset_m, side="right")) - 1
        segment = min(segment, len(self.vertices) - 2)
        start, end = self.cumulative[segment], self.cumulative[segment + 1]
        fraction = 0.0 if end == start else (offset_m - start) / (end - start)
        (lat1, lon1), (lat2, lon2) = self.vertices[segment], self.vertices[segment + 1]
        return lat1 + fraction * (lat2 - lat1), lon1 + fraction * (lon2 - lon1)

    def __str__(self) -> str:
        return f"Edge {self.edge_id} ({self.length_m:.1f} m)"


class RoadNetwork:
    """A city's road network as a list of edges."""

    def __init__(self, edges: Sequence[RoadEdge]) -> None:
        self.edges = list(edges)
        ids = [edge.edge_id for edge in self.edges]
        if len(set(ids)) != len(ids):
            raise GeometryError("edge ids must be unique")

    @property
    def length_m(self) -> float:
        return sum(edge.length_m for edge in self.edges)

    def __len__(self) -> int:
        return len(self.edges)


class SamplePoint(BaseModel):
    """A geocoordinate on the road network."""

    model_config = ConfigDict(frozen=True)

    point_id: str
    lat: float = Field(ge=-90.0, le=90.0)
    lon: float = Field(ge=-180.0, le=180.0)
    edge_id: str
    offset_m: float = Field(ge=0.0)


def load_road_network(path: Path) -> RoadNetwork:
    """Load a GeoJSON FeatureCollection of LineString features with an ``edge_id`` property.

    MultiLineString parts become separate edges suffixed ``/<part>``.
    """
    with open(path, encoding="utf-8") as handle:
        document = json.load(handle)
    edges: List[RoadEdge] = []
    for feature in document.get("features", []):
        properties = feature.get("properties") or {}
        if "edge_id" not in properties:
            raise GeometryError(f"road feature without edge_id in {path}")
        edge_id = str(properties["edge_id"])
        geometry = feature["geometry"]
        if geometry["type"] == "LineString":
            parts = [geometry["coordinates"]]
        elif geometry["type"] == "MultiLineString":
            parts = geometry["coordinates"]
        else:
            raise GeometryError(f"unsupported road geometry '{geometry['type']}' for edge {edge_id}")
        for index, coords in enumerate(parts):
            part_id = edge_id if len(parts) == 1 else f"{edge_id}/{index}"
            edges.append(RoadEdge(part_id, [(lat, lon) for lon, lat, *_ in coords]))
    return RoadNetwork(edges)


def _edge_offsets(length_m: float, spacing_m: float, start_m: float) -> np.ndarray:
    if length_m < spacing_m:
        return np.array([length_m / 2.0])
    count = math.ceil((length_m - start_m - _END_TOLERANCE_M) / spacing_m)
    return start_m + spacing_m * np.arange(max(count, 1))


def _fisher_yates_select(rng: np.random.Generator, total: int, size: int) -> np.ndarray:
    """Pick ``size`` distinct indices by a partial Fisher-Yates shuffle, returned sorted."""
    indices = np.arange(total)
    for i in range(size):
        j = int(rng.integers(i, total))
        indices[i], indices[j] = indices[j], indices[i]
    return np.sort(indices[:size])


def sample_points(
    network: RoadNetwork,
    spacing_m: float = DEFAULT_SPACING_M,
    max_points: int = DEFAULT_MAX_POINTS,
    seed: int = 0,
    start_offset_m: Optional[float] = None,
) -> List[SamplePoint]:
    """Place sample points along every edge at fixed arc-length spacing.

    Each edge starts at a seeded random offset in [0, spacing) unless
    ``start_offset_m`` pins it; edges shorter than the spacing get their midpoint.
    When there are more candidates than ``max_points`` a seeded uniform subset of
    exactly ``max_points`` is kept, in candidate order.

    Args:
        network: Road network
        spacing_m: Arc-length spacing in [20, 100] metres
        max_points: Upper bound on returned points
        seed: Random seed
        start_offset_m: Optional fixed start offset for every edge

    Returns:
        Sample points, deterministic for fixed inputs

    Raises:
        EmptyNetworkError: If the network has no edges
        ValueError: If spacing or start offset are out of range
    """
    if not (MIN_SPACING_M <= spacing_m <= MAX_SPACING_M):
        raise ValueError(f"spacing_m must lie in [{MIN_SPACING_M}, {MAX_SPACING_M}], got {spacing_m}")
    if start_offset_m is not None and not (0.0 <= start_offset_m < spacing_m):
        raise ValueError(f"start_offset_m must lie in [0, spacing_m), got {start_offset_m}")
    if max_points < 1:
        raise ValueError(f"max_points must be positive, got {max_points}")
    if len(network) == 0:
        raise EmptyNetworkError("road network has no edges")

    rng = np.random.default_rng(seed)
    candidates: List[SamplePoint] = []
    for edge in network.edges:
        start = start_offset_m if start_offset_m is not None else float(rng.uniform(0.0, spacing_m))
        for k, offset in enumerate(_edge_offsets(edge.length_m, spacing_m, start)):
            lat, lon = edge.locate(float(offset))
            candidates.append(
                SamplePoint(point_id=f"{edge.edge_id}-{k}", lat=lat, lon=lon, edge_id=edge.edge_id, offset_m=float(offset))
            )

    logger.info("Placed %d candidate points on %d edges", len(candidates), len(network))
    if len(candidates) <= max_points:
        return candidates
    keep = _fisher_yates_select(rng, len(candidates), max_points)
    return [candidates[i] for i in keep]
