"""
Boundaries, population grids and zonal density for GSV Mode Share.
"""
import math
from typing import List, Sequence, Tuple

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Polygon

from gsv_mode_share.errors import EmptyCoverageError, GeometryError

# WGS84 mean radius (metres)
EARTH_RADIUS_M = 6_371_008.8

LonLat = Tuple[float, float]
Ring = List[LonLat]


def ring_area_m2(ring: Sequence[LonLat]) -> float:
    """Unsigned area of a closed lon/lat ring on the mean-radius sphere.

    Args:
        ring: Closed ring of (lon, lat) vertices in degrees

    Returns:
        Area in square metres
    """
    coords = np.radians(np.asarray(ring, dtype=float)[:-1])
    if len(coords) < 3:
        return 0.0
    lon, lat = coords[:, 0], coords[:, 1]
    # sum of (lon[i+1] - lon[i-1]) * sin(lat[i])
    total = np.sum((np.roll(lon, -1) - np.roll(lon, 1)) * np.sin(lat))
    return abs(total) * EARTH_RADIUS_M**2 / 2.0


def polygon_area_km2(rings: Sequence[Sequence[LonLat]]) -> float:
    """Area of one polygon (exterior ring first, then holes) in km²."""
    if not rings:
        raise GeometryError("polygon has no rings")
    return (ring_area_m2(rings[0]) - sum(ring_area_m2(hole) for hole in rings[1:])) / 1e6


def _check_ring(ring: Sequence[LonLat]) -> Ring:
    if len(ring) < 4:
        raise GeometryError(f"ring needs at least 4 vertices, got {len(ring)}")
    vertices = [(float(lon), float(lat)) for lon, lat in ring]
    if vertices[0] != vertices[-1]:
        raise GeometryError("ring is not closed (first vertex differs from last)")
    for lon, lat in vertices:
        if not (-180.0 <= lon <= 180.0 and -90.0 <= lat <= 90.0):
            raise GeometryError(f"vertex ({lon}, {lat}) outside WGS84 ranges")
    return vertices


class Boundary:
    """A city boundary made of one or more polygons with optional holes."""

    def __init__(self, polygons: Sequence[Sequence[Sequence[LonLat]]]) -> None:
        """Initialize a boundary.

        Args:
            polygons: One entry per polygon; each entry is a list of rings,
                the exterior first followed by any holes

        Raises:
            GeometryError: If a ring is open or the total area is not positive
        """
        if not polygons:
            raise GeometryError("boundary has no polygons")
        self.polygons: List[List[Ring]] = [[_check_ring(ring) for ring in rings] for rings in polygons]
        self.area_km2 = sum(polygon_area_km2(rings) for rings in self.polygons)
        if self.area_km2 <= 0:
            raise GeometryError("boundary area must be positive")
        self.shape = MultiPolygon([Polygon(rings[0], rings[1:]) for rings in self.polygons])
        shapely.prepare(self.shape)

    def contains(self, lons: np.ndarray, lats: np.ndarray) -> np.ndarray:
        """Vectorized point-in-polygon test; points on the edge count as outside."""
        return shapely.contains_xy(self.shape, lons, lats)

    def centroid(self) -> Tuple[float, float]:
        """Return the (lat, lon) of the planar centroid."""
        point = self.shape.centroid
        return point.y, point.x

    def __str__(self) -> str:
        return f"Boundary with {len(self.polygons)} polygon(s), {self.area_km2:.2f} km²"


class PopulationGrid:
    """Gridded population counts referenced by cell centroid."""

    def __init__(self, cell_size_m: float, cells: Sequence[Tuple[float, float, float]]) -> None:
        """Initialize a population grid.

        Args:
            cell_size_m: Grid resolution in metres
            cells: (centroid lat, centroid lon, person count) triples
        """
        if not (cell_size_m > 0 and math.isfinite(cell_size_m)):
            raise GeometryError(f"cell_size_m must be positive, got {cell_size_m}")
        array = np.asarray(cells, dtype=float).reshape(-1, 3)
        if np.any(array[:, 2] < 0):
            raise GeometryError("population counts must be non-negative")
        self.cell_size_m = float(cell_size_m)
        self.lats = array[:, 0]
        self.lons = array[:, 1]
        self.counts = array[:, 2]

    def __len__(self) -> int:
        return len(self.counts)


def population_inside(grid: PopulationGrid, boundary: Boundary) -> float:
    """Sum of person counts for cells whose centroid lies inside the boundary.

    Raises:
        EmptyCoverageError: If no centroid falls inside
    """
    inside = boundary.contains(grid.lons, grid.lats)
    if not inside.any():
        raise EmptyCoverageError("no population cell centroid lies inside the boundary")
    return float(np.sum(grid.counts[inside]))


def compute_population_density(grid: PopulationGrid, boundary: Boundary) -> float:
    """Persons per km² within a boundary.

    Args:
        grid: Population grid
        boundary: City boundary

    Returns:
        Population of the covered cells divided by the boundary area
    """
    return population_inside(grid, boundary) / boundary.area_km2
