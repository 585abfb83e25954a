"""
Shared fixtures for the GSV Mode Share tests.
"""
import json
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pytest
from scipy.special import expit

from gsv_mode_share.betareg import COVARIATES, DesignMatrix

# Published cycling coefficients and the interquartile covariate ranges of the training data
CYCLE_BETA = np.array([1.138, -0.39, -0.863])
COVARIATE_RANGES = ((81.0, 349.0), (72.0, 456.0), (2466.0, 4780.0))


def _simulate_raw(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.column_stack([rng.uniform(low, high, n) for low, high in COVARIATE_RANGES])


@pytest.fixture
def simulate_design() -> Callable[..., DesignMatrix]:
    """Factory for beta-distributed responses on log covariates drawn from the training ranges."""

    def make(
        n: int = 110,
        beta: Sequence[float] = tuple(CYCLE_BETA),
        phi: float = 30.0,
        seed: int = 0,
        intercept: bool = False,
        weights: Optional[Sequence[float]] = None,
    ) -> DesignMatrix:
        rng = np.random.default_rng(seed)
        x = np.log(_simulate_raw(rng, n))
        full = np.hstack([np.ones((n, 1)), x]) if intercept else x
        mu = expit(full @ np.asarray(beta, dtype=float))
        y = rng.beta(mu * phi, (1.0 - mu) * phi)
        y = np.clip(y, 1e-12, 1.0 - 1e-12)
        return DesignMatrix(
            x, y, COVARIATES, intercept=intercept, weights=weights, row_ids=[f"city{i:03d}" for i in range(n)]
        )

    return make


@pytest.fixture
def write_text(tmp_path: Path) -> Callable[[str, str], Path]:
    """Write a text file below the test's temporary directory."""

    def write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return path

    return write


def meridian_feature(edge_id: str, lon: float, lat0: float, length_m: float, vertices: int = 2) -> Dict:
    """A north-south LineString feature of the given length."""
    dlat = np.degrees(length_m / 6_371_008.8)
    lats = np.linspace(lat0, lat0 + dlat, vertices)
    return {
        "type": "Feature",
        "properties": {"edge_id": edge_id},
        "geometry": {"type": "LineString", "coordinates": [[lon, float(lat)] for lat in lats]},
    }


@pytest.fixture
def grid_network() -> Callable[..., Dict]:
    """Factory for a GeoJSON network of parallel north-south streets."""

    def make(n_edges: int = 10, edge_length_m: float = 1000.0, vertices: int = 3) -> Dict:
        features = [
            meridian_feature(f"e{i:03d}", 4.0 + 0.01 * i, 52.0, edge_length_m, vertices) for i in range(n_edges)
        ]
        return {"type": "FeatureCollection", "features": features}

    return make


@pytest.fixture
def write_geojson(tmp_path: Path) -> Callable[[str, Dict], Path]:
    def write(name: str, document: Dict) -> Path:
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return write


def square_ring(lon0: float, lat0: float, size_deg: float) -> List[Tuple[float, float]]:
    return [
        (lon0, lat0),
        (lon0 + size_deg, lat0),
        (lon0 + size_deg, lat0 + size_deg),
        (lon0, lat0 + size_deg),
        (lon0, lat0),
    ]


@pytest.fixture
def square() -> Callable[[float, float, float], List[Tuple[float, float]]]:
    """Closed (lon, lat) ring of a square cell."""
    return square_ring
