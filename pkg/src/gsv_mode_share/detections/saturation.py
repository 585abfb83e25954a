"""
Detection-rate saturation as more images are sampled.
"""
from typing import List, Sequence, Tuple

import numpy as np

from gsv_mode_share.detections.aggregate import DEFAULT_CONF_THRESHOLD, per_image_counts
from gsv_mode_share.detections.models import Detection, VehicleClass


def saturation_from_counts(counts: Sequence[int], step: int) -> List[Tuple[int, float]]:
    """Cumulative detections per image, sampled every ``step`` images.

    Args:
        counts: Detections per image, in sampling order
        step: Sampling interval in images (>= 1)

    Returns:
        (images seen, cumulative detections / images seen) pairs
    """
    if step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    cumulative = np.cumsum(np.asarray(counts, dtype=float))
    return [(n, float(cumulative[n - 1] / n)) for n in range(step, len(cumulative) + 1, step)]


def saturation_curve(
    dets: Sequence[Detection],
    manifest: Sequence[str],
    vehicle_class: VehicleClass,
    step: int,
    conf_threshold: float = DEFAULT_CONF_THRESHOLD,
) -> List[Tuple[int, float]]:
    """Saturation series for one class, with images taken in manifest order."""
    return saturation_from_counts(per_image_counts(dets, manifest, vehicle_class, conf_threshold), step)
