"""
IoU and greedy detection-to-ground-truth matching.
"""
from collections import defaultdict
from typing import Dict, List, Sequence, Tuple

from pydantic import BaseModel

from gsv_mode_share.detections.models import BBox, Detection, GroundTruthBox, VehicleClass

DEFAULT_IOU_THRESHOLD = 0.50


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two (x_min, y_min, x_max, y_max) rectangles."""
    ix = min(a[2], b[2]) - max(a[0], b[0])
    iy = min(a[3], b[3]) - max(a[1], b[1])
    if ix <= 0 or iy <= 0:
        return 0.0
    intersection = ix * iy
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - intersection
    return intersection / union


class MatchResult(BaseModel):
    """Per-class TP/FP flags ordered by descending confidence, plus ground-truth totals."""

    flags: Dict[VehicleClass, List[Tuple[float, bool]]]
    ground_truth: Dict[VehicleClass, int]

    def tp(self, cls: VehicleClass) -> int:
        return sum(1 for _, hit in self.flags.get(cls, []) if hit)

    def fp(self, cls: VehicleClass) -> int:
        return sum(1 for _, hit in self.flags.get(cls, []) if not hit)

    def fn(self, cls: VehicleClass) -> int:
        return self.ground_truth.get(cls, 0) - self.tp(cls)


def match_detections(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    iou_thr: float = DEFAULT_IOU_THRESHOLD,
    conf_thr: float = 0.25,
) -> MatchResult:
    """Greedily match detections to ground-truth boxes.

    Detections at or above ``conf_thr`` are visited in descending confidence (input
    order on ties). Each takes the unmatched ground truth of the same image and class
    with the highest IoU, provided it reaches ``iou_thr``; IoU ties go to the earlier
    ground truth. Matched detections are TP, the rest FP; unmatched ground truths are FN.

    Args:
        dets: Detections
        gts: Ground-truth boxes
        iou_thr: Minimum IoU for a match
        conf_thr: Minimum confidence for a detection to be evaluated

    Returns:
        MatchResult with flags per class
    """
    if not (0.0 <= iou_thr <= 1.0 and 0.0 <= conf_thr <= 1.0):
        raise ValueError("thresholds must lie in [0, 1]")

    pool: Dict[Tuple[str, VehicleClass], List[GroundTruthBox]] = defaultdict(list)
    for gt in gts:
        pool[(gt.image_id, gt.vehicle_class)].append(gt)
    matched: Dict[Tuple[str, VehicleClass], List[bool]] = {key: [False] * len(boxes) for key, boxes in pool.items()}

    kept = [det for det in dets if det.confidence >= conf_thr]
    ordered = sorted(kept, key=lambda det: -det.confidence)

    flags: Dict[VehicleClass, List[Tuple[float, bool]]] = {cls: [] for cls in VehicleClass}
    for det in ordered:
        key = (det.image_id, det.vehicle_class)
        best_index, best_iou = -1, -1.0
        for index, gt in enumerate(pool.get(key, [])):
            if matched[key][index]:
                continue
            overlap = iou(det.bbox, gt.bbox)
            if overlap > best_iou:
                best_index, best_iou = index, overlap
        hit = best_index >= 0 and best_iou > 0.0 and best_iou >= iou_thr
        if hit:
            matched[key][best_index] = True
        flags[det.vehicle_class].append((det.confidence, hit))

    totals = {cls: 0 for cls in VehicleClass}
    for gt in gts:
        totals[gt.vehicle_class] += 1
    return MatchResult(flags=flags, ground_truth=totals)
