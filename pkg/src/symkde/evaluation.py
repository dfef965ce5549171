"""Benchmark protocol: match detected segments against ground truth.

A detection matches a ground-truth axis when the angle between the two
segments (orientations compared modulo pi) is below 10 degrees and the
distance between their centers is below 20% of the shorter segment's
length. Several detections may match the same ground-truth axis — each
counts as a true positive — but one detection never matches more than
once. Unmatched detections are false positives; ground-truth axes that no
detection matches are false negatives:

    precision = TP / (TP + FP)      recall = TP / (TP + FN)

with the empty-denominator convention that a rate with nothing to get
wrong is 1. Before matching, near-duplicate detections are clustered
greedily by score and only the strongest of each cluster survives. The
precision-recall curve sweeps one global score threshold across all
images.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

__all__ = [
    "GtAxis",
    "Detection",
    "MatchReport",
    "PrCurve",
    "segment_angle",
    "angular_distance_mod_pi",
    "axis_match",
    "match_axes",
    "cluster_detections",
    "report_at_threshold",
    "pr_curve",
]

DEFAULT_ANGLE_TOL_DEG = 10.0
DEFAULT_CENTER_TOL = 0.2


def _as_endpoints(arr) -> np.ndarray:
    ends = np.asarray(arr, dtype=np.float64)
    if ends.shape != (2, 2) or not np.isfinite(ends).all():
        raise InputError(f"segment endpoints must be a finite (2, 2) array: {ends}")
    return ends


def segment_angle(endpoints) -> float:
    """Direction of a segment folded into [0, pi)."""
    ends = np.asarray(endpoints, dtype=np.float64)
    delta = ends[1] - ends[0]
    return float(np.mod(math.atan2(delta[1], delta[0]), math.pi))


def angular_distance_mod_pi(a: float, b: float) -> float:
    """Distance between two orientations, each defined modulo pi."""
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


@dataclass(frozen=True)
class GtAxis:
    """Ground-truth mirror axis as a pixel-space segment."""

    endpoints: np.ndarray  # (2, 2) pixel coordinates

    def __post_init__(self):
        ends = _as_endpoints(self.endpoints)
        object.__setattr__(self, "endpoints", ends)
        if self.length <= 0.0:
            raise InputError(f"zero-length ground-truth axis: {ends}")

    @property
    def center(self) -> np.ndarray:
        return self.endpoints.mean(axis=0)

    @property
    def angle(self) -> float:
        return segment_angle(self.endpoints)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.endpoints[1] - self.endpoints[0]))


@dataclass(frozen=True)
class Detection:
    """Detected axis segment with its confidence score."""

    endpoints: np.ndarray  # (2, 2) pixel coordinates
    score: float

    def __post_init__(self):
        object.__setattr__(self, "endpoints", _as_endpoints(self.endpoints))

    @property
    def center(self) -> np.ndarray:
        return self.endpoints.mean(axis=0)

    @property
    def angle(self) -> float:
        return segment_angle(self.endpoints)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.endpoints[1] - self.endpoints[0]))


@dataclass(frozen=True)
class MatchReport:
    """Counts and rates at one operating point."""

    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        denom = self.tp + self.fp
        return self.tp / denom if denom else 1.0

    @property
    def recall(self) -> float:
        denom = self.tp + self.fn
        return self.tp / denom if denom else 1.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r) if (p + r) > 0.0 else 0.0


@dataclass(frozen=True)
class PrCurve:
    """Threshold sweep: one row per threshold, strictest first."""

    thresholds: np.ndarray
    precisions: np.ndarray
    recalls: np.ndarray

    @property
    def max_f1(self) -> float:
        return max(self.f1_values(), default=0.0)

    @property
    def max_f1_threshold(self) -> float:
        f1s = self.f1_values()
        best = int(np.argmax(f1s))
        return float(self.thresholds[best])

    def f1_values(self) -> list[float]:
        out = []
        for p, r in zip(self.precisions, self.recalls):
            out.append(2.0 * p * r / (p + r) if (p + r) > 0.0 else 0.0)
        return out


def axis_match(
    det: Detection,
    gt: GtAxis,
    angle_tol_deg: float = DEFAULT_ANGLE_TOL_DEG,
    center_tol: float = DEFAULT_CENTER_TOL,
) -> bool:
    """True when the segments agree in orientation and center position."""
    ang = angular_distance_mod_pi(det.angle, gt.angle)
    if ang >= math.radians(angle_tol_deg):
        return False
    center_dist = float(np.linalg.norm(det.center - gt.center))
    return center_dist < center_tol * min(det.length, gt.length)


def match_axes(
    detections,
    gts,
    angle_tol_deg: float = DEFAULT_ANGLE_TOL_DEG,
    center_tol: float = DEFAULT_CENTER_TOL,
) -> MatchReport:
    """Count TP/FP/FN for one image.

    Detections are processed in score order (descending; stable for equal
    scores). A detection counts once even when several ground-truth axes
    would accept it; a ground-truth axis is satisfied by any number of
    detections.
    """
    order = sorted(range(len(detections)), key=lambda i: -detections[i].score)
    gt_hit = [False] * len(gts)
    tp = fp = 0
    for i in order:
        det = detections[i]
        best = None
        best_key = None
        for j, gt in enumerate(gts):
            if not axis_match(det, gt, angle_tol_deg, center_tol):
                continue
            key = (
                angular_distance_mod_pi(det.angle, gt.angle),
                float(np.linalg.norm(det.center - gt.center)),
            )
            if best_key is None or key < best_key:
                best, best_key = j, key
        if best is None:
            fp += 1
        else:
            tp += 1
            gt_hit[best] = True
    # A ground-truth axis is recalled if *any* detection matches it, even
    # one whose best assignment went elsewhere.
    for j, gt in enumerate(gts):
        if gt_hit[j]:
            continue
        for i in order:
            if axis_match(detections[i], gt, angle_tol_deg, center_tol):
                gt_hit[j] = True
                break
    fn = gt_hit.count(False)
    return MatchReport(tp=tp, fp=fp, fn=fn)


def cluster_detections(
    detections,
    angle_tol_deg: float = DEFAULT_ANGLE_TOL_DEG,
    center_tol: float = DEFAULT_CENTER_TOL,
):
    """Merge near-duplicate detections, keeping each cluster's strongest.

    Greedy: the strongest unclaimed detection seeds a cluster and absorbs
    every remaining detection within the angle tolerance whose center lies
    closer than ``center_tol`` times the shorter of the two lengths.
    """
    order = sorted(range(len(detections)), key=lambda i: -detections[i].score)
    claimed = [False] * len(detections)
    kept = []
    for i in order:
        if claimed[i]:
            continue
        seed = detections[i]
        claimed[i] = True
        kept.append(seed)
        for j in order:
            if claimed[j]:
                continue
            other = detections[j]
            ang = angular_distance_mod_pi(seed.angle, other.angle)
            if ang >= math.radians(angle_tol_deg):
                continue
            center_dist = float(np.linalg.norm(seed.center - other.center))
            if center_dist < center_tol * min(seed.length, other.length):
                claimed[j] = True
    return kept


def report_at_threshold(
    per_image,
    threshold: float,
    angle_tol_deg: float = DEFAULT_ANGLE_TOL_DEG,
    center_tol: float = DEFAULT_CENTER_TOL,
) -> MatchReport:
    """Aggregate counts over images keeping detections scoring >= threshold.

    ``per_image`` is a sequence of (detections, ground_truths) pairs.
    Surviving detections are clustered per image before matching.
    """
    tp = fp = fn = 0
    for dets, gts in per_image:
        kept = [d for d in dets if d.score >= threshold]
        kept = cluster_detections(kept, angle_tol_deg, center_tol)
        r = match_axes(kept, gts, angle_tol_deg, center_tol)
        tp, fp, fn = tp + r.tp, fp + r.fp, fn + r.fn
    return MatchReport(tp=tp, fp=fp, fn=fn)


def pr_curve(
    per_image,
    angle_tol_deg: float = DEFAULT_ANGLE_TOL_DEG,
    center_tol: float = DEFAULT_CENTER_TOL,
) -> PrCurve:
    """Precision-recall curve over a global score-threshold sweep.

    Thresholds are the distinct detection scores, strictest first, with a
    leading above-all-scores row so the curve always starts at recall 0
    (and precision 1 by the empty-denominator convention).
    """
    if not any(len(gts) for _, gts in per_image):
        raise InputError("benchmark has no ground-truth axes to match against")
    scores = sorted({float(d.score) for dets, _ in per_image for d in dets})
    thresholds = [math.inf] + scores[::-1]
    precisions, recalls = [], []
    for t in thresholds:
        r = report_at_threshold(per_image, t, angle_tol_deg, center_tol)
        precisions.append(r.precision)
        recalls.append(r.recall)
    return PrCurve(
        thresholds=np.array(thresholds),
        precisions=np.array(precisions),
        recalls=np.array(recalls),
    )
