"""Scoring interpolated tracks and suggesting keypoint frames.

Quantifies the accuracy-vs-effort trade: more keypoints track the reference
more closely but cost more annotator time. Suggestion uses farthest-point
subdivision (polyline-simplification style): interpolate a segment from its
endpoints, promote the worst-deviating interior frame to a keypoint when it
exceeds the tolerance, recurse on both halves.

The subdivision metric is the maximum absolute corner deviation in pixels,
matching the coordinate-wise interpolation; IoU is reported alongside but
never drives subdivision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .interpolate import interpolate_box
from .model import BoundingBox, Track, box_area


@dataclass(frozen=True)
class TrackMetrics:
    """Agreement between a predicted and a reference per-frame track."""

    mean_iou: float
    min_iou: float
    max_corner_error: int
    frames_compared: int


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two valid half-open boxes; 0 when disjoint."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = box_area(a) + box_area(b) - inter
    return inter / union


def corner_error(a: BoundingBox, b: BoundingBox) -> int:
    """Largest absolute per-coordinate difference, in pixels."""
    return max(
        abs(a.x1 - b.x1), abs(a.y1 - b.y1), abs(a.x2 - b.x2), abs(a.y2 - b.y2)
    )


def boxes_by_frame(track: Track) -> dict[int, BoundingBox]:
    """Track as a frame -> box mapping (tracks hold one box per frame)."""
    return {kb.frame: kb.box for kb in track.keyed_boxes}


def evaluate_track(
    predicted: Mapping[int, BoundingBox], reference: Mapping[int, BoundingBox]
) -> TrackMetrics:
    """Metrics over all frames; both mappings must cover the same frames."""
    mismatched = sorted(set(predicted) ^ set(reference))
    if mismatched:
        frame = mismatched[0]
        side = "predicted" if frame not in predicted else "reference"
        raise ValueError(f"frame {frame} missing from {side}")
    if not reference:
        raise ValueError("no frames to compare")
    ious = []
    worst = 0
    for frame in sorted(reference):
        ious.append(iou(predicted[frame], reference[frame]))
        worst = max(worst, corner_error(predicted[frame], reference[frame]))
    return TrackMetrics(
        mean_iou=sum(ious) / len(ious),
        min_iou=min(ious),
        max_corner_error=worst,
        frames_compared=len(ious),
    )


def interpolate_from_keypoints(
    reference: Mapping[int, BoundingBox], keypoints: list[int]
) -> dict[int, BoundingBox]:
    """Per-frame boxes obtained by interpolating between consecutive keypoints."""
    out: dict[int, BoundingBox] = {keypoints[0]: reference[keypoints[0]]}
    for m, n in zip(keypoints, keypoints[1:]):
        for k in range(m + 1, n):
            out[k] = interpolate_box(m, reference[m], n, reference[n], k)
        out[n] = reference[n]
    return out


def suggest_keypoints(
    reference: Mapping[int, BoundingBox], tolerance: float
) -> list[int]:
    """Frames to annotate manually so interpolation stays within tolerance.

    Always contains the first and last frame. The returned set is verified:
    re-interpolating from it must keep every frame's corner deviation at or
    below ``tolerance``, which holds by construction of the subdivision.
    """
    if tolerance < 0:
        raise ValueError(f"tolerance must be >= 0, got {tolerance}")
    frames = sorted(reference)
    if len(frames) < 2:
        raise ValueError("range too short: need at least 2 reference frames")
    first, last = frames[0], frames[-1]
    if frames != list(range(first, last + 1)):
        missing = next(f for f in range(first, last + 1) if f not in reference)
        raise ValueError(f"reference frames must be contiguous; frame {missing} missing")

    chosen = {first, last}
    stack = [(first, last)]
    while stack:
        a, b = stack.pop()
        worst_frame, worst_dev = a, -1
        for k in range(a + 1, b):
            dev = corner_error(
                interpolate_box(a, reference[a], b, reference[b], k), reference[k]
            )
            if dev > worst_dev:  # strict: ties keep the lower frame index
                worst_frame, worst_dev = k, dev
        if worst_dev > tolerance:
            chosen.add(worst_frame)
            stack.append((a, worst_frame))
            stack.append((worst_frame, b))

    keypoints = sorted(chosen)
    rebuilt = interpolate_from_keypoints(reference, keypoints)
    check = evaluate_track(rebuilt, reference)
    if check.max_corner_error > tolerance:
        raise RuntimeError(
            f"suggested keypoints miss tolerance: "
            f"{check.max_corner_error} > {tolerance}"
        )
    return keypoints
