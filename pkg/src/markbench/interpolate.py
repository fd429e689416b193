"""Linear prediction of boxes between keypoint frames.

Each of the four box coordinates moves on a straight line between its values
at two keypoint frames m < n:

    c(k) = c(m) + (c(n) - c(m)) * (k - m) / (n - m)

The division is carried out in exact integer rationals and rounded to the
nearest integer, ties away from zero. That rule is symmetric under coordinate
reflection and reproducible across platforms, unlike binary-float rounding at
.5 ties.

A track with keypoints {S, C1..Cn, E} is completed segment by segment: start
at S, predict the interior of each consecutive keypoint interval, advance the
segment start to that keypoint, repeat until E.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .model import BoundingBox, BoxSource, KeyedBox, Track


class InterpolationRangeError(ValueError):
    """Frame arguments violate m < n or m <= k <= n."""


class InsufficientKeypointsError(ValueError):
    """A track needs at least two manual/corrected boxes to interpolate."""

    def __init__(self, track_id: str, count: int):
        self.track_id = track_id
        self.count = count
        super().__init__(
            f"track {track_id!r} has {count} keypoint(s); interpolation needs >= 2"
        )


def round_half_away(num: int, den: int) -> int:
    """Nearest integer to num/den, .5 ties away from zero. Requires den > 0."""
    if den <= 0:
        raise ValueError(f"den must be > 0, got {den}")
    if num >= 0:
        return (2 * num + den) // (2 * den)
    return -((-2 * num + den) // (2 * den))


def _lerp(a: int, b: int, k_m: int, n_m: int) -> int:
    # a + (b - a) * (k - m) / (n - m), evaluated as one exact rational.
    return round_half_away(a * n_m + (b - a) * k_m, n_m)


def interpolate_box(
    m: int, box_m: BoundingBox, n: int, box_n: BoundingBox, k: int
) -> BoundingBox:
    """Predict the box at frame k from keypoint boxes at frames m and n.

    Endpoints are returned exactly: k=m gives box_m, k=n gives box_n.
    """
    if m >= n:
        raise InterpolationRangeError(f"m={m} must be less than n={n}")
    if not m <= k <= n:
        raise InterpolationRangeError(f"k={k} outside [m={m}, n={n}]")
    if k == m:
        return box_m
    if k == n:
        return box_n
    k_m, n_m = k - m, n - m
    out = BoundingBox(
        x1=_lerp(box_m.x1, box_n.x1, k_m, n_m),
        y1=_lerp(box_m.y1, box_n.y1, k_m, n_m),
        x2=_lerp(box_m.x2, box_n.x2, k_m, n_m),
        y2=_lerp(box_m.y2, box_n.y2, k_m, n_m),
    )
    # Convexity keeps every coordinate inside its endpoint interval, and both
    # endpoint widths/heights are >= 1, so rounding cannot collapse the box.
    assert out.x1 < out.x2 and out.y1 < out.y2
    return out


@dataclass(frozen=True)
class Segment:
    """Two consecutive keypoints bounding one interpolation interval."""

    start: KeyedBox
    end: KeyedBox

    def __post_init__(self) -> None:
        if self.start.frame >= self.end.frame:
            raise ValueError(
                f"segment start frame {self.start.frame} must precede "
                f"end frame {self.end.frame}"
            )
        for kb in (self.start, self.end):
            if not kb.is_keypoint:
                raise ValueError(
                    f"segment endpoints must be manual/corrected, "
                    f"got {kb.source.value} at frame {kb.frame}"
                )


def predicted_box_id(frame: int) -> str:
    """Deterministic id for a predicted box; unique per frame within a track."""
    return f"pred-{frame:06d}"


def predict_segment(seg: Segment) -> list[KeyedBox]:
    """Predicted boxes for every interior frame of a segment, in frame order.

    Adjacent keypoints yield an empty list; otherwise exactly
    end.frame - start.frame - 1 boxes, all tagged ``predicted``.
    """
    out = []
    for k in range(seg.start.frame + 1, seg.end.frame):
        box = interpolate_box(
            seg.start.frame, seg.start.box, seg.end.frame, seg.end.box, k
        )
        out.append(
            KeyedBox(
                frame=k,
                box=box,
                source=BoxSource.PREDICTED,
                box_id=predicted_box_id(k),
            )
        )
    return out


def segments(track: Track) -> list[Segment]:
    """Consecutive-keypoint segments partitioning the track span.

    Neighbouring segments share exactly their boundary keypoint.
    """
    kps = track.keypoints()
    if len(kps) < 2:
        raise InsufficientKeypointsError(track.track_id, len(kps))
    return [Segment(a, b) for a, b in zip(kps, kps[1:])]


def predict_track(track: Track) -> Track:
    """Complete a track: one box per frame across its keypoint span.

    Keypoint boxes pass through untouched; any previously predicted boxes are
    discarded and regenerated, so corrections (which are keypoints) reshape
    their neighbouring segments on the next call.
    """
    kps = track.keypoints()
    if len(kps) < 2:
        raise InsufficientKeypointsError(track.track_id, len(kps))
    boxes: list[KeyedBox] = [kps[0]]
    start = kps[0]
    for end in kps[1:]:
        boxes.extend(predict_segment(Segment(start, end)))
        boxes.append(end)
        start = end
    return replace(track, keyed_boxes=tuple(boxes))
