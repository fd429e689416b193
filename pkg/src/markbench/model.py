"""Core value types for box-track annotation of paired frame sequences.

Everything here is an immutable value object: edits produce new instances
(``with_*`` / ``without_*`` helpers), so instances are safe to share across
threads without locking.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterable

SCHEMA_VERSION = 1


class BoxSource(str, Enum):
    """How a keyed box came to exist.

    Only ``manual`` and ``corrected`` boxes anchor interpolation; ``predicted``
    boxes are derived output and are regenerated at will.
    """

    MANUAL = "manual"
    PREDICTED = "predicted"
    CORRECTED = "corrected"


KEYPOINT_SOURCES = frozenset({BoxSource.MANUAL, BoxSource.CORRECTED})


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned integer rectangle covering columns [x1, x2) and rows [y1, y2).

    The right/bottom edges are exclusive, so area and overlap arithmetic are
    exact lattice-pixel counts. Construction does not validate: degenerate
    values are representable so that :func:`validate_box` can report them.
    """

    x1: int
    y1: int
    x2: int
    y2: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x1, self.y1, self.x2, self.y2)


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of :func:`validate_box`; ``reason`` is the first violated constraint."""

    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_box(box: BoundingBox, width: int, height: int) -> ValidationResult:
    """Check every box invariant against a frame geometry.

    Total function: never raises, returns the first violated constraint on
    rejection.
    """
    checks = (
        (box.x1 < box.x2, "x1 < x2 violated"),
        (box.y1 < box.y2, "y1 < y2 violated"),
        (box.x1 >= 0, "x1 >= 0 violated"),
        (box.y1 >= 0, "y1 >= 0 violated"),
        (box.x2 <= width, "x2 <= width violated"),
        (box.y2 <= height, "y2 <= height violated"),
    )
    for ok, reason in checks:
        if not ok:
            return ValidationResult(False, reason)
    return ValidationResult(True)


def box_area(box: BoundingBox) -> int:
    """Pixel count covered by a valid box: (x2-x1)*(y2-y1)."""
    return (box.x2 - box.x1) * (box.y2 - box.y1)


@dataclass(frozen=True)
class KeyedBox:
    """A box bound to a frame index, tagged with its provenance."""

    frame: int
    box: BoundingBox
    source: BoxSource
    box_id: str
    extras: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.frame < 0:
            raise ValueError(f"frame must be >= 0, got {self.frame}")
        object.__setattr__(self, "source", BoxSource(self.source))

    @property
    def is_keypoint(self) -> bool:
        return self.source in KEYPOINT_SOURCES


@dataclass(frozen=True)
class Track:
    """Per-frame annotation of one forged object, ordered by frame index.

    At most one box per frame: the boxes form a single trajectory, and frames
    with several forged objects carry several tracks.
    """

    track_id: str
    label: str = ""
    keyed_boxes: tuple[KeyedBox, ...] = ()
    extras: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "keyed_boxes", tuple(self.keyed_boxes))
        frames = [kb.frame for kb in self.keyed_boxes]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ValueError(
                f"track {self.track_id!r}: frame indices must be strictly increasing"
            )
        ids = [kb.box_id for kb in self.keyed_boxes]
        if len(set(ids)) != len(ids):
            raise ValueError(f"track {self.track_id!r}: duplicate box_id")

    def frames(self) -> tuple[int, ...]:
        return tuple(kb.frame for kb in self.keyed_boxes)

    def box_at(self, frame: int) -> KeyedBox | None:
        i = bisect.bisect_left(self.frames(), frame)
        if i < len(self.keyed_boxes) and self.keyed_boxes[i].frame == frame:
            return self.keyed_boxes[i]
        return None

    def keypoints(self) -> tuple[KeyedBox, ...]:
        """Boxes that anchor interpolation (manual or corrected)."""
        return tuple(kb for kb in self.keyed_boxes if kb.is_keypoint)

    def span(self) -> tuple[int, int] | None:
        """(first, last) keypoint frame, or None with fewer than one keypoint."""
        kps = self.keypoints()
        if not kps:
            return None
        return (kps[0].frame, kps[-1].frame)

    def with_box(self, keyed_box: KeyedBox) -> Track:
        """Insert, or replace the existing box at the same frame."""
        frames = self.frames()
        i = bisect.bisect_left(frames, keyed_box.frame)
        boxes = list(self.keyed_boxes)
        if i < len(boxes) and boxes[i].frame == keyed_box.frame:
            boxes[i] = keyed_box
        else:
            boxes.insert(i, keyed_box)
        return replace(self, keyed_boxes=tuple(boxes))

    def without_frame(self, frame: int) -> Track:
        boxes = tuple(kb for kb in self.keyed_boxes if kb.frame != frame)
        return replace(self, keyed_boxes=boxes)

    def without_box(self, box_id: str) -> Track:
        boxes = tuple(kb for kb in self.keyed_boxes if kb.box_id != box_id)
        return replace(self, keyed_boxes=boxes)


@dataclass(frozen=True)
class SequencePair:
    """Aligned original/forged decoded-frame sources sharing one geometry."""

    sequence_id: str
    original_source: str
    forged_source: str
    width: int
    height: int
    frame_count: int


@dataclass(frozen=True)
class AnnotationDocument:
    """All tracks for one sequence pair, with an edit counter for concurrency.

    ``version`` strictly increases on every mutation helper, which is what the
    service's optimistic locking compares against.
    """

    sequence_id: str
    schema_version: int = SCHEMA_VERSION
    version: int = 0
    tracks: tuple[Track, ...] = ()
    extras: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "tracks", tuple(self.tracks))
        ids = [t.track_id for t in self.tracks]
        if len(set(ids)) != len(ids):
            raise ValueError(f"document {self.sequence_id!r}: duplicate track_id")

    def track(self, track_id: str) -> Track | None:
        for t in self.tracks:
            if t.track_id == track_id:
                return t
        return None

    def with_track(self, track: Track) -> AnnotationDocument:
        """Insert or replace a track; bumps version."""
        tracks = list(self.tracks)
        for i, t in enumerate(tracks):
            if t.track_id == track.track_id:
                tracks[i] = track
                break
        else:
            tracks.append(track)
        return replace(self, tracks=tuple(tracks), version=self.version + 1)

    def upsert_box(
        self, track_id: str, keyed_box: KeyedBox, label: str = ""
    ) -> AnnotationDocument:
        """Put a box into a track (created if absent); bumps version."""
        track = self.track(track_id)
        if track is None:
            track = Track(track_id=track_id, label=label)
        return self.with_track(track.with_box(keyed_box))

    def delete_box(self, frame: int, box_id: str) -> AnnotationDocument:
        """Remove the box with ``box_id`` at ``frame``; bumps version.

        Tracks left empty are dropped. Raises KeyError when no such box exists.
        """
        for track in self.tracks:
            kb = track.box_at(frame)
            if kb is not None and kb.box_id == box_id:
                pruned = track.without_box(box_id)
                if pruned.keyed_boxes:
                    tracks = tuple(
                        pruned if t.track_id == track.track_id else t
                        for t in self.tracks
                    )
                else:
                    tracks = tuple(
                        t for t in self.tracks if t.track_id != track.track_id
                    )
                return replace(self, tracks=tracks, version=self.version + 1)
        raise KeyError(f"no box {box_id!r} at frame {frame}")

    def annotated_frames(self) -> set[int]:
        """Frames carrying at least one box, across all tracks."""
        frames: set[int] = set()
        for track in self.tracks:
            frames.update(track.frames())
        return frames

    def box_count(self, sources: Iterable[BoxSource] | None = None) -> int:
        wanted = None if sources is None else frozenset(BoxSource(s) for s in sources)
        n = 0
        for track in self.tracks:
            for kb in track.keyed_boxes:
                if wanted is None or kb.source in wanted:
                    n += 1
        return n


def validate_document(
    doc: AnnotationDocument, width: int, height: int
) -> list[str]:
    """All geometry violations in a document, one message per offending box."""
    problems = []
    for track in doc.tracks:
        for kb in track.keyed_boxes:
            result = validate_box(kb.box, width, height)
            if not result:
                problems.append(
                    f"track {track.track_id!r} frame {kb.frame}: {result.reason}"
                )
    return problems
