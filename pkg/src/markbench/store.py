"""Persistence, CSV interchange, and corpus statistics.

The canonical document format is UTF-8 JSON with ``schema_version`` 1:

    {
      "schema_version": 1,
      "sequence_id": "...",
      "version": 7,
      "tracks": [
        {"track_id": "...", "label": "...",
         "boxes": [{"frame": 0, "x1": 0, "y1": 0, "x2": 10, "y2": 10,
                    "source": "manual", "box_id": "..."}, ...]}
      ]
    }

Unknown fields at any level survive a load/save round-trip, so documents from
newer minor revisions are not silently stripped. CSV is export-only.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable

from .model import (
    SCHEMA_VERSION,
    AnnotationDocument,
    BoundingBox,
    BoxSource,
    KeyedBox,
    SequencePair,
    Track,
)

CSV_HEADER = "sequence_id,track_id,frame,x1,y1,x2,y2,source"

_BOX_FIELDS = ("frame", "x1", "y1", "x2", "y2", "source", "box_id")
_TRACK_FIELDS = ("track_id", "label", "boxes")
_DOC_FIELDS = ("schema_version", "sequence_id", "version", "tracks")


class DocumentFormatError(ValueError):
    """Structurally invalid document; the message names the offending path."""


class UnsupportedSchemaVersion(DocumentFormatError):
    pass


def _require(data: dict, key: str, kind: type, path: str) -> Any:
    if key not in data:
        raise DocumentFormatError(f"{path}.{key}: missing")
    value = data[key]
    bool_as_int = kind is int and isinstance(value, bool)
    if bool_as_int or not isinstance(value, kind):
        raise DocumentFormatError(
            f"{path}.{key}: expected {kind.__name__}, got {type(value).__name__}"
        )
    return value


def _box_to_dict(kb: KeyedBox) -> dict[str, Any]:
    row = {
        "frame": kb.frame,
        "x1": kb.box.x1,
        "y1": kb.box.y1,
        "x2": kb.box.x2,
        "y2": kb.box.y2,
        "source": kb.source.value,
        "box_id": kb.box_id,
    }
    row.update(kb.extras)
    return row


def _box_from_dict(data: dict, path: str) -> KeyedBox:
    frame = _require(data, "frame", int, path)
    coords = {k: _require(data, k, int, path) for k in ("x1", "y1", "x2", "y2")}
    source = _require(data, "source", str, path)
    box_id = _require(data, "box_id", str, path)
    try:
        parsed = BoxSource(source)
    except ValueError:
        raise DocumentFormatError(f"{path}.source: unknown source {source!r}") from None
    extras = {k: v for k, v in data.items() if k not in _BOX_FIELDS}
    try:
        return KeyedBox(
            frame=frame,
            box=BoundingBox(**coords),
            source=parsed,
            box_id=box_id,
            extras=extras,
        )
    except ValueError as exc:
        raise DocumentFormatError(f"{path}: {exc}") from exc


def _track_to_dict(track: Track) -> dict[str, Any]:
    entry = {
        "track_id": track.track_id,
        "label": track.label,
        "boxes": [_box_to_dict(kb) for kb in track.keyed_boxes],
    }
    entry.update(track.extras)
    return entry


def _track_from_dict(data: dict, path: str) -> Track:
    track_id = _require(data, "track_id", str, path)
    label = _require(data, "label", str, path)
    boxes_raw = _require(data, "boxes", list, path)
    boxes = []
    for j, raw in enumerate(boxes_raw):
        if not isinstance(raw, dict):
            raise DocumentFormatError(f"{path}.boxes[{j}]: expected object")
        boxes.append(_box_from_dict(raw, f"{path}.boxes[{j}]"))
    extras = {k: v for k, v in data.items() if k not in _TRACK_FIELDS}
    try:
        return Track(track_id=track_id, label=label, keyed_boxes=tuple(boxes), extras=extras)
    except ValueError as exc:
        raise DocumentFormatError(f"{path}: {exc}") from exc


def document_to_dict(doc: AnnotationDocument) -> dict[str, Any]:
    data = {
        "schema_version": doc.schema_version,
        "sequence_id": doc.sequence_id,
        "version": doc.version,
        "tracks": [_track_to_dict(t) for t in doc.tracks],
    }
    data.update(doc.extras)
    return data


def document_from_dict(data: dict[str, Any]) -> AnnotationDocument:
    if not isinstance(data, dict):
        raise DocumentFormatError("$: expected top-level object")
    schema_version = _require(data, "schema_version", int, "$")
    if schema_version > SCHEMA_VERSION:
        raise UnsupportedSchemaVersion(
            f"$.schema_version: {schema_version} is newer than supported {SCHEMA_VERSION}"
        )
    sequence_id = _require(data, "sequence_id", str, "$")
    version = _require(data, "version", int, "$")
    tracks_raw = _require(data, "tracks", list, "$")
    tracks = []
    for i, raw in enumerate(tracks_raw):
        if not isinstance(raw, dict):
            raise DocumentFormatError(f"$.tracks[{i}]: expected object")
        tracks.append(_track_from_dict(raw, f"$.tracks[{i}]"))
    extras = {k: v for k, v in data.items() if k not in _DOC_FIELDS}
    try:
        return AnnotationDocument(
            sequence_id=sequence_id,
            schema_version=schema_version,
            version=version,
            tracks=tuple(tracks),
            extras=extras,
        )
    except ValueError as exc:
        raise DocumentFormatError(f"$: {exc}") from exc


def dumps_document(doc: AnnotationDocument) -> str:
    """Deterministic JSON text (stable key order, 2-space indent, LF)."""
    return json.dumps(document_to_dict(doc), ensure_ascii=False, indent=2) + "\n"


def loads_document(text: str) -> AnnotationDocument:
    # json.JSONDecodeError carries line/column for malformed input.
    return document_from_dict(json.loads(text))


def save_document(doc: AnnotationDocument, destination: str | Path) -> None:
    """Atomic write: temp file in the same directory, then rename."""
    destination = Path(destination)
    fd, tmp_name = tempfile.mkstemp(
        dir=destination.parent, prefix=destination.name, suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(dumps_document(doc))
        os.replace(tmp_name, destination)
    except BaseException:
        os.unlink(tmp_name)
        raise


def load_document(source: str | Path) -> AnnotationDocument:
    return loads_document(Path(source).read_text(encoding="utf-8"))


def export_csv(
    doc: AnnotationDocument,
    include_predicted: bool = False,
    inclusive: bool = False,
) -> str:
    """One row per box, sorted by (track_id, frame), LF line endings.

    Coordinates stay half-open unless ``inclusive`` is set, which emits
    x2-1, y2-1 for consumers expecting inclusive corners; the leading comment
    row states which convention is in effect.
    """
    if inclusive:
        comment = "# coordinates: inclusive corners (x2,y2 are the last pixel)"
    else:
        comment = "# coordinates: half-open intervals [x1,x2)x[y1,y2)"
    lines = [comment, CSV_HEADER]
    rows = []
    for track in doc.tracks:
        for kb in track.keyed_boxes:
            if not include_predicted and kb.source is BoxSource.PREDICTED:
                continue
            rows.append((track.track_id, kb.frame, kb))
    rows.sort(key=lambda r: (r[0], r[1]))
    shift = 1 if inclusive else 0
    for track_id, frame, kb in rows:
        lines.append(
            f"{doc.sequence_id},{track_id},{frame},"
            f"{kb.box.x1},{kb.box.y1},{kb.box.x2 - shift},{kb.box.y2 - shift},"
            f"{kb.source.value}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CorpusStats:
    """Annotation-effort counters and their printed ratios."""

    tampered_frames: int
    total_frames: int
    manual_boxes: int
    total_boxes: int
    frame_ratio: str
    box_ratio: str


def _ratio_str(numer: int, denom: int) -> str:
    """100*numer/denom as a percentage, round-half-up to 2 decimals."""
    if denom == 0:
        return "0.00%"
    hundredths = Fraction(10000 * numer, denom)
    n = (2 * hundredths.numerator + hundredths.denominator) // (
        2 * hundredths.denominator
    )
    return f"{n // 100}.{n % 100:02d}%"


def compute_stats(
    corpus: Iterable[tuple[AnnotationDocument, SequencePair]],
) -> CorpusStats:
    """Corpus-wide counts: annotated frames vs total, keypoint boxes vs total.

    A frame counts as tampered when any track puts a box on it; manual counts
    cover both hand-drawn and corrected boxes, since each cost annotator work.
    """
    tampered = total_frames = manual = total_boxes = 0
    for doc, pair in corpus:
        tampered += len(doc.annotated_frames())
        total_frames += pair.frame_count
        manual += doc.box_count(sources=(BoxSource.MANUAL, BoxSource.CORRECTED))
        total_boxes += doc.box_count()
    return CorpusStats(
        tampered_frames=tampered,
        total_frames=total_frames,
        manual_boxes=manual,
        total_boxes=total_boxes,
        frame_ratio=_ratio_str(tampered, total_frames),
        box_ratio=_ratio_str(manual, total_boxes),
    )
