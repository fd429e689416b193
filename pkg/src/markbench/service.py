"""HTTP facade over the frame store, interpolation engine, and persistence.

Corpus layout: ``root/<sequence_id>/original/`` and ``root/<sequence_id>/forged/``
frame directories; annotations are persisted next to them as
``root/<sequence_id>/annotations.json`` after every mutation (atomic
write-then-rename), so no work is lost on restart.

Concurrency is optimistic: every mutating request carries the client's
last-seen document version. A stale version gets 409 plus the current
document so the client can re-sync; mutations on one sequence are serialized
behind a per-sequence lock, reads never block.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from fastapi import FastAPI, Query, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import frames as frame_store
from .interpolate import InsufficientKeypointsError, predict_track
from .model import (
    AnnotationDocument,
    BoundingBox,
    BoxSource,
    KeyedBox,
    SequencePair,
    validate_box,
)
from .store import compute_stats, document_to_dict, load_document, save_document

ANNOTATION_FILE = "annotations.json"


class BoxIn(BaseModel):
    """One box in a PUT body; ``track_id`` omitted means 'start a new track'."""

    x1: int
    y1: int
    x2: int
    y2: int
    source: str
    track_id: str | None = None
    label: str = ""


class PutBoxesBody(BaseModel):
    version: int
    boxes: list[BoxIn] = Field(min_length=1)


class InterpolateBody(BaseModel):
    version: int | None = None


@dataclass
class _SequenceState:
    """Pair geometry, live document, and the sequence's writer lock."""

    pair: SequencePair
    doc: AnnotationDocument
    doc_path: Path
    lock: threading.Lock


def discover_sequences(root: str | Path) -> dict[str, _SequenceState]:
    """Ingest every ``<root>/<id>/{original,forged}`` pair under the corpus root."""
    root = Path(root)
    states: dict[str, _SequenceState] = {}
    for entry in sorted(root.iterdir()):
        original = entry / "original"
        forged = entry / "forged"
        if not (original.is_dir() and forged.is_dir()):
            continue
        pair = frame_store.open_sequence_pair(original, forged, sequence_id=entry.name)
        doc_path = entry / ANNOTATION_FILE
        if doc_path.exists():
            doc = load_document(doc_path)
        else:
            doc = AnnotationDocument(sequence_id=entry.name)
        states[entry.name] = _SequenceState(
            pair=pair, doc=doc, doc_path=doc_path, lock=threading.Lock()
        )
    return states


def _new_id() -> str:
    return uuid.uuid4().hex[:12]


def _conflict(doc: AnnotationDocument) -> JSONResponse:
    return JSONResponse(
        status_code=409,
        content={"detail": "version conflict", "document": document_to_dict(doc)},
    )


def _error(status: int, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"detail": detail})


def create_app(root: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    """Build the app for one corpus root; sequences are ingested eagerly."""
    states = discover_sequences(root)
    app = FastAPI(title="markbench")

    def _state(sequence_id: str) -> _SequenceState | None:
        return states.get(sequence_id)

    @app.get("/api/sequences")
    def list_sequences() -> list[dict]:
        return [
            {
                "sequence_id": s.pair.sequence_id,
                "frame_count": s.pair.frame_count,
                "width": s.pair.width,
                "height": s.pair.height,
            }
            for s in states.values()
        ]

    @app.get("/api/sequences/{sequence_id}/frames/{index}")
    def get_frame_image(
        sequence_id: str,
        index: int,
        view: str = Query("original"),
        gain: float = Query(1.0),
    ):
        state = _state(sequence_id)
        if state is None:
            return _error(404, f"unknown sequence {sequence_id!r}")
        if view not in ("original", "forged", "diff"):
            return _error(400, f"bad view {view!r}: expected original|forged|diff")
        if gain <= 0:
            return _error(400, f"gain must be > 0, got {gain}")
        if not 0 <= index < state.pair.frame_count:
            return _error(404, f"frame {index} out of range")
        if view == "diff":
            diff = frame_store.frame_diff(
                frame_store.get_frame(state.pair, "original", index),
                frame_store.get_frame(state.pair, "forged", index),
            )
            body = frame_store.diff_to_png(diff, gain=gain)
        else:
            body = frame_store.frame_to_png(
                frame_store.get_frame(state.pair, view, index)
            )
        return Response(content=body, media_type="image/png")

    @app.get("/api/sequences/{sequence_id}/annotations")
    def get_annotations(sequence_id: str):
        state = _state(sequence_id)
        if state is None:
            return _error(404, f"unknown sequence {sequence_id!r}")
        return document_to_dict(state.doc)

    @app.put("/api/sequences/{sequence_id}/annotations/{frame}")
    def put_boxes(sequence_id: str, frame: int, body: PutBoxesBody):
        state = _state(sequence_id)
        if state is None:
            return _error(404, f"unknown sequence {sequence_id!r}")
        if not 0 <= frame < state.pair.frame_count:
            return _error(404, f"frame {frame} out of range")
        for entry in body.boxes:
            if entry.source not in (BoxSource.MANUAL.value, BoxSource.CORRECTED.value):
                return _error(
                    422, f"source must be manual or corrected, got {entry.source!r}"
                )
            box = BoundingBox(entry.x1, entry.y1, entry.x2, entry.y2)
            result = validate_box(box, state.pair.width, state.pair.height)
            if not result:
                return _error(422, result.reason)
        with state.lock:
            if body.version != state.doc.version:
                return _conflict(state.doc)
            doc = state.doc
            applied = []
            for entry in body.boxes:
                track_id = entry.track_id or _new_id()
                track = doc.track(track_id)
                existing = track.box_at(frame) if track is not None else None
                # Upsert keeps the box_id stable when replacing at a frame.
                box_id = existing.box_id if existing is not None else _new_id()
                kb = KeyedBox(
                    frame=frame,
                    box=BoundingBox(entry.x1, entry.y1, entry.x2, entry.y2),
                    source=BoxSource(entry.source),
                    box_id=box_id,
                )
                doc = doc.upsert_box(track_id, kb, label=entry.label)
                applied.append(
                    {
                        "track_id": track_id,
                        "box_id": box_id,
                        "frame": frame,
                        "x1": entry.x1,
                        "y1": entry.y1,
                        "x2": entry.x2,
                        "y2": entry.y2,
                        "source": entry.source,
                    }
                )
            # One version step per request, however many boxes it carried.
            doc = replace(doc, version=state.doc.version + 1)
            save_document(doc, state.doc_path)
            state.doc = doc
            return {"version": doc.version, "boxes": applied}

    @app.delete("/api/sequences/{sequence_id}/annotations/{frame}/{box_id}")
    def delete_box(
        sequence_id: str, frame: int, box_id: str, version: int = Query(...)
    ):
        state = _state(sequence_id)
        if state is None:
            return _error(404, f"unknown sequence {sequence_id!r}")
        with state.lock:
            if version != state.doc.version:
                return _conflict(state.doc)
            try:
                doc = state.doc.delete_box(frame, box_id)
            except KeyError:
                return _error(404, f"no box {box_id!r} at frame {frame}")
            save_document(doc, state.doc_path)
            state.doc = doc
            return {"version": doc.version}

    @app.post("/api/sequences/{sequence_id}/tracks/{track_id}/interpolate")
    def interpolate_track(
        sequence_id: str, track_id: str, body: InterpolateBody | None = None
    ):
        state = _state(sequence_id)
        if state is None:
            return _error(404, f"unknown sequence {sequence_id!r}")
        with state.lock:
            if body is not None and body.version is not None:
                if body.version != state.doc.version:
                    return _conflict(state.doc)
            track = state.doc.track(track_id)
            if track is None:
                return _error(404, f"unknown track {track_id!r}")
            try:
                completed = predict_track(track)
            except InsufficientKeypointsError as exc:
                return _error(422, str(exc))
            doc = state.doc.with_track(completed)
            save_document(doc, state.doc_path)
            state.doc = doc
            return {
                "version": doc.version,
                "track": {
                    "track_id": completed.track_id,
                    "label": completed.label,
                    "boxes": [
                        {
                            "frame": kb.frame,
                            "x1": kb.box.x1,
                            "y1": kb.box.y1,
                            "x2": kb.box.x2,
                            "y2": kb.box.y2,
                            "source": kb.source.value,
                            "box_id": kb.box_id,
                        }
                        for kb in completed.keyed_boxes
                    ],
                },
            }

    @app.get("/api/sequences/{sequence_id}/stats")
    def sequence_stats(sequence_id: str):
        state = _state(sequence_id)
        if state is None:
            return _error(404, f"unknown sequence {sequence_id!r}")
        return asdict(compute_stats([(state.doc, state.pair)]))

    @app.get("/api/corpus/stats")
    def corpus_stats():
        return asdict(compute_stats((s.doc, s.pair) for s in states.values()))

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
