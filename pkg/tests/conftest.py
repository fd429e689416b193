import hypothesis.strategies as st
import numpy as np
from PIL import Image

from markbench.model import (
    AnnotationDocument,
    BoundingBox,
    BoxSource,
    KeyedBox,
    Track,
)

DEFAULT_W, DEFAULT_H = 1280, 720


@st.composite
def bounding_boxes(draw, width=DEFAULT_W, height=DEFAULT_H):
    x1 = draw(st.integers(0, width - 1))
    x2 = draw(st.integers(x1 + 1, width))
    y1 = draw(st.integers(0, height - 1))
    y2 = draw(st.integers(y1 + 1, height))
    return BoundingBox(x1, y1, x2, y2)


@st.composite
def keyed_boxes(draw, frame=None, sources=tuple(BoxSource)):
    if frame is None:
        frame = draw(st.integers(0, 5000))
    return KeyedBox(
        frame=frame,
        box=draw(bounding_boxes()),
        source=draw(st.sampled_from(sources)),
        box_id=draw(st.uuids()).hex,
    )


@st.composite
def tracks(draw, min_boxes=0, max_boxes=12, sources=tuple(BoxSource)):
    frames = draw(
        st.lists(
            st.integers(0, 2000),
            min_size=min_boxes,
            max_size=max_boxes,
            unique=True,
        )
    )
    boxes = tuple(
        draw(keyed_boxes(frame=f, sources=sources)) for f in sorted(frames)
    )
    return Track(
        track_id=draw(st.uuids()).hex,
        label=draw(st.sampled_from(["", "inserted-object", "removed-object"])),
        keyed_boxes=boxes,
    )


@st.composite
def documents(draw, max_tracks=4):
    track_list = draw(st.lists(tracks(), max_size=max_tracks))
    # track ids are uuid-based, collisions are not a concern
    return AnnotationDocument(
        sequence_id=draw(st.sampled_from(["seq-a", "seq-b", "seq-c"])),
        version=draw(st.integers(0, 100)),
        tracks=tuple(track_list),
    )


def write_png(path, arr: np.ndarray) -> None:
    mode = "L" if arr.ndim == 2 else "RGB"
    Image.fromarray(arr, mode=mode).save(path)


def make_pair_dirs(root, original_frames, forged_frames):
    """Write two frame directories under root and return their paths."""
    original_dir = root / "original"
    forged_dir = root / "forged"
    original_dir.mkdir(parents=True)
    forged_dir.mkdir(parents=True)
    for i, arr in enumerate(original_frames):
        write_png(original_dir / f"frame_{i:06d}.png", arr)
    for i, arr in enumerate(forged_frames):
        write_png(forged_dir / f"frame_{i:06d}.png", arr)
    return original_dir, forged_dir
