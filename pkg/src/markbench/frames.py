"""Paired frame-sequence ingestion, frame differencing, and candidate regions.

Inputs are directories of already-decoded frames named ``frame_%06d.png``
(0-based, contiguous). Keeping codecs out of the core makes everything here
deterministic; an external decoder (e.g. ffmpeg) produces the layout:

    ffmpeg -i original.mp4 -start_number 0 original/frame_%06d.png

The difference image is the per-pixel channel-max absolute difference between
original and forged. Candidate regions derived from it are assistive only:
recompression noise means thresholded differences cannot be trusted as
localization ground truth, so boxes are suggestions for the annotator.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .model import BoundingBox, SequencePair

FRAME_NAME_FORMAT = "frame_{:06d}.png"
_FRAME_NAME_RE = re.compile(r"^frame_(\d{6})\.png$")

DEFAULT_DIFF_THRESHOLD = 25
DEFAULT_MIN_AREA = 16

ROLES = ("original", "forged")


class FrameStoreError(Exception):
    """Base for sequence-pair ingestion and access failures."""


class NoFramesFound(FrameStoreError):
    pass


class NonContiguousNumbering(FrameStoreError):
    pass


class FrameCountMismatch(FrameStoreError):
    pass


class GeometryMismatch(FrameStoreError):
    pass


class UnreadableFrame(FrameStoreError):
    pass


@dataclass(frozen=True)
class Frame:
    """8-bit RGB frame; ``data`` is the row-major pixel buffer."""

    width: int
    height: int
    data: bytes

    channels = 3

    def __post_init__(self) -> None:
        expected = self.width * self.height * self.channels
        if len(self.data) != expected:
            raise ValueError(
                f"frame buffer is {len(self.data)} bytes, expected {expected}"
            )

    @classmethod
    def from_array(cls, arr: np.ndarray) -> Frame:
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
            raise ValueError(f"expected (h, w, 3) uint8 array, got {arr.shape} {arr.dtype}")
        return cls(width=arr.shape[1], height=arr.shape[0], data=arr.tobytes())

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.data, dtype=np.uint8).reshape(
            self.height, self.width, 3
        )


@dataclass(frozen=True)
class DiffFrame:
    """Single-channel 8-bit per-pixel difference magnitude."""

    width: int
    height: int
    data: bytes

    def __post_init__(self) -> None:
        if len(self.data) != self.width * self.height:
            raise ValueError(
                f"diff buffer is {len(self.data)} bytes, "
                f"expected {self.width * self.height}"
            )

    @classmethod
    def from_array(cls, arr: np.ndarray) -> DiffFrame:
        if arr.ndim != 2 or arr.dtype != np.uint8:
            raise ValueError(f"expected (h, w) uint8 array, got {arr.shape} {arr.dtype}")
        return cls(width=arr.shape[1], height=arr.shape[0], data=arr.tobytes())

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.data, dtype=np.uint8).reshape(
            self.height, self.width
        )


def _scan_frame_dir(directory: Path) -> int:
    """Number of frames in a directory, enforcing contiguous 0-based naming."""
    if not directory.is_dir():
        raise NoFramesFound(f"no frames found: {directory} is not a directory")
    indices = sorted(
        int(m.group(1))
        for p in directory.iterdir()
        if (m := _FRAME_NAME_RE.match(p.name))
    )
    if not indices:
        raise NoFramesFound(f"no frames found in {directory}")
    if indices != list(range(len(indices))):
        gap = next(i for i, idx in enumerate(indices) if idx != i)
        raise NonContiguousNumbering(
            f"{directory}: expected frame {gap:06d}, found frame {indices[gap]:06d}"
        )
    return len(indices)


def _frame_path(directory: str | Path, index: int) -> Path:
    return Path(directory) / FRAME_NAME_FORMAT.format(index)


@lru_cache(maxsize=256)
def _load_frame(path_str: str) -> Frame:
    # lru_cache is internally locked, so concurrent readers are safe; the
    # corpus is read-only after open, so path-keyed caching is sound.
    try:
        with Image.open(path_str) as img:
            arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except Exception as exc:
        raise UnreadableFrame(f"cannot decode {path_str}: {exc}") from exc
    return Frame.from_array(arr)


def open_sequence_pair(
    original_dir: str | Path,
    forged_dir: str | Path,
    sequence_id: str | None = None,
) -> SequencePair:
    """Validate a pair of frame directories and read the shared geometry.

    Counts must match; geometry is read from frame 0 of each source and
    re-checked lazily on every later access.
    """
    original_dir = Path(original_dir)
    forged_dir = Path(forged_dir)
    n_original = _scan_frame_dir(original_dir)
    n_forged = _scan_frame_dir(forged_dir)
    if n_original != n_forged:
        raise FrameCountMismatch(
            f"frame count mismatch: {n_original} original vs {n_forged} forged"
        )
    first_original = _load_frame(str(_frame_path(original_dir, 0)))
    first_forged = _load_frame(str(_frame_path(forged_dir, 0)))
    if (first_original.width, first_original.height) != (
        first_forged.width,
        first_forged.height,
    ):
        raise GeometryMismatch(
            f"geometry mismatch: original {first_original.width}x{first_original.height}"
            f" vs forged {first_forged.width}x{first_forged.height}"
        )
    if sequence_id is None:
        if original_dir.resolve().parent == forged_dir.resolve().parent:
            sequence_id = original_dir.resolve().parent.name
        else:
            sequence_id = forged_dir.name
    return SequencePair(
        sequence_id=sequence_id,
        original_source=str(original_dir),
        forged_source=str(forged_dir),
        width=first_original.width,
        height=first_original.height,
        frame_count=n_original,
    )


def get_frame(pair: SequencePair, role: str, index: int) -> Frame:
    """Decoded frame by role and index; repeated calls are byte-identical."""
    if role not in ROLES:
        raise ValueError(f"role must be one of {ROLES}, got {role!r}")
    if not 0 <= index < pair.frame_count:
        raise IndexError(
            f"frame index {index} out of range [0, {pair.frame_count})"
        )
    source = pair.original_source if role == "original" else pair.forged_source
    frame = _load_frame(str(_frame_path(source, index)))
    if (frame.width, frame.height) != (pair.width, pair.height):
        raise GeometryMismatch(
            f"geometry mismatch: {role} frame {index} is "
            f"{frame.width}x{frame.height}, expected {pair.width}x{pair.height}"
        )
    return frame


def frame_diff(a: Frame, b: Frame) -> DiffFrame:
    """Per-pixel channel-max absolute difference of two same-shape frames."""
    if (a.width, a.height) != (b.width, b.height):
        raise GeometryMismatch(
            f"geometry mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    delta = np.abs(a.to_array().astype(np.int16) - b.to_array().astype(np.int16))
    return DiffFrame.from_array(delta.max(axis=2).astype(np.uint8))


def candidate_regions(
    diff: DiffFrame,
    threshold: int = DEFAULT_DIFF_THRESHOLD,
    min_area: int = DEFAULT_MIN_AREA,
) -> list[BoundingBox]:
    """Tight boxes around 8-connected above-threshold blobs, largest box first.

    Components with fewer than ``min_area`` pixels are dropped (speckle noise
    from recompression). Purely assistive: thresholded differences do not
    localize forgeries reliably.
    """
    mask = diff.to_array() > threshold
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=bool))
    if count == 0:
        return []
    sizes = np.bincount(labels.ravel())
    boxes = []
    for label, slices in enumerate(ndimage.find_objects(labels), start=1):
        if slices is None or sizes[label] < min_area:
            continue
        rows, cols = slices
        boxes.append(BoundingBox(cols.start, rows.start, cols.stop, rows.stop))
    boxes.sort(key=lambda b: (-(b.x2 - b.x1) * (b.y2 - b.y1), b.as_tuple()))
    return boxes


def frame_to_png(frame: Frame) -> bytes:
    """Deterministic PNG encoding of an RGB frame."""
    buf = io.BytesIO()
    Image.fromarray(frame.to_array(), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def diff_to_png(diff: DiffFrame, gain: float = 1.0) -> bytes:
    """Grayscale PNG of a diff; ``gain`` scales values, clipped to 255."""
    arr = diff.to_array()
    if gain != 1.0:
        arr = np.clip(arr.astype(np.float64) * gain, 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def save_diff_png(diff: DiffFrame, path: str | Path) -> None:
    Path(path).write_bytes(diff_to_png(diff))
