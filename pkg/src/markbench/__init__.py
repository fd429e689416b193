"""markbench: keyframe-anchored bounding-box annotation for paired frame sequences.

A human marks boxes on a few keyframes, the engine fills in every frame
between them by per-coordinate linear interpolation, and corrections made
during preview become new keypoints that reshape the prediction.
"""

__version__ = "0.1.0"

from .advisor import TrackMetrics, evaluate_track, iou, suggest_keypoints
from .frames import (
    DiffFrame,
    Frame,
    candidate_regions,
    frame_diff,
    get_frame,
    open_sequence_pair,
)
from .interpolate import (
    InsufficientKeypointsError,
    InterpolationRangeError,
    Segment,
    interpolate_box,
    predict_segment,
    predict_track,
)
from .model import (
    AnnotationDocument,
    BoundingBox,
    BoxSource,
    KeyedBox,
    SequencePair,
    Track,
    box_area,
    validate_box,
    validate_document,
)
from .store import (
    CorpusStats,
    compute_stats,
    export_csv,
    load_document,
    save_document,
)

__all__ = [
    "AnnotationDocument",
    "BoundingBox",
    "BoxSource",
    "CorpusStats",
    "DiffFrame",
    "Frame",
    "InsufficientKeypointsError",
    "InterpolationRangeError",
    "KeyedBox",
    "Segment",
    "SequencePair",
    "Track",
    "TrackMetrics",
    "box_area",
    "candidate_regions",
    "compute_stats",
    "evaluate_track",
    "export_csv",
    "frame_diff",
    "get_frame",
    "interpolate_box",
    "iou",
    "load_document",
    "open_sequence_pair",
    "predict_segment",
    "predict_track",
    "save_document",
    "suggest_keypoints",
    "validate_box",
    "validate_document",
]
