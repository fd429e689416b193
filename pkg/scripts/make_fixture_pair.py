#!/usr/bin/env python3
"""Generate a synthetic original/forged sequence pair with ground truth.

Writes a sequence directory usable by `markbench serve --root <parent>`:

    <out>/original/frame_%06d.png   background only
    <out>/forged/frame_%06d.png     background + moving planted block
    <out>/annotations.json          keypoints at path corners, rest predicted

The planted block follows a piecewise-linear path, so the bundled annotation
document is exactly reproducible from its keypoints.
"""

import argparse
import sys
from pathlib import Path

import numpy as np
from PIL import Image

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from markbench.interpolate import predict_track
from markbench.model import AnnotationDocument, BoundingBox, BoxSource, KeyedBox, Track
from markbench.store import save_document


def background(width, height, rng):
    base = rng.integers(20, 90, size=(height, width, 3), dtype=np.uint8)
    # horizontal gradient so frames are visually distinguishable
    ramp = np.linspace(0, 60, width, dtype=np.uint8)[None, :, None]
    return (base + ramp).astype(np.uint8)


def waypoint_track(frames, width, height):
    """Keypoints at the start, a corner near 40%, and the end."""
    last = frames - 1
    corner = max(1, int(last * 0.4))
    bw, bh = max(4, width // 8), max(4, height // 8)
    points = [
        (0, BoundingBox(2, 2, 2 + bw, 2 + bh)),
        (corner, BoundingBox(width // 2, height - bh - 2, width // 2 + bw, height - 2)),
        (last, BoundingBox(width - bw - 2, 2, width - 2, 2 + bh)),
    ]
    boxes = tuple(
        KeyedBox(frame=f, box=b, source=BoxSource.MANUAL, box_id=f"kp{f}")
        for f, b in points
        if f <= last
    )
    return Track(track_id="planted", label="inserted-object", keyed_boxes=boxes)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="sequence directory to create")
    parser.add_argument("--frames", type=int, default=20)
    parser.add_argument("--width", type=int, default=64)
    parser.add_argument("--height", type=int, default=48)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if args.frames < 2:
        parser.error("--frames must be >= 2")
    out = Path(args.out)
    original_dir = out / "original"
    forged_dir = out / "forged"
    original_dir.mkdir(parents=True, exist_ok=True)
    forged_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(args.seed)
    track = predict_track(waypoint_track(args.frames, args.width, args.height))
    boxes = {kb.frame: kb.box for kb in track.keyed_boxes}

    for i in range(args.frames):
        frame = background(args.width, args.height, rng)
        Image.fromarray(frame, "RGB").save(original_dir / f"frame_{i:06d}.png")
        forged = frame.copy()
        box = boxes[i]
        forged[box.y1 : box.y2, box.x1 : box.x2] = (220, 40, 40)
        Image.fromarray(forged, "RGB").save(forged_dir / f"frame_{i:06d}.png")

    doc = AnnotationDocument(sequence_id=out.name, version=1, tracks=(track,))
    save_document(doc, out / "annotations.json")
    print(
        f"wrote {args.frames} frame pairs ({args.width}x{args.height}) "
        f"and ground truth to {out}"
    )


if __name__ == "__main__":
    main()
