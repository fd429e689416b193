#!/usr/bin/env python3
"""Measure the annotation-effort vs accuracy tradeoff on synthetic tracks.

For random piecewise-linear trajectories, sweep the corner-error tolerance
and report how many keypoints the advisor asks for, what share of boxes that
is, and the IoU of the reconstruction. Looser tolerance = fewer keypoints =
less annotator time, at the cost of fidelity.
"""

import argparse
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from markbench.advisor import (
    evaluate_track,
    interpolate_from_keypoints,
    suggest_keypoints,
)
from markbench.interpolate import interpolate_box
from markbench.model import BoundingBox


def random_box(rng, width, height):
    x1 = rng.randrange(0, width - 1)
    x2 = rng.randrange(x1 + 1, width)
    y1 = rng.randrange(0, height - 1)
    y2 = rng.randrange(y1 + 1, height)
    return BoundingBox(x1, y1, x2, y2)


def random_reference(rng, breaks, span, width, height):
    frames = sorted(rng.sample(range(span), breaks))
    corner_boxes = {f: random_box(rng, width, height) for f in frames}
    reference = {}
    for m, n in zip(frames, frames[1:]):
        for k in range(m, n):
            reference[k] = interpolate_box(m, corner_boxes[m], n, corner_boxes[n], k)
    reference[frames[-1]] = corner_boxes[frames[-1]]
    return reference


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--tracks", type=int, default=50)
    parser.add_argument("--breaks", type=int, default=6, help="corners per trajectory")
    parser.add_argument("--span", type=int, default=275, help="frames per trajectory")
    parser.add_argument("--width", type=int, default=1280)
    parser.add_argument("--height", type=int, default=720)
    parser.add_argument(
        "--tolerances", type=int, nargs="+", default=[0, 1, 2, 4, 8, 16, 32]
    )
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    references = [
        random_reference(rng, args.breaks, args.span, args.width, args.height)
        for _ in range(args.tracks)
    ]
    total_boxes = sum(len(r) for r in references)

    print(f"{args.tracks} tracks, {total_boxes} boxes total, span {args.span}")
    print(f"{'tol(px)':>8} {'keypoints':>10} {'manual%':>8} {'mean IoU':>9} {'max err':>8}")
    for tolerance in args.tolerances:
        keypoints = 0
        worst_err = 0
        iou_sum = 0.0
        for reference in references:
            suggested = suggest_keypoints(reference, tolerance)
            keypoints += len(suggested)
            rebuilt = interpolate_from_keypoints(reference, suggested)
            metrics = evaluate_track(rebuilt, reference)
            worst_err = max(worst_err, metrics.max_corner_error)
            iou_sum += metrics.mean_iou * metrics.frames_compared
        print(
            f"{tolerance:>8} {keypoints:>10} {100 * keypoints / total_boxes:>7.2f}% "
            f"{iou_sum / total_boxes:>9.4f} {worst_err:>8}"
        )


if __name__ == "__main__":
    main()
