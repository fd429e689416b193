"""Command-line access to every core capability.

Exit codes: 0 success, 1 validation/domain failure, 2 usage error. Reports go
to stdout, diagnostics to stderr. Commands never mutate their input documents
in place; mutations write to ``--out``.
"""

from __future__ import annotations

import argparse
import glob as globmod
import json
import os
import socket
import sys
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__
from .advisor import (
    boxes_by_frame,
    evaluate_track,
    interpolate_from_keypoints,
    suggest_keypoints,
)
from .frames import (
    DEFAULT_DIFF_THRESHOLD,
    DEFAULT_MIN_AREA,
    FRAME_NAME_FORMAT,
    FrameStoreError,
    candidate_regions,
    frame_diff,
    get_frame,
    open_sequence_pair,
    save_diff_png,
)
from .interpolate import predict_track
from .model import validate_document
from .store import (
    DocumentFormatError,
    compute_stats,
    dumps_document,
    export_csv,
    load_document,
)

ENV_ROOT = "MARKBENCH_ROOT"
ENV_ADDR = "MARKBENCH_ADDR"
DEFAULT_ADDR = "127.0.0.1:8000"


def _fail(message: str) -> int:
    print(message, file=sys.stderr)
    return 1


def _load_doc_or_fail(path: str):
    try:
        return load_document(path)
    except FileNotFoundError:
        raise SystemExit(_fail(f"document not found: {path}"))
    except (DocumentFormatError, ValueError) as exc:
        raise SystemExit(_fail(f"invalid document {path}: {exc}"))


def _parse_addr(addr: str) -> tuple[str, int]:
    host, sep, port = addr.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"expected host:port, got {addr!r}")
    return host, int(port)


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    root = args.root or os.environ.get(ENV_ROOT)
    addr = args.addr or os.environ.get(ENV_ADDR) or DEFAULT_ADDR
    if not root:
        args.parser.error("--root is required (or set MARKBENCH_ROOT)")
    if not Path(root).is_dir():
        args.parser.error(f"--root {root!r} is not a directory")
    try:
        host, port = _parse_addr(addr)
    except ValueError as exc:
        args.parser.error(str(exc))

    ui_dir = args.ui if args.ui and Path(args.ui).is_dir() else None
    app = create_app(root, ui_dir=ui_dir)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((host, port))
    bound_host, bound_port = sock.getsockname()[:2]
    print(f"serving on http://{bound_host}:{bound_port}", flush=True)
    config = uvicorn.Config(app, log_level="warning")
    uvicorn.Server(config).run(sockets=[sock])
    return 0


def cmd_interpolate(args: argparse.Namespace) -> int:
    doc = _load_doc_or_fail(args.doc)
    if args.track is not None:
        if doc.track(args.track) is None:
            return _fail(f"track {args.track!r} not found in {args.doc}")
        targets = [args.track]
    else:
        targets = [t.track_id for t in doc.tracks]
    out_doc = doc
    for track_id in targets:
        track = out_doc.track(track_id)
        kps = track.keypoints()
        if len(kps) < 2:
            return _fail(
                f"track {track_id!r}: insufficient keypoints ({len(kps)}); need >= 2"
            )
        out_doc = out_doc.with_track(predict_track(track))
    out_doc = replace(out_doc, version=doc.version + 1)
    Path(args.out).write_text(dumps_document(out_doc), encoding="utf-8")
    print(f"wrote {args.out}: {len(targets)} track(s) completed")
    return 0


def cmd_diff(args: argparse.Namespace) -> int:
    try:
        pair = open_sequence_pair(args.original, args.forged)
    except FrameStoreError as exc:
        return _fail(str(exc))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    region_entries = []
    for index in range(pair.frame_count):
        diff = frame_diff(
            get_frame(pair, "original", index), get_frame(pair, "forged", index)
        )
        save_diff_png(diff, out_dir / FRAME_NAME_FORMAT.format(index))
        if args.regions:
            boxes = candidate_regions(
                diff, threshold=args.threshold, min_area=args.min_area
            )
            if boxes:
                region_entries.append(
                    {"frame": index, "boxes": [list(b.as_tuple()) for b in boxes]}
                )
    if args.regions:
        payload = {
            "sequence_id": pair.sequence_id,
            "threshold": args.threshold,
            "min_area": args.min_area,
            "frames": region_entries,
        }
        Path(args.regions).write_text(
            json.dumps(payload, indent=2) + "\n", encoding="utf-8"
        )
    print(f"wrote {pair.frame_count} diff frame(s) to {out_dir}")
    return 0


def _pair_for_doc(doc, pairs_root: Path):
    seq_dir = pairs_root / doc.sequence_id
    return open_sequence_pair(
        seq_dir / "original", seq_dir / "forged", sequence_id=doc.sequence_id
    )


def cmd_stats(args: argparse.Namespace) -> int:
    corpus = []
    for doc_path in sorted(globmod.glob(args.docs)):
        doc = _load_doc_or_fail(doc_path)
        try:
            pair = _pair_for_doc(doc, Path(args.pairs))
        except FrameStoreError as exc:
            return _fail(f"{doc_path}: {exc}")
        corpus.append((doc, pair))
    stats = compute_stats(corpus)
    if args.json:
        print(json.dumps(asdict(stats), indent=2))
    else:
        print(f"tampered frames (F1): {stats.tampered_frames}")
        print(f"total frames    (F2): {stats.total_frames}")
        print(f"manual boxes    (B1): {stats.manual_boxes}")
        print(f"total boxes     (B2): {stats.total_boxes}")
        print(f"F1/F2: {stats.frame_ratio}")
        print(f"B1/B2: {stats.box_ratio}")
    return 0


def cmd_advise(args: argparse.Namespace) -> int:
    doc = _load_doc_or_fail(args.reference)
    tracks = doc.tracks
    if args.track is not None:
        track = doc.track(args.track)
        if track is None:
            return _fail(f"track {args.track!r} not found in {args.reference}")
        tracks = (track,)
    results = []
    for track in tracks:
        reference = boxes_by_frame(track)
        try:
            keypoints = suggest_keypoints(reference, args.tolerance)
        except ValueError as exc:
            return _fail(f"track {track.track_id!r}: {exc}")
        rebuilt = interpolate_from_keypoints(reference, keypoints)
        metrics = evaluate_track(rebuilt, reference)
        results.append((track.track_id, keypoints, metrics))
    if args.json:
        payload = {
            "tolerance": args.tolerance,
            "tracks": [
                {"track_id": tid, "keypoints": kps, "metrics": asdict(m)}
                for tid, kps, m in results
            ],
        }
        print(json.dumps(payload, indent=2))
    else:
        for tid, kps, m in results:
            print(
                f"track {tid}: {len(kps)} keypoints {kps} "
                f"mean_iou={m.mean_iou:.4f} min_iou={m.min_iou:.4f} "
                f"max_corner_error={m.max_corner_error}"
            )
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    doc = _load_doc_or_fail(args.doc)
    try:
        pair = _pair_for_doc(doc, Path(args.pairs))
    except FrameStoreError as exc:
        return _fail(str(exc))
    problems = validate_document(doc, pair.width, pair.height)
    if args.json:
        print(json.dumps({"ok": not problems, "violations": problems}, indent=2))
    else:
        for problem in problems:
            print(problem, file=sys.stderr)
        if not problems:
            print(f"{args.doc}: OK ({doc.box_count()} boxes)")
    return 1 if problems else 0


def cmd_export(args: argparse.Namespace) -> int:
    doc = _load_doc_or_fail(args.doc)
    if args.format == "csv":
        text = export_csv(
            doc, include_predicted=args.include_predicted, inclusive=args.inclusive
        )
    else:
        if args.inclusive:
            args.parser.error("--inclusive applies to --format csv only")
        text = dumps_document(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="markbench",
        description="Keyframe-anchored box annotation for paired frame sequences",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--root", help=f"corpus root (or ${ENV_ROOT})")
    p.add_argument("--addr", help=f"bind host:port (or ${ENV_ADDR}; default {DEFAULT_ADDR})")
    p.add_argument("--ui", help="directory of built UI assets to serve at /")
    p.set_defaults(func=cmd_serve, parser=p)

    p = sub.add_parser("interpolate", help="complete tracks between keypoints")
    p.add_argument("--doc", required=True, help="input annotation document")
    p.add_argument("--track", help="only this track (default: all)")
    p.add_argument("--out", required=True, help="output document path")
    p.set_defaults(func=cmd_interpolate, parser=p)

    p = sub.add_parser("diff", help="write difference images and candidate regions")
    p.add_argument("--original", required=True)
    p.add_argument("--forged", required=True)
    p.add_argument("--out", required=True, help="output directory for diff PNGs")
    p.add_argument("--threshold", type=int, default=DEFAULT_DIFF_THRESHOLD)
    p.add_argument("--min-area", type=int, default=DEFAULT_MIN_AREA)
    p.add_argument("--regions", help="also write candidate regions to this JSON file")
    p.set_defaults(func=cmd_diff, parser=p)

    p = sub.add_parser("stats", help="corpus annotation statistics")
    p.add_argument("--docs", required=True, help="glob of annotation documents")
    p.add_argument("--pairs", required=True, help="corpus root of sequence pairs")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats, parser=p)

    p = sub.add_parser("advise", help="suggest keypoint frames for a reference track")
    p.add_argument("--reference", required=True, help="complete per-frame document")
    p.add_argument("--tolerance", type=float, required=True, help="max corner error, px")
    p.add_argument("--track", help="only this track (default: all)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_advise, parser=p)

    p = sub.add_parser("validate", help="check a document against its sequence pair")
    p.add_argument("--doc", required=True)
    p.add_argument("--pairs", required=True, help="corpus root of sequence pairs")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate, parser=p)

    p = sub.add_parser("export", help="export a document as CSV or JSON")
    p.add_argument("--doc", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--include-predicted", action="store_true")
    p.add_argument("--inclusive", action="store_true",
                   help="emit inclusive corners (x2-1, y2-1) in CSV")
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_export, parser=p)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
