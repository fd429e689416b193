import json
import signal
import subprocess
import sys

import httpx
import numpy as np
import pytest

from markbench.model import (
    AnnotationDocument,
    BoundingBox,
    BoxSource,
    KeyedBox,
    Track,
)
from markbench.store import load_document, save_document

from conftest import make_pair_dirs, write_png
from oracles import flood_fill_regions


def run_cli(*args, **kwargs):
    return subprocess.run(
        [sys.executable, "-m", "markbench", *map(str, args)],
        capture_output=True,
        text=True,
        timeout=120,
        **kwargs,
    )


def kb(frame, coords, source=BoxSource.MANUAL, box_id=None):
    return KeyedBox(
        frame=frame,
        box=BoundingBox(*coords),
        source=source,
        box_id=box_id or f"b{frame}",
    )


@pytest.fixture
def keypoint_doc(tmp_path):
    doc = AnnotationDocument(
        sequence_id="seq-x",
        tracks=(
            Track(
                track_id="t1",
                keyed_boxes=(kb(0, (0, 0, 10, 10)), kb(10, (20, 30, 30, 40))),
            ),
        ),
    )
    path = tmp_path / "keypoints.json"
    save_document(doc, path)
    return path


class TestInterpolateCommand:
    def test_completes_span(self, tmp_path, keypoint_doc):
        out = tmp_path / "full.json"
        result = run_cli("interpolate", "--doc", keypoint_doc, "--out", out)
        assert result.returncode == 0, result.stderr
        doc = load_document(out)
        assert len(doc.tracks[0].keyed_boxes) == 11
        assert doc.version == 1

    def test_single_keypoint_exit_1_names_track(self, tmp_path):
        doc = AnnotationDocument(
            sequence_id="s",
            tracks=(Track(track_id="lonely", keyed_boxes=(kb(0, (0, 0, 5, 5)),)),),
        )
        path = tmp_path / "doc.json"
        save_document(doc, path)
        result = run_cli("interpolate", "--doc", path, "--out", tmp_path / "o.json")
        assert result.returncode == 1
        assert "lonely" in result.stderr
        assert not (tmp_path / "o.json").exists()

    def test_rerun_byte_identical(self, tmp_path, keypoint_doc):
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        assert run_cli("interpolate", "--doc", keypoint_doc, "--out", out1).returncode == 0
        assert run_cli("interpolate", "--doc", keypoint_doc, "--out", out2).returncode == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_track_selector(self, tmp_path, keypoint_doc):
        result = run_cli(
            "interpolate", "--doc", keypoint_doc, "--track", "ghost",
            "--out", tmp_path / "o.json",
        )
        assert result.returncode == 1
        assert "ghost" in result.stderr


class TestDiffCommand:
    def test_identical_dirs_black_output_empty_regions(self, tmp_path):
        frames = [np.full((10, 12, 3), 60, dtype=np.uint8) for _ in range(3)]
        original, forged = make_pair_dirs(tmp_path / "pair", frames, frames)
        out = tmp_path / "diffs"
        regions = tmp_path / "regions.json"
        result = run_cli(
            "diff", "--original", original, "--forged", forged,
            "--out", out, "--regions", regions,
        )
        assert result.returncode == 0, result.stderr
        from PIL import Image

        for i in range(3):
            arr = np.asarray(Image.open(out / f"frame_{i:06d}.png"))
            assert np.all(arr == 0)
        assert json.loads(regions.read_text())["frames"] == []

    def test_planted_blob_found(self, tmp_path):
        base = np.full((20, 24, 3), 30, dtype=np.uint8)
        forged_frame = base.copy()
        forged_frame[4:9, 6:11] = 200
        original, forged = make_pair_dirs(tmp_path / "pair", [base], [forged_frame])
        regions = tmp_path / "regions.json"
        result = run_cli(
            "diff", "--original", original, "--forged", forged,
            "--out", tmp_path / "diffs", "--threshold", 25, "--min-area", 4,
            "--regions", regions,
        )
        assert result.returncode == 0, result.stderr
        payload = json.loads(regions.read_text())
        assert payload["frames"] == [{"frame": 0, "boxes": [[6, 4, 11, 9]]}]
        # agree with the flood-fill oracle on the planted mask
        mask = np.zeros((20, 24), dtype=bool)
        mask[4:9, 6:11] = True
        assert {tuple(b) for b in payload["frames"][0]["boxes"]} == flood_fill_regions(mask, 4)

    def test_count_mismatch_exit_1(self, tmp_path):
        frames = [np.zeros((8, 8, 3), dtype=np.uint8)]
        original, forged = make_pair_dirs(tmp_path / "pair", frames * 2, frames * 3)
        result = run_cli(
            "diff", "--original", original, "--forged", forged, "--out", tmp_path / "d"
        )
        assert result.returncode == 1
        assert "mismatch" in result.stderr


def sparse_pair_dirs(seq_dir, frame_count, w=24, h=18):
    """Frame 0 is a real PNG; the rest are empty placeholders (never decoded)."""
    for role in ("original", "forged"):
        d = seq_dir / role
        d.mkdir(parents=True)
        write_png(d / "frame_000000.png", np.zeros((h, w, 3), dtype=np.uint8))
        for i in range(1, frame_count):
            (d / f"frame_{i:06d}.png").touch()


@pytest.fixture
def stats_corpus(tmp_path):
    """Scaled corpus printing the same ratio strings as the published table:

    F1/F2 = 1169/5000 = 23.38%, B1/B2 = 99/2000 = 4.95%.
    """
    root = tmp_path / "corpus"
    docs = tmp_path / "docs"
    docs.mkdir()
    sparse_pair_dirs(root / "seq-s1", 2500)
    sparse_pair_dirs(root / "seq-s2", 2500)

    def box_source(track_frames, manual_frames):
        for f in track_frames:
            yield kb(
                f, (0, 0, 10, 10),
                source=BoxSource.MANUAL if f in manual_frames else BoxSource.PREDICTED,
            )

    doc1 = AnnotationDocument(
        sequence_id="seq-s1",
        tracks=(
            Track(track_id="a", keyed_boxes=tuple(box_source(range(1169), set(range(97))))),
            Track(track_id="b", keyed_boxes=tuple(box_source(range(831), {0, 830}))),
        ),
    )
    doc2 = AnnotationDocument(sequence_id="seq-s2")
    save_document(doc1, docs / "seq-s1.json")
    save_document(doc2, docs / "seq-s2.json")
    return root, docs


class TestStatsCommand:
    def test_published_ratios_at_scale(self, stats_corpus):
        root, docs = stats_corpus
        result = run_cli("stats", "--docs", f"{docs}/*.json", "--pairs", root)
        assert result.returncode == 0, result.stderr
        assert "F1/F2: 23.38%" in result.stdout
        assert "B1/B2: 4.95%" in result.stdout

    def test_json_mode(self, stats_corpus):
        root, docs = stats_corpus
        result = run_cli("stats", "--docs", f"{docs}/*.json", "--pairs", root, "--json")
        payload = json.loads(result.stdout)
        assert payload == {
            "tampered_frames": 1169,
            "total_frames": 5000,
            "manual_boxes": 99,
            "total_boxes": 2000,
            "frame_ratio": "23.38%",
            "box_ratio": "4.95%",
        }

    def test_empty_glob_zeros(self, tmp_path):
        result = run_cli("stats", "--docs", f"{tmp_path}/none-*.json", "--pairs", tmp_path)
        assert result.returncode == 0
        assert "F1/F2: 0.00%" in result.stdout


@pytest.fixture
def reference_doc(tmp_path):
    """Complete per-frame track: linear to frame 6, corner, linear to 14."""
    boxes = []
    for f in range(0, 7):
        boxes.append(kb(f, (2 * f, 0, 2 * f + 8, 8), source=BoxSource.PREDICTED if f % 3 else BoxSource.MANUAL))
    for f in range(7, 15):
        boxes.append(kb(f, (12, 3 * (f - 6), 20, 3 * (f - 6) + 8), source=BoxSource.PREDICTED))
    doc = AnnotationDocument(
        sequence_id="s", tracks=(Track(track_id="ref", keyed_boxes=tuple(boxes)),)
    )
    path = tmp_path / "reference.json"
    save_document(doc, path)
    return path


class TestAdviseCommand:
    def test_corner_track(self, reference_doc):
        result = run_cli("advise", "--reference", reference_doc, "--tolerance", 0, "--json")
        assert result.returncode == 0, result.stderr
        payload = json.loads(result.stdout)
        track = payload["tracks"][0]
        assert track["keypoints"] == [0, 6, 14]
        assert track["metrics"]["max_corner_error"] == 0
        assert track["metrics"]["mean_iou"] == 1.0

    def test_linear_track_two_frames(self, tmp_path):
        doc = AnnotationDocument(
            sequence_id="s",
            tracks=(
                Track(
                    track_id="lin",
                    keyed_boxes=tuple(kb(f, (f, f, f + 5, f + 5)) for f in range(10)),
                ),
            ),
        )
        path = tmp_path / "lin.json"
        save_document(doc, path)
        result = run_cli("advise", "--reference", path, "--tolerance", 0, "--json")
        assert json.loads(result.stdout)["tracks"][0]["keypoints"] == [0, 9]

    def test_monotone_in_tolerance(self, reference_doc):
        counts = []
        for tolerance in (0, 2, 6, 30):
            result = run_cli(
                "advise", "--reference", reference_doc, "--tolerance", tolerance, "--json"
            )
            counts.append(len(json.loads(result.stdout)["tracks"][0]["keypoints"]))
        assert counts == sorted(counts, reverse=True)


class TestValidateExportCommands:
    def test_validate_ok(self, tmp_path, keypoint_doc):
        root = tmp_path / "corpus"
        sparse_pair_dirs(root / "seq-x", 60, w=64, h=64)
        result = run_cli("validate", "--doc", keypoint_doc, "--pairs", root)
        assert result.returncode == 0, result.stderr
        assert "OK" in result.stdout

    def test_validate_names_frame_and_constraint(self, tmp_path):
        root = tmp_path / "corpus"
        sparse_pair_dirs(root / "seq-x", 60, w=16, h=16)
        doc = AnnotationDocument(
            sequence_id="seq-x",
            tracks=(Track(track_id="t", keyed_boxes=(kb(7, (0, 0, 20, 8)),)),),
        )
        path = tmp_path / "bad.json"
        save_document(doc, path)
        result = run_cli("validate", "--doc", path, "--pairs", root)
        assert result.returncode == 1
        assert "frame 7" in result.stderr
        assert "x2 <= width violated" in result.stderr

    def test_export_json_round_trips(self, tmp_path, keypoint_doc):
        out = tmp_path / "exported.json"
        result = run_cli("export", "--doc", keypoint_doc, "--format", "json", "--out", out)
        assert result.returncode == 0
        assert load_document(out) == load_document(keypoint_doc)

    def test_export_csv_counts(self, tmp_path, keypoint_doc):
        full = tmp_path / "full.json"
        run_cli("interpolate", "--doc", keypoint_doc, "--out", full)
        keyed_only = run_cli("export", "--doc", full, "--format", "csv")
        assert len(keyed_only.stdout.splitlines()) == 2 + 2
        everything = run_cli("export", "--doc", full, "--format", "csv", "--include-predicted")
        assert len(everything.stdout.splitlines()) == 2 + 11

    def test_inclusive_requires_csv(self, keypoint_doc):
        result = run_cli("export", "--doc", keypoint_doc, "--format", "json", "--inclusive")
        assert result.returncode == 2


class TestServeCommand:
    def test_missing_root_exit_2(self, tmp_path):
        result = run_cli("serve", "--root", tmp_path / "nope", "--addr", "127.0.0.1:0")
        assert result.returncode == 2

    def test_serves_on_os_assigned_port(self, tmp_path):
        corpus = tmp_path / "corpus"
        frames = [np.full((8, 8, 3), 10, dtype=np.uint8)] * 2
        make_pair_dirs(corpus / "seq-1", frames, frames)
        proc = subprocess.Popen(
            [
                sys.executable, "-m", "markbench", "serve",
                "--root", str(corpus), "--addr", "127.0.0.1:0",
            ],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        try:
            line = proc.stdout.readline().strip()
            assert line.startswith("serving on http://127.0.0.1:")
            url = line.removeprefix("serving on ")
            port = int(url.rsplit(":", 1)[1])
            assert port != 0
            for _ in range(50):
                try:
                    r = httpx.get(f"{url}/api/sequences", timeout=2)
                    break
                except httpx.TransportError:
                    import time

                    time.sleep(0.1)
            assert r.status_code == 200
            assert r.json()[0]["sequence_id"] == "seq-1"
        finally:
            proc.send_signal(signal.SIGINT)
            try:
                proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                proc.kill()


def test_usage_error_exit_2():
    assert run_cli("interpolate", "--doc").returncode == 2
    assert run_cli("no-such-command").returncode == 2
