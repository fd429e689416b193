import json

import pytest
from hypothesis import given, settings

from markbench.model import (
    AnnotationDocument,
    BoundingBox,
    BoxSource,
    KeyedBox,
    SequencePair,
    Track,
)
from markbench.store import (
    CSV_HEADER,
    DocumentFormatError,
    UnsupportedSchemaVersion,
    compute_stats,
    document_from_dict,
    document_to_dict,
    dumps_document,
    export_csv,
    load_document,
    loads_document,
    save_document,
)

from conftest import documents


def kb(frame, source=BoxSource.MANUAL, box_id=None, **extras):
    return KeyedBox(
        frame=frame,
        box=BoundingBox(frame, 0, frame + 10, 10),
        source=source,
        box_id=box_id or f"b{frame}",
        extras=extras,
    )


def sample_doc():
    return AnnotationDocument(
        sequence_id="seq-7",
        version=4,
        tracks=(
            Track(
                track_id="t1",
                label="inserted-object",
                keyed_boxes=(kb(0), kb(1, source=BoxSource.PREDICTED), kb(2, source=BoxSource.CORRECTED)),
            ),
            Track(track_id="t2", keyed_boxes=(kb(5),)),
            Track(track_id="t3"),
        ),
    )


def pair(sequence_id="seq-7", frame_count=100):
    return SequencePair(
        sequence_id=sequence_id,
        original_source="/nowhere/original",
        forged_source="/nowhere/forged",
        width=1280,
        height=720,
        frame_count=frame_count,
    )


class TestRoundTrip:
    def test_empty_document(self, tmp_path):
        doc = AnnotationDocument(sequence_id="empty")
        path = tmp_path / "doc.json"
        save_document(doc, path)
        assert load_document(path) == doc

    def test_mixed_sources(self, tmp_path):
        doc = sample_doc()
        path = tmp_path / "doc.json"
        save_document(doc, path)
        loaded = load_document(path)
        assert loaded == doc
        assert loaded.tracks[0].keyed_boxes[1].source is BoxSource.PREDICTED
        assert loaded.version == 4

    def test_string_round_trip(self):
        doc = sample_doc()
        assert loads_document(dumps_document(doc)) == doc

    def test_unknown_fields_preserved(self, tmp_path):
        data = document_to_dict(sample_doc())
        data["reviewed_by"] = "am"
        data["tracks"][0]["color"] = [255, 0, 0]
        data["tracks"][0]["boxes"][0]["confidence"] = 0.9
        doc = document_from_dict(data)
        assert document_to_dict(doc) == data
        path = tmp_path / "doc.json"
        save_document(doc, path)
        assert json.loads(path.read_text()) == data

    def test_atomic_save_leaves_no_temp(self, tmp_path):
        save_document(sample_doc(), tmp_path / "doc.json")
        assert [p.name for p in tmp_path.iterdir()] == ["doc.json"]

    @settings(max_examples=50)
    @given(documents())
    def test_random_documents(self, doc):
        assert loads_document(dumps_document(doc)) == doc


class TestLoadErrors:
    def test_newer_schema_version(self):
        data = document_to_dict(AnnotationDocument(sequence_id="s"))
        data["schema_version"] = 99
        with pytest.raises(UnsupportedSchemaVersion, match="99"):
            document_from_dict(data)

    def test_malformed_json_is_position_bearing(self):
        with pytest.raises(json.JSONDecodeError) as info:
            loads_document('{"schema_version": 1,,}')
        assert info.value.pos > 0

    def test_missing_field_names_path(self):
        data = document_to_dict(sample_doc())
        del data["tracks"][1]["label"]
        with pytest.raises(DocumentFormatError, match=r"\$\.tracks\[1\]\.label"):
            document_from_dict(data)

    def test_bad_coordinate_type_names_path(self):
        data = document_to_dict(sample_doc())
        data["tracks"][0]["boxes"][2]["x1"] = "ten"
        with pytest.raises(DocumentFormatError, match=r"\$\.tracks\[0\]\.boxes\[2\]\.x1"):
            document_from_dict(data)

    def test_unknown_source_rejected(self):
        data = document_to_dict(sample_doc())
        data["tracks"][0]["boxes"][0]["source"] = "guessed"
        with pytest.raises(DocumentFormatError, match="guessed"):
            document_from_dict(data)

    def test_unsorted_frames_rejected_with_path(self):
        data = document_to_dict(sample_doc())
        data["tracks"][0]["boxes"].reverse()
        with pytest.raises(DocumentFormatError, match=r"\$\.tracks\[0\]"):
            document_from_dict(data)


class TestExportCsv:
    def test_empty_document_has_no_data_rows(self):
        text = export_csv(AnnotationDocument(sequence_id="s"))
        comment, header = text.splitlines()
        assert comment.startswith("#")
        assert header == CSV_HEADER
        assert len(text.splitlines()) == 2

    def test_predicted_rows_excluded_by_default(self):
        track = Track(
            track_id="t",
            keyed_boxes=tuple(
                [kb(0)] + [kb(f, source=BoxSource.PREDICTED) for f in range(1, 10)]
            ),
        )
        doc = AnnotationDocument(sequence_id="s", tracks=(track,))
        rows = export_csv(doc, include_predicted=False).splitlines()[2:]
        assert len(rows) == 1
        rows = export_csv(doc, include_predicted=True).splitlines()[2:]
        assert len(rows) == 10

    def test_rows_sorted_and_formatted(self):
        doc = AnnotationDocument(
            sequence_id="s",
            tracks=(
                Track(track_id="zz", keyed_boxes=(kb(1),)),
                Track(track_id="aa", keyed_boxes=(kb(9), kb(11))),
            ),
        )
        rows = export_csv(doc).splitlines()[2:]
        assert rows == [
            "s,aa,9,9,0,19,10,manual",
            "s,aa,11,11,0,21,10,manual",
            "s,zz,1,1,0,11,10,manual",
        ]

    def test_inclusive_corners_shift(self):
        doc = AnnotationDocument(sequence_id="s", tracks=(Track(track_id="t", keyed_boxes=(kb(0),)),))
        row = export_csv(doc, inclusive=True).splitlines()[2]
        assert row == "s,t,0,0,0,9,9,manual"
        assert "inclusive" in export_csv(doc, inclusive=True).splitlines()[0]

    def test_lf_line_endings(self):
        text = export_csv(sample_doc())
        assert "\r" not in text
        assert text.endswith("\n")


class TestComputeStats:
    def test_published_box_ratio(self):
        # 586 keypoint boxes out of 11837 total
        tracks = [
            Track(
                track_id="big",
                keyed_boxes=tuple(
                    kb(f, source=BoxSource.MANUAL if f < 584 else BoxSource.PREDICTED)
                    for f in range(11074)
                ),
            ),
            Track(
                track_id="extra",
                keyed_boxes=tuple(
                    kb(f, source=BoxSource.MANUAL if f in (0, 762) else BoxSource.PREDICTED)
                    for f in range(763)
                ),
            ),
        ]
        doc = AnnotationDocument(sequence_id="seq-7", tracks=tuple(tracks))
        stats = compute_stats([(doc, pair(frame_count=40000)), (AnnotationDocument(sequence_id="o"), pair("o", 7368))])
        assert stats.manual_boxes == 586
        assert stats.total_boxes == 11837
        assert stats.box_ratio == "4.95%"
        assert stats.tampered_frames == 11074
        assert stats.total_frames == 47368
        assert stats.frame_ratio == "23.38%"

    def test_empty_corpus(self):
        stats = compute_stats([])
        assert (stats.tampered_frames, stats.total_frames) == (0, 0)
        assert (stats.manual_boxes, stats.total_boxes) == (0, 0)
        assert stats.frame_ratio == "0.00%"
        assert stats.box_ratio == "0.00%"

    def test_rounding_is_half_up(self):
        # 1/8 = 12.5 hundredths of a percent… exactly at the tie
        stats = compute_stats(
            [
                (
                    AnnotationDocument(
                        sequence_id="s",
                        tracks=(Track(track_id="t", keyed_boxes=(kb(0),)),),
                    ),
                    pair(frame_count=800),
                )
            ]
        )
        assert stats.frame_ratio == "0.13%"  # 0.125 rounds up

    def test_permutation_invariance(self):
        corpus = [
            (sample_doc(), pair(frame_count=50)),
            (AnnotationDocument(sequence_id="x"), pair("x", 10)),
        ]
        assert compute_stats(corpus) == compute_stats(list(reversed(corpus)))

    def test_multiple_boxes_one_frame_counts_once(self):
        doc = AnnotationDocument(
            sequence_id="s",
            tracks=(
                Track(track_id="a", keyed_boxes=(kb(3),)),
                Track(track_id="b", keyed_boxes=(kb(3),)),
            ),
        )
        stats = compute_stats([(doc, pair(frame_count=10))])
        assert stats.tampered_frames == 1
        assert stats.total_boxes == 2
