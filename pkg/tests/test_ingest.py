import json

import numpy as np
import pytest
from PIL import Image

from signtutor.errors import LoadError, ParseError
from signtutor.features import FeatureSequence, Group
from signtutor.ingest import (
    CatalogSign,
    FeatureRecord,
    FrameSequence,
    SignCatalog,
    load_feature_sequences,
    load_sequence,
    save_sequence,
    write_feature_file,
)


def write_frames(path, n=3, size=(32, 24), meta=None):
    rng = np.random.default_rng(0)
    path.mkdir(parents=True, exist_ok=True)
    for i in range(n):
        arr = rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8)
        Image.fromarray(arr).save(path / f"frame_{i:05d}.png")
    if meta is not None:
        (path / "meta.json").write_text(json.dumps(meta), encoding="utf-8")


def test_load_sequence_basic(tmp_path):
    write_frames(tmp_path / "seq", n=3, meta={"fps": 25, "label": "here", "subject": "s1"})
    seq = load_sequence(tmp_path / "seq")
    assert len(seq) == 3
    assert seq.fps == 25
    assert seq.label == "here"
    assert seq.subject == "s1"


def test_load_sequence_odd_sized_frame_names_culprit(tmp_path):
    d = tmp_path / "seq"
    write_frames(d, n=3)
    Image.fromarray(np.zeros((10, 10, 3), dtype=np.uint8)).save(d / "frame_00002.png")
    with pytest.raises(LoadError, match="frame_00002"):
        load_sequence(d)


def test_load_sequence_missing_frame_names_culprit(tmp_path):
    d = tmp_path / "seq"
    write_frames(d, n=4)
    (d / "frame_00001.png").unlink()
    with pytest.raises(LoadError, match="frame_00001"):
        load_sequence(d)


def test_load_sequence_malformed_sidecar_cites_line(tmp_path):
    d = tmp_path / "seq"
    write_frames(d, n=2)
    (d / "meta.json").write_text('{\n  "fps": 25,\n  broken\n}', encoding="utf-8")
    with pytest.raises(ParseError, match="line 3"):
        load_sequence(d)


def test_load_sequence_face_boxes(tmp_path):
    d = tmp_path / "seq"
    write_frames(d, n=2, meta={"fps": 25, "face_boxes": [[1, 2, 5, 6], None]})
    seq = load_sequence(d)
    assert seq.face_boxes == [(1, 2, 5, 6), None]


def test_load_sequence_face_box_out_of_bounds(tmp_path):
    d = tmp_path / "seq"
    write_frames(d, n=1, size=(16, 16), meta={"face_boxes": [[10, 10, 10, 10]]})
    with pytest.raises(LoadError):
        load_sequence(d)


def test_sequence_round_trip_lossless(tmp_path):
    d = tmp_path / "orig"
    write_frames(d, n=3, meta={"fps": 30, "label": "x", "subject": "s",
                               "face_boxes": [[0, 0, 4, 4]] * 3})
    seq = load_sequence(d)
    save_sequence(seq, tmp_path / "copy")
    again = load_sequence(tmp_path / "copy")
    assert again.fps == seq.fps and again.label == seq.label
    assert again.face_boxes == seq.face_boxes
    for a, b in zip(seq.frames, again.frames):
        np.testing.assert_array_equal(a, b)


def test_frame_sequence_validates_fps():
    with pytest.raises(ValueError):
        FrameSequence(frames=[], fps=0)


# --- catalog --------------------------------------------------------------------


def demo_signs():
    return [
        CatalogSign("here", "here", "circle", "nod", "here-group"),
        CatalogSign("is-here", "is here?", "circle", "brows up", "here-group"),
        CatalogSign("clean", "clean", "sweep", "", "clean-group"),
    ]


def test_catalog_groups_and_lookup():
    cat = SignCatalog(demo_signs())
    assert cat.group_of("is-here") == "here-group"
    assert cat.groups()["here-group"] == ["here", "is-here"]
    assert "clean" in cat and "nope" not in cat


def test_catalog_unique_ids_enforced():
    signs = demo_signs() + [CatalogSign("here", "dup", "", "", "g")]
    with pytest.raises(ValueError):
        SignCatalog(signs)


def test_catalog_json_round_trip(tmp_path):
    cat = SignCatalog(demo_signs())
    cat.save(tmp_path / "cat.json")
    again = SignCatalog.load(tmp_path / "cat.json")
    assert again.signs == cat.signs


# --- feature files -----------------------------------------------------------------


def make_records():
    rng = np.random.default_rng(7)
    recs = []
    for i, label in enumerate(["a", "a", "b"]):
        rows = rng.normal(size=(10, 4))
        recs.append(
            FeatureRecord(f"s{i}", label, FeatureSequence(Group.COMBINED, rows, "tag-1"))
        )
    return recs


def test_feature_file_round_trip(tmp_path):
    recs = make_records()
    path = tmp_path / "features.csv"
    write_feature_file(path, recs)
    loaded = load_feature_sequences(path)
    assert [r.seq_id for r in loaded] == ["s0", "s1", "s2"]
    assert [r.label for r in loaded] == ["a", "a", "b"]
    for got, want in zip(loaded, recs):
        assert got.features.group is Group.COMBINED
        assert got.features.layout_tag == "tag-1"
        np.testing.assert_array_equal(got.features.rows, want.features.rows)


def test_feature_file_two_sequences_dims(tmp_path):
    rng = np.random.default_rng(1)
    recs = [
        FeatureRecord("s0", "x", FeatureSequence(Group.MANUAL, rng.normal(size=(10, 4)))),
        FeatureRecord("s1", "y", FeatureSequence(Group.MANUAL, rng.normal(size=(10, 4)))),
    ]
    path = tmp_path / "f.csv"
    write_feature_file(path, recs)
    loaded = load_feature_sequences(path)
    assert len(loaded) == 2
    for r in loaded:
        assert r.features.rows.shape == (10, 4)


def test_feature_file_empty(tmp_path):
    path = tmp_path / "empty.csv"
    write_feature_file(path, [])
    assert load_feature_sequences(path) == []


def test_feature_file_ragged_row_cites_row_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        "seq_id,frame,label,f0,f1\n"
        "s0,0,a,1.0,2.0\n"
        "s0,1,a,1.0\n",
        encoding="utf-8",
    )
    with pytest.raises(ParseError, match="row 3"):
        load_feature_sequences(path)
