"""CLI round trip through the raster pipeline: train-gloves -> extract ->
shapes, driven by the scripted demo clip."""

import numpy as np
import pytest
from PIL import Image

from signtutor.cli import main as cli_main
from signtutor.features import Group
from signtutor.ingest import FrameSequence, load_feature_sequences, save_sequence
from signtutor.synth import DemoClipSpec, make_demo_clip


@pytest.fixture(scope="module")
def clip_workspace(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("vision")
    clip = make_demo_clip(DemoClipSpec(n_frames=30, lead_in=4))

    snapdir = tmp / "snapshots"
    snapdir.mkdir()
    active = [i for i, c in enumerate(clip.left_centers) if c is not None]
    for k, i in enumerate([active[1], active[len(active) // 2], active[-2]]):
        Image.fromarray(clip.frames[i]).save(snapdir / f"frame_{k:05d}.png")
        Image.fromarray((clip.left_masks[i] * 255).astype(np.uint8)).save(
            snapdir / f"mask_left_{k:05d}.png"
        )
        Image.fromarray((clip.right_masks[i] * 255).astype(np.uint8)).save(
            snapdir / f"mask_right_{k:05d}.png"
        )

    seqdir = tmp / "sequence"
    save_sequence(
        FrameSequence(
            frames=clip.frames,
            fps=25.0,
            face_boxes=list(clip.face_boxes),
            label="demo",
        ),
        seqdir,
    )
    mask_png = tmp / "one_mask.png"
    Image.fromarray((clip.left_masks[active[3]] * 255).astype(np.uint8)).save(mask_png)
    return tmp, snapdir, seqdir, mask_png


def test_train_gloves_and_extract(clip_workspace, capsys):
    tmp, snapdir, seqdir, _ = clip_workspace
    gloves = tmp / "gloves.json"
    rc = cli_main(["train-gloves", "--snapshots", str(snapdir), "--out", str(gloves)])
    assert rc == 0
    assert gloves.exists()

    out_csv = tmp / "features.csv"
    rc = cli_main(
        ["extract", "--input", str(seqdir), "--gloves", str(gloves), "--out", str(out_csv)]
    )
    assert rc == 0
    records = load_feature_sequences(out_csv)
    assert len(records) == 1
    rec = records[0]
    assert rec.label == "demo"
    assert rec.features.group is Group.COMBINED
    # No shape ranges supplied -> motion-only manual block + head channels.
    assert rec.features.dim == 15
    assert np.isfinite(rec.features.rows).all()
    assert len(rec.features.rows) > 10


def test_shapes_command_prints_features(clip_workspace, capsys):
    tmp, _, _, mask_png = clip_workspace
    rc = cli_main(["shapes", "--mask", str(mask_png)])
    assert rc == 0
    out = capsys.readouterr().out
    lines = [l for l in out.splitlines() if l.strip()]
    assert len(lines) == 19
    assert lines[0].startswith("f1 ")
