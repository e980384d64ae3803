"""Service construction from on-disk assets, plus the frames-archive
attempt route (vision pipeline behind the HTTP surface)."""

import io
import time
import zipfile

import numpy as np
import pytest
from fastapi.testclient import TestClient

from signtutor.catalog import demo_catalog
from signtutor.errors import SignTutorError
from signtutor.features import AssemblyConfig
from signtutor.fusion import save_banks
from signtutor.gloves import save_glove_models, train_glove_model
from signtutor.ingest import FrameSequence, save_sequence
from signtutor.service import (
    AttemptStore,
    ServiceConfig,
    VisionAssets,
    build_app,
    create_app,
)
from signtutor.synth import DemoClipSpec, make_demo_clip
from tests.test_service import wait_done


@pytest.fixture(scope="module")
def demo_assets(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("assets")
    clip = make_demo_clip(DemoClipSpec(n_frames=30, lead_in=4))
    active = [i for i, c in enumerate(clip.left_centers) if c is not None]
    snaps = [active[1], active[len(active) // 2], active[-2]]
    left = train_glove_model([(clip.frames[i], clip.left_masks[i]) for i in snaps])
    right = train_glove_model([(clip.frames[i], clip.right_masks[i]) for i in snaps])
    gloves_path = tmp / "gloves.json"
    save_glove_models(gloves_path, left, right)

    seqdir = tmp / "sequence"
    save_sequence(
        FrameSequence(frames=clip.frames, fps=25.0, face_boxes=list(clip.face_boxes)),
        seqdir,
    )
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for p in sorted(seqdir.iterdir()):
            zf.write(p, arcname=p.name)
    return tmp, gloves_path, buf.getvalue(), (left, right)


def test_build_app_from_disk(acceptance_world, demo_assets, tmp_path):
    world = acceptance_world
    tmp, gloves_path, _, _ = demo_assets
    banks_path = tmp_path / "banks.json"
    save_banks(banks_path, world.banks, world.clusters)
    config = ServiceConfig(
        banks_path=str(banks_path),
        store_path=str(tmp_path / "attempts.jsonl"),
        gloves_path=str(gloves_path),
    )
    app = build_app(config)
    with TestClient(app) as c:
        assert c.get("/api/health").json()["status"] == "ok"
        # Default catalog is the built-in demo set.
        assert len(c.get("/api/signs").json()) == len(demo_catalog())


def test_build_app_requires_banks_and_clusters(acceptance_world, tmp_path):
    with pytest.raises(SignTutorError, match="not found"):
        build_app(ServiceConfig(banks_path=str(tmp_path / "missing.json")))
    banks_path = tmp_path / "noclusters.json"
    save_banks(banks_path, acceptance_world.banks, clusters=None)
    with pytest.raises(SignTutorError, match="cluster"):
        build_app(ServiceConfig(banks_path=str(banks_path)))


def test_zip_attempt_runs_vision_pipeline(acceptance_world, demo_assets, tmp_path):
    world = acceptance_world
    tmp, gloves_path, zip_bytes, (left, right) = demo_assets
    assets = VisionAssets(left, right, None, None, AssemblyConfig(include_shape=False))
    store = AttemptStore(tmp_path / "attempts.jsonl")
    app = create_app(
        world.banks,
        world.clusters,
        world.data.catalog,
        store,
        workers=1,
        vision_assets=assets,
    )
    with TestClient(app) as c:
        r = c.post(
            "/api/attempts",
            data={"target": "g0v0"},
            files={"file": ("clip.zip", zip_bytes, "application/zip")},
        )
        assert r.status_code == 202
        body = wait_done(c, r.json()["id"], timeout=60.0)
        assert body["status"] == "done"
        # The demo clip is not a trained sign; the contract is that the
        # pipeline completes and yields a well-formed verdict + replay.
        assert body["verdict"]["kind"] in ("ok", "false", "head_ok_hands_false")
        assert body["replay"] is None or "left" in body["replay"]


def test_reference_clips_served_verbatim(acceptance_world, tmp_path):
    world = acceptance_world
    clips = tmp_path / "clips"
    clips.mkdir()
    payload = b"\x00\x00\x00\x18ftypmp42 fake clip bytes"
    (clips / "g0v0.mp4").write_bytes(payload)
    store = AttemptStore(tmp_path / "attempts.jsonl")
    app = create_app(
        world.banks, world.clusters, world.data.catalog, store,
        workers=1, clips_dir=str(clips),
    )
    with TestClient(app) as c:
        sign = c.get("/api/signs/g0v0").json()
        assert sign["clip_url"] == "/api/signs/g0v0/clip"
        got = c.get("/api/signs/g0v0/clip")
        assert got.status_code == 200
        assert got.content == payload
        # Signs without a clip expose no URL and 404 on the clip route.
        other = c.get("/api/signs/g0v1").json()
        assert other["clip_url"] is None
        assert c.get("/api/signs/g0v1/clip").status_code == 404


def test_zip_attempt_without_vision_assets_fails_cleanly(acceptance_world, demo_assets, tmp_path):
    world = acceptance_world
    _, _, zip_bytes, _ = demo_assets
    store = AttemptStore(tmp_path / "attempts.jsonl")
    app = create_app(
        world.banks, world.clusters, world.data.catalog, store, workers=1
    )
    with TestClient(app) as c:
        r = c.post(
            "/api/attempts",
            data={"target": "g0v0"},
            files={"file": ("clip.zip", zip_bytes, "application/zip")},
        )
        assert r.status_code == 202
        body = wait_done(c, r.json()["id"])
        assert body["verdict"]["kind"] == "false"
        assert "vision assets" in body["verdict"]["explanation"]
