"""Practice service: attempt recognition, verdicts, and the HTTP API.

An attempt is one practice recording submitted against a target sign.  The
pipeline scores it with the trained banks; the verdict separates the hand
component from the head component:

* ``manual_ok``: the combined-bank decision and the target lie in each
  other's confusability clusters (the hands matched the target's manual
  form up to what the recognizer can distinguish).
* ``head_ok``:   among the target's cluster, the head-only bank prefers the
  target itself.

Verdict wording follows the practice UI: "ok", "false", and "head is ok
but hands are false".
"""

from __future__ import annotations

import io
import json
import tempfile
import threading
import time
import uuid
import zipfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.responses import FileResponse

from .errors import SignTutorError
from .features import (
    AssemblyConfig,
    FeatureSequence,
    Group,
    HandObservation,
    ObservationFrame,
    ObservationSequence,
    assemble,
    trim_sequence,
)
from .fusion import ClusterMap, FusionDecision, ModelBanks, classify_sequential
from .gloves import GloveModel, naive_face_box, segment_frame
from .handshape import (
    FeatureRanges,
    ShapeClassifier,
    TemplateLibrary,
    extract_features,
    mirror_mask,
    normalize_features,
)
from .headmotion import HeadConfig, head_features
from .ingest import FeatureRecord, SignCatalog, load_feature_sequences
from .tracking import KalmanConfig, PointFlag, track_sequence


class VerdictKind(Enum):
    OK = "ok"
    FALSE = "false"
    HEAD_OK_HANDS_FALSE = "head_ok_hands_false"


VERDICT_TEXT = {
    VerdictKind.OK: "ok",
    VerdictKind.FALSE: "false",
    VerdictKind.HEAD_OK_HANDS_FALSE: "head is ok but hands are false",
}


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    manual_ok: bool
    head_ok: bool
    explanation: str

    def __post_init__(self) -> None:
        if (self.kind is VerdictKind.OK) != (self.manual_ok and self.head_ok):
            raise ValueError("kind=OK iff manual_ok and head_ok")
        if (self.kind is VerdictKind.HEAD_OK_HANDS_FALSE) != (
            self.head_ok and not self.manual_ok
        ):
            raise ValueError("kind=HEAD_OK_HANDS_FALSE iff head_ok and not manual_ok")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "text": VERDICT_TEXT[self.kind],
            "manual_ok": self.manual_ok,
            "head_ok": self.head_ok,
            "explanation": self.explanation,
        }


def verdict_from_flags(manual_ok: bool, head_ok: bool, explanation: str) -> Verdict:
    if manual_ok and head_ok:
        kind = VerdictKind.OK
    elif head_ok:
        kind = VerdictKind.HEAD_OK_HANDS_FALSE
    else:
        kind = VerdictKind.FALSE
    return Verdict(kind, manual_ok, head_ok, explanation)


@dataclass
class Attempt:
    attempt_id: str
    target: str
    source: str
    status: str = "processing"  # processing | done | failed
    verdict: Verdict | None = None
    decision: FusionDecision | None = None
    replay: dict | None = None
    created_at: float = field(default_factory=time.time)
    completed_at: float | None = None

    def to_dict(self) -> dict:
        d = {
            "id": self.attempt_id,
            "target": self.target,
            "source": self.source,
            "status": self.status,
            "created_at": self.created_at,
            "completed_at": self.completed_at,
            "verdict": self.verdict.to_dict() if self.verdict else None,
            "replay": self.replay,
        }
        if self.decision is not None:
            d["decision"] = {
                "base": self.decision.base,
                "final": self.decision.final,
                "candidates": list(self.decision.candidates),
                "combined_scores": self.decision.combined_scores,
                "nonmanual_scores": self.decision.nonmanual_scores,
            }
        return d


def _explanation(decision: FusionDecision, target: str) -> str:
    ranked = sorted(decision.combined_scores, key=decision.combined_scores.get, reverse=True)
    competitors = ", ".join(ranked[:3])
    return (
        f"decided '{decision.final}' (base '{decision.base}', target '{target}'); "
        f"closest signs: {competitors}"
    )


def recognize_features(
    rows: np.ndarray,
    layout_tag: str | None,
    target: str,
    banks: ModelBanks,
    clusters: ClusterMap,
) -> tuple[FusionDecision, Verdict]:
    """Score an assembled COMBINED sequence against a target sign."""
    decision = classify_sequential(banks, clusters, rows, layout_tag)
    target_cluster = clusters.cluster(target)
    manual_ok = target in clusters.cluster(decision.base) and decision.base in target_cluster
    nonmanual = banks.scores("nonmanual", rows, layout_tag)
    head_pick = max(sorted(target_cluster), key=lambda s: nonmanual[s])
    head_ok = head_pick == target
    verdict = verdict_from_flags(manual_ok, head_ok, _explanation(decision, target))
    return decision, verdict


def _replay_payload(rows: np.ndarray, banks: ModelBanks) -> dict:
    """Normalized hand trajectories and head strip-chart data for the UI
    overlay, straight from the feature columns."""
    manual = rows[:, banks.manual_cols]
    head = rows[:, banks.nonmanual_cols]
    per_hand = manual.shape[1] // 2
    return {
        "left": manual[:, 0:2].tolist(),
        "right": manual[:, per_hand : per_hand + 2].tolist(),
        "head": {
            "energy": head[:, 0].tolist(),
            "vx": head[:, 1].tolist(),
            "vy": head[:, 2].tolist(),
        },
    }


def recognize_attempt(
    source: FeatureRecord | np.ndarray,
    target: str,
    banks: ModelBanks,
    clusters: ClusterMap,
    layout_tag: str | None = None,
) -> Attempt:
    """Run recognition and wrap the outcome in an Attempt.

    Pipeline failures become a FALSE verdict with the diagnostic in the
    explanation instead of an exception.
    """
    if isinstance(source, FeatureRecord):
        rows = source.features.rows
        layout_tag = source.features.layout_tag
        name = source.seq_id
    else:
        rows = np.asarray(source, dtype=float)
        name = "array"
    attempt = Attempt(attempt_id=uuid.uuid4().hex, target=target, source=name)
    try:
        decision, verdict = recognize_features(rows, layout_tag, target, banks, clusters)
        attempt.decision = decision
        attempt.verdict = verdict
        attempt.replay = _replay_payload(rows, banks)
        attempt.status = "done"
    except SignTutorError as exc:
        attempt.verdict = verdict_from_flags(False, False, f"pipeline failure: {exc}")
        attempt.status = "done"
    attempt.completed_at = time.time()
    return attempt


# --- vision front end for frame-archive attempts ------------------------------------


@dataclass
class VisionAssets:
    """Trained models the raster pipeline needs; optional for feature-file
    input."""

    left_glove: GloveModel
    right_glove: GloveModel
    shape_library: TemplateLibrary | None
    shape_ranges: FeatureRanges | None
    assembly: AssemblyConfig
    head: HeadConfig = HeadConfig()
    kalman: KalmanConfig = KalmanConfig()
    n_gap: int = 6
    t_transition: int = 2


def observations_from_frames(
    frames: list[np.ndarray],
    face_boxes: list[tuple[int, int, int, int] | None],
    assets: VisionAssets,
) -> ObservationSequence:
    """segment -> track -> shape -> head for a raw clip."""
    left_masks, right_masks = [], []
    for frame in frames:
        lm, rm = segment_frame(frame, assets.left_glove, assets.right_glove)
        left_masks.append(lm)
        right_masks.append(rm)
    left_traj = track_sequence(left_masks, assets.kalman)
    right_traj = track_sequence(right_masks, assets.kalman)

    boxes = list(face_boxes)
    for i, box in enumerate(boxes):
        if box is None:
            boxes[i] = naive_face_box(frames[i])
    head_boxes = [b if b is not None else (0, 0, frames[0].shape[1], frames[0].shape[0]) for b in boxes]
    head = head_features(frames, head_boxes, assets.head)

    classifiers = (
        (ShapeClassifier(assets.shape_library), ShapeClassifier(assets.shape_library))
        if assets.shape_library
        else (None, None)
    )
    obs_frames = []
    for t in range(len(frames)):
        hands = []
        for traj, masks, mirror, clf in (
            (left_traj, left_masks, False, classifiers[0]),
            (right_traj, right_masks, True, classifiers[1]),
        ):
            p = traj.points[t]
            if p.flag is PointFlag.ABSENT:
                hands.append(None)
                continue
            shape = None
            cluster = None
            if masks[t].any() and assets.assembly.include_shape:
                mask = mirror_mask(masks[t]) if mirror else masks[t]
                try:
                    shape = extract_features(mask)
                except SignTutorError:
                    shape = None
                if shape is not None and clf is not None and assets.shape_ranges:
                    cluster = clf.observe(
                        normalize_features(shape, assets.shape_ranges)
                    ).cluster_id
            hands.append(
                HandObservation(p.x, p.y, p.vx, p.vy, shape=shape, cluster=cluster)
            )
        obs_frames.append(
            ObservationFrame(hands[0], hands[1], tuple(head.values[t]), boxes[t])
        )
    return ObservationSequence(obs_frames)


def features_from_frames(
    frames: list[np.ndarray],
    face_boxes: list[tuple[int, int, int, int] | None],
    assets: VisionAssets,
    group: Group = Group.COMBINED,
) -> FeatureSequence:
    obs = observations_from_frames(frames, face_boxes, assets)
    trimmed = trim_sequence(obs, assets.n_gap, assets.t_transition)
    return assemble(trimmed, group, assets.assembly)


# --- attempt store -------------------------------------------------------------------


class AttemptStore:
    """Append-only JSONL store with an in-memory index; the lock makes the
    file the single serialized writer."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._index: dict[str, dict] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    d = json.loads(line)
                    self._index[d["id"]] = d

    def put(self, attempt: Attempt) -> None:
        d = attempt.to_dict()
        with self._lock:
            self._index[attempt.attempt_id] = d
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(d) + "\n")

    def get(self, attempt_id: str) -> dict | None:
        with self._lock:
            return self._index.get(attempt_id)


# --- HTTP app ------------------------------------------------------------------------


@dataclass
class ServiceConfig:
    banks_path: str
    catalog_path: str | None = None
    store_path: str = "attempts.jsonl"
    port: int = 8000
    workers: int = 2
    clips_dir: str | None = None  # static reference clips, served verbatim
    gloves_path: str | None = None
    shapelib_path: str | None = None


def create_app(
    banks: ModelBanks,
    clusters: ClusterMap,
    catalog: SignCatalog,
    store: AttemptStore,
    workers: int = 2,
    clips_dir: str | None = None,
    vision_assets: VisionAssets | None = None,
):
    app = FastAPI(title="signtutor")
    executor = ThreadPoolExecutor(max_workers=workers)
    pending: dict[str, bool] = {}
    pending_lock = threading.Lock()

    def clip_url(sign_id: str) -> str | None:
        if clips_dir and (Path(clips_dir) / f"{sign_id}.mp4").exists():
            return f"/api/signs/{sign_id}/clip"
        return None

    @app.get("/api/health")
    def health():
        return {"status": "ok", "signs": len(catalog)}

    @app.get("/api/signs")
    def signs():
        return [
            {
                "id": s.sign_id,
                "name": s.name,
                "manual": s.manual_desc,
                "nonmanual": s.nonmanual_desc,
                "group": s.group_id,
                "clip_url": clip_url(s.sign_id),
            }
            for s in catalog.signs
        ]

    @app.get("/api/signs/{sign_id}")
    def sign(sign_id: str):
        try:
            s = catalog.get(sign_id)
        except KeyError:
            raise HTTPException(404, f"unknown sign {sign_id!r}")
        return {
            "id": s.sign_id,
            "name": s.name,
            "manual": s.manual_desc,
            "nonmanual": s.nonmanual_desc,
            "group": s.group_id,
            "clip_url": clip_url(s.sign_id),
        }

    @app.get("/api/signs/{sign_id}/clip")
    def clip(sign_id: str):
        if not clips_dir:
            raise HTTPException(404, "no reference clips configured")
        path = Path(clips_dir) / f"{sign_id}.mp4"
        if not path.exists():
            raise HTTPException(404, f"no clip for {sign_id!r}")
        return FileResponse(path)

    def run_attempt(attempt_id: str, target: str, filename: str, payload: bytes):
        attempt = Attempt(attempt_id=attempt_id, target=target, source=filename)
        try:
            if filename.endswith(".zip"):
                if vision_assets is None:
                    raise SignTutorError("frame-archive attempts need vision assets (glove models)")
                rows, tag = _rows_from_zip(payload, vision_assets)
            else:
                rows, tag = _rows_from_csv(payload)
            done = recognize_attempt(
                FeatureRecord(filename, target, FeatureSequence(Group.COMBINED, rows, tag)),
                target,
                banks,
                clusters,
            )
            attempt = done
            attempt.attempt_id = attempt_id
            attempt.source = filename
        except SignTutorError as exc:
            attempt.status = "done"
            attempt.verdict = verdict_from_flags(False, False, f"pipeline failure: {exc}")
            attempt.completed_at = time.time()
        except Exception as exc:  # defensive: store the failure, never crash a worker
            attempt.status = "failed"
            attempt.completed_at = time.time()
            attempt.verdict = verdict_from_flags(False, False, f"internal error: {exc}")
        store.put(attempt)
        with pending_lock:
            pending.pop(attempt_id, None)

    def _rows_from_csv(payload: bytes) -> tuple[np.ndarray, str]:
        with tempfile.NamedTemporaryFile(suffix=".csv", delete=False) as tmp:
            tmp.write(payload)
            tmp_path = tmp.name
        try:
            records = load_feature_sequences(tmp_path)
        finally:
            Path(tmp_path).unlink(missing_ok=True)
        if not records:
            raise SignTutorError("feature file contains no sequences")
        return records[0].features.rows, records[0].features.layout_tag

    def _rows_from_zip(payload: bytes, assets: VisionAssets) -> tuple[np.ndarray, str]:
        from .ingest import load_sequence

        with tempfile.TemporaryDirectory() as tmpdir:
            with zipfile.ZipFile(io.BytesIO(payload)) as zf:
                zf.extractall(tmpdir)
            root = Path(tmpdir)
            candidates = [root] + [p for p in root.iterdir() if p.is_dir()]
            seq = None
            for c in candidates:
                try:
                    seq = load_sequence(c)
                    break
                except SignTutorError:
                    continue
            if seq is None:
                raise SignTutorError("archive does not contain a frame sequence")
            boxes = seq.face_boxes or [None] * len(seq.frames)
            fs = features_from_frames(seq.frames, boxes, assets)
            return fs.rows, fs.layout_tag

    @app.post("/api/attempts", status_code=202)
    async def post_attempt(target: str = Form(...), file: UploadFile | None = File(None)):
        if target not in catalog:
            raise HTTPException(400, f"unknown target sign {target!r}")
        if file is None:
            raise HTTPException(400, "an attempt file (feature csv or frames zip) is required")
        payload = await file.read()
        attempt_id = uuid.uuid4().hex
        with pending_lock:
            pending[attempt_id] = True
        executor.submit(run_attempt, attempt_id, target, file.filename or "attempt.csv", payload)
        return {"id": attempt_id, "status": "processing"}

    @app.get("/api/attempts/{attempt_id}")
    def get_attempt(attempt_id: str):
        d = store.get(attempt_id)
        if d is not None:
            return d
        with pending_lock:
            if attempt_id in pending:
                return {"id": attempt_id, "status": "processing", "verdict": None}
        raise HTTPException(404, f"unknown attempt {attempt_id!r}")

    return app


def build_app(config: ServiceConfig):
    """Assemble the app from on-disk assets; raises SignTutorError with a
    clean message when anything is missing or stale."""
    from .fusion import load_banks
    from .gloves import load_glove_models

    if not Path(config.banks_path).exists():
        raise SignTutorError(f"model banks not found: {config.banks_path}")
    banks, clusters, _ = load_banks(config.banks_path)
    if clusters is None:
        raise SignTutorError(f"{config.banks_path} carries no cluster map; re-run training")
    if config.catalog_path:
        catalog = SignCatalog.load(config.catalog_path)
    else:
        from .catalog import demo_catalog

        catalog = demo_catalog()
    vision_assets = None
    if config.gloves_path:
        left, right = load_glove_models(config.gloves_path)
        library = (
            TemplateLibrary.load(config.shapelib_path) if config.shapelib_path else None
        )
        vision_assets = VisionAssets(
            left, right, library, None, AssemblyConfig(include_shape=False)
        )
    store = AttemptStore(config.store_path)
    return create_app(
        banks,
        clusters,
        catalog,
        store,
        workers=config.workers,
        clips_dir=config.clips_dir,
        vision_assets=vision_assets,
    )


def serve(config: ServiceConfig) -> None:
    import uvicorn

    app = build_app(config)
    uvicorn.run(app, host="127.0.0.1", port=config.port)
