"""Dataset loading: frame-directory sequences, sign catalogs, feature files.

A recorded sequence is a directory of numbered PNG frames plus a
``meta.json`` sidecar (fps, label, subject, optional per-frame face boxes).
Feature files are plain CSV, one row per frame, with an optional leading
``# layout:`` comment carrying the modality group and layout tag.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from PIL import Image

from .errors import LoadError, ParseError
from .features import FeatureSequence, Group

FRAME_PATTERN = re.compile(r"^frame_(\d{5})\.png$")


@dataclass
class FrameSequence:
    frames: list[np.ndarray]  # RGB uint8, one resolution
    fps: float = 25.0
    face_boxes: list[tuple[int, int, int, int] | None] | None = None
    label: str | None = None
    subject: str | None = None

    def __post_init__(self) -> None:
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.frames:
            shape = self.frames[0].shape
            for i, f in enumerate(self.frames):
                if f.shape != shape:
                    raise ValueError(f"frame {i} has resolution {f.shape[:2]}, expected {shape[:2]}")
        if self.face_boxes is not None:
            if len(self.face_boxes) != len(self.frames):
                raise ValueError("face_boxes must have one entry per frame")
            for i, box in enumerate(self.face_boxes):
                if box is None:
                    continue
                x, y, w, h = box
                height, width = self.frames[i].shape[:2]
                if x < 0 or y < 0 or w <= 0 or h <= 0 or x + w > width or y + h > height:
                    raise ValueError(f"face box {box} at frame {i} lies outside the image")

    def __len__(self) -> int:
        return len(self.frames)


def load_sequence(path: str | Path) -> FrameSequence:
    """Load ``frame_%05d.png`` files plus the ``meta.json`` sidecar."""
    path = Path(path)
    if not path.is_dir():
        raise LoadError(f"{path} is not a directory")
    numbered = {}
    for p in path.iterdir():
        m = FRAME_PATTERN.match(p.name)
        if m:
            numbered[int(m.group(1))] = p
    if not numbered:
        raise LoadError(f"no frame_%05d.png files in {path}")
    indices = sorted(numbered)
    for expect, got in enumerate(indices):
        if got != expect:
            raise LoadError(f"missing frame frame_{expect:05d}.png in {path}")

    frames = []
    for idx in indices:
        try:
            with Image.open(numbered[idx]) as img:
                frames.append(np.asarray(img.convert("RGB")))
        except OSError as exc:
            raise LoadError(f"cannot read frame_{idx:05d}.png: {exc}") from exc
    shape = frames[0].shape
    for idx, f in zip(indices, frames):
        if f.shape != shape:
            raise LoadError(
                f"frame_{idx:05d}.png has resolution {f.shape[1]}x{f.shape[0]}, "
                f"expected {shape[1]}x{shape[0]}"
            )

    meta_path = path / "meta.json"
    meta = {}
    if meta_path.exists():
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{meta_path}: line {exc.lineno}: {exc.msg}") from exc
    boxes = meta.get("face_boxes")
    if boxes is not None:
        boxes = [tuple(b) if b is not None else None for b in boxes]
    try:
        return FrameSequence(
            frames=frames,
            fps=float(meta.get("fps", 25.0)),
            face_boxes=boxes,
            label=meta.get("label"),
            subject=meta.get("subject"),
        )
    except ValueError as exc:
        raise LoadError(f"{path}: {exc}") from exc


def save_sequence(seq: FrameSequence, path: str | Path) -> None:
    """Inverse of load_sequence; pixel and metadata lossless."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(seq.frames):
        Image.fromarray(frame).save(path / f"frame_{i:05d}.png")
    meta = {
        "fps": seq.fps,
        "label": seq.label,
        "subject": seq.subject,
        "face_boxes": None
        if seq.face_boxes is None
        else [list(b) if b is not None else None for b in seq.face_boxes],
    }
    (path / "meta.json").write_text(json.dumps(meta), encoding="utf-8")


# --- sign catalog ---------------------------------------------------------------


@dataclass(frozen=True)
class CatalogSign:
    sign_id: str
    name: str
    manual_desc: str
    nonmanual_desc: str
    group_id: str


@dataclass
class SignCatalog:
    signs: list[CatalogSign]

    def __post_init__(self) -> None:
        ids = [s.sign_id for s in self.signs]
        if len(set(ids)) != len(ids):
            raise ValueError("sign ids must be unique")

    def __len__(self) -> int:
        return len(self.signs)

    def get(self, sign_id: str) -> CatalogSign:
        for s in self.signs:
            if s.sign_id == sign_id:
                return s
        raise KeyError(sign_id)

    def __contains__(self, sign_id: str) -> bool:
        return any(s.sign_id == sign_id for s in self.signs)

    def groups(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for s in self.signs:
            out.setdefault(s.group_id, []).append(s.sign_id)
        return out

    def group_of(self, sign_id: str) -> str:
        return self.get(sign_id).group_id

    def to_dict(self) -> dict:
        return {
            "signs": [
                {
                    "id": s.sign_id,
                    "name": s.name,
                    "manual": s.manual_desc,
                    "nonmanual": s.nonmanual_desc,
                    "group": s.group_id,
                }
                for s in self.signs
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SignCatalog":
        return cls(
            [
                CatalogSign(s["id"], s["name"], s.get("manual", ""), s.get("nonmanual", ""), s["group"])
                for s in d["signs"]
            ]
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SignCatalog":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# --- feature files ----------------------------------------------------------------


class FeatureRecord(NamedTuple):
    seq_id: str
    label: str
    features: FeatureSequence


def write_feature_file(path: str | Path, records: Sequence[FeatureRecord]) -> None:
    """CSV with header ``seq_id,frame,label,f0..fK``; a leading comment line
    carries the group and layout tag."""
    if not records:
        Path(path).write_text("", encoding="utf-8")
        return
    dim = records[0].features.dim
    group = records[0].features.group
    tag = records[0].features.layout_tag
    lines = [f"# layout: {group.value} {tag}".rstrip()]
    lines.append("seq_id,frame,label," + ",".join(f"f{i}" for i in range(dim)))
    for rec in records:
        if rec.features.dim != dim:
            raise ValueError("all records in one file must share a dimension")
        for t, row in enumerate(rec.features.rows):
            values = ",".join(repr(float(v)) for v in row)
            lines.append(f"{rec.seq_id},{t},{rec.label},{values}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_feature_sequences(path: str | Path) -> list[FeatureRecord]:
    """Parse a feature CSV back into per-sequence records (file order)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    group = Group.COMBINED
    tag = ""
    i = 0
    if i < len(lines) and lines[i].startswith("#"):
        m = re.match(r"#\s*layout:\s*(\S+)(?:\s+(.*))?$", lines[i])
        if m:
            try:
                group = Group(m.group(1))
            except ValueError as exc:
                raise ParseError(f"{path}: line 1: unknown group {m.group(1)!r}") from exc
            tag = (m.group(2) or "").strip()
        i += 1
    if i >= len(lines) or not lines[i].strip():
        return []
    header = lines[i].split(",")
    if header[:3] != ["seq_id", "frame", "label"]:
        raise ParseError(f"{path}: line {i + 1}: expected header seq_id,frame,label,f0..")
    dim = len(header) - 3
    i += 1

    order: list[str] = []
    rows: dict[str, list[list[float]]] = {}
    labels: dict[str, str] = {}
    for lineno, line in enumerate(lines[i:], start=i + 1):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3 + dim:
            raise ParseError(
                f"{path}: row {lineno}: {len(parts)} columns, expected {3 + dim}"
            )
        seq_id, _, label = parts[0], parts[1], parts[2]
        if seq_id not in rows:
            rows[seq_id] = []
            labels[seq_id] = label
            order.append(seq_id)
        try:
            rows[seq_id].append([float(v) for v in parts[3:]])
        except ValueError as exc:
            raise ParseError(f"{path}: row {lineno}: {exc}") from exc
    return [
        FeatureRecord(
            seq_id,
            labels[seq_id],
            FeatureSequence(group, np.asarray(rows[seq_id]), tag),
        )
        for seq_id in order
    ]
