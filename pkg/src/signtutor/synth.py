"""Synthetic labeled datasets for testing and benchmarking the recognizers.

Classes are organized as groups x variants: every variant inside a group
shares the group's hand-trajectory templates (so hand information alone
cannot tell variants apart) and differs only in its head-signal template.
Per repetition the generator jitters duration, amplitude, head/hand phase
alignment and adds channel noise; everything is a pure function of the spec
(seed included).

Also provides a scripted raster clip (two colored blobs plus a nodding
textured face patch) for exercising the vision front end without a camera.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .features import AssemblyConfig, FeatureSequence, Group, normalize_trajectories
from .headmotion import adaptive_smooth
from .ingest import CatalogSign, FeatureRecord, SignCatalog, write_feature_file

SYNTH_FACE_BOX = (280, 60, 80, 100)


@dataclass(frozen=True)
class TrajectoryTemplate:
    """Parametric 2-D hand path evaluated on t in [0, 1], pixel units."""

    kind: str  # circle | line | figure8 | zigzag | hold
    center: tuple[float, float] = (320.0, 300.0)
    size: tuple[float, float] = (60.0, 60.0)
    cycles: float = 1.0
    phase_deg: float = 0.0

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        cx, cy = self.center
        sx, sy = self.size
        theta = 2.0 * math.pi * self.cycles * t + math.radians(self.phase_deg)
        if self.kind == "circle":
            x = cx + sx * np.cos(theta)
            y = cy + sy * np.sin(theta)
        elif self.kind == "line":
            x = cx - sx + 2.0 * sx * t
            y = cy - sy + 2.0 * sy * t
        elif self.kind == "figure8":
            x = cx + sx * np.sin(theta)
            y = cy + sy * np.sin(2.0 * theta)
        elif self.kind == "zigzag":
            x = cx - sx + 2.0 * sx * t
            y = cy + sy * (2.0 * np.abs(((self.cycles * t + 0.25) % 1.0) * 2 - 1) - 1)
        elif self.kind == "hold":
            x = np.full_like(t, cx)
            y = np.full_like(t, cy)
        else:
            raise ValueError(f"unknown trajectory kind {self.kind!r}")
        return np.stack([x, y], axis=1)


@dataclass(frozen=True)
class HeadTemplate:
    """Per-frame head signal generator: (energy, vx, vy) on t in [0, 1]."""

    kind: str  # still | nod | shake | turn
    amplitude: float = 0.08  # velocity peak, face units per frame
    cycles: float = 2.0
    energy_scale: float = 4.0  # energy tracks |velocity| with this gain

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        theta = 2.0 * math.pi * self.cycles * t
        if self.kind == "still":
            v = np.zeros_like(t)
            axis = 1
        elif self.kind == "nod":
            v = self.amplitude * np.sin(theta)
            axis = 2
        elif self.kind == "shake":
            v = self.amplitude * np.sin(theta)
            axis = 1
        elif self.kind == "turn":
            # One-sided sweep and return: a single slow half-cycle.
            v = self.amplitude * np.sin(math.pi * t)
            axis = 1
        else:
            raise ValueError(f"unknown head kind {self.kind!r}")
        rows = np.zeros((len(t), 3))
        rows[:, axis] = v
        rows[:, 0] = self.energy_scale * np.abs(v)
        return rows


@dataclass(frozen=True)
class SyntheticSpec:
    n_groups: int = 3
    variants_per_group: int = 3
    repetitions: int = 40
    frames: int = 40
    trajectories: tuple[tuple[TrajectoryTemplate, TrajectoryTemplate], ...] = ()
    heads: tuple[HeadTemplate, ...] = ()  # one per variant, shared across groups
    noise_manual: float = 2.0  # sigma, raw pixels
    noise_head: float = 0.03  # sigma, head-signal units
    time_warp: float = 0.15  # +/- relative duration jitter
    amp_jitter: float = 0.1  # +/- relative amplitude jitter
    head_desync: float = 0.30  # +/- phase offset between hand and head, fraction
    seed: int = 20240

    def __post_init__(self) -> None:
        if min(self.n_groups, self.variants_per_group, self.repetitions) < 1:
            raise ValueError("counts must be >= 1")
        if self.frames < 4:
            raise ValueError("frames must be >= 4")
        if min(self.noise_manual, self.noise_head) < 0:
            raise ValueError("noise must be >= 0")
        if len(self.trajectories) != self.n_groups:
            raise ValueError("one trajectory template pair per group is required")
        if len(self.heads) != self.variants_per_group:
            raise ValueError("one head template per variant is required")

    def sign_id(self, g: int, v: int) -> str:
        return f"g{g}v{v}"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        d = dict(d)
        d["trajectories"] = tuple(
            (
                TrajectoryTemplate(**_tuplify(a, ("center", "size"))),
                TrajectoryTemplate(**_tuplify(b, ("center", "size"))),
            )
            for a, b in d.get("trajectories", ())
        )
        d["heads"] = tuple(HeadTemplate(**h) for h in d.get("heads", ()))
        return cls(**d)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SyntheticSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _tuplify(d: dict, keys: tuple[str, ...]) -> dict:
    d = dict(d)
    for k in keys:
        if k in d:
            d[k] = tuple(d[k])
    return d


def default_spec() -> SyntheticSpec:
    """Three groups x three variants with overlapping manual channels inside
    each group: variants differ only in the tempo of a vertical nod.

    Same-axis, same-amplitude nods at different tempos are the point: with
    the per-repetition head/hand desynchronization they are nearly
    indistinguishable to a model whose time alignment follows the hands,
    while a dedicated head model that aligns to the nod phases separates
    them (mirrors sign families that share the hand form and differ only in
    head motion)."""
    return SyntheticSpec(
        trajectories=(
            (
                TrajectoryTemplate("circle", (260.0, 300.0), (70.0, 50.0)),
                TrajectoryTemplate("hold", (420.0, 320.0), (0.0, 0.0)),
            ),
            (
                TrajectoryTemplate("line", (250.0, 280.0), (80.0, -40.0)),
                TrajectoryTemplate("line", (400.0, 280.0), (-80.0, -40.0)),
            ),
            (
                TrajectoryTemplate("figure8", (270.0, 310.0), (60.0, 45.0)),
                TrajectoryTemplate("zigzag", (410.0, 300.0), (70.0, 30.0), cycles=2.0),
            ),
        ),
        heads=(
            HeadTemplate("nod", amplitude=0.10, cycles=1.0),
            HeadTemplate("nod", amplitude=0.10, cycles=2.0),
            HeadTemplate("nod", amplitude=0.10, cycles=4.5),
        ),
    )


def synthetic_catalog(spec: SyntheticSpec) -> SignCatalog:
    head_names = {"still": "no head motion", "nod": "vertical nod", "shake": "horizontal shake", "turn": "single turn"}
    signs = []
    for g in range(spec.n_groups):
        for v in range(spec.variants_per_group):
            head = spec.heads[v]
            desc = head_names.get(head.kind, head.kind)
            if head.kind != "still":
                desc = f"{desc}, {head.cycles:g} cycle(s)"
            signs.append(
                CatalogSign(
                    sign_id=spec.sign_id(g, v),
                    name=f"group {g} variant {v}",
                    manual_desc=f"{spec.trajectories[g][0].kind}/{spec.trajectories[g][1].kind} hand path",
                    nonmanual_desc=desc,
                    group_id=f"group-{g}",
                )
            )
    return SignCatalog(signs)


@dataclass
class SyntheticSequence:
    seq_id: str
    label: str
    group_id: str
    variant: int
    rep: int
    features: FeatureSequence  # COMBINED layout


@dataclass
class SyntheticDataset:
    spec: SyntheticSpec
    catalog: SignCatalog
    sequences: list[SyntheticSequence]
    layout: AssemblyConfig

    def records(self) -> list[FeatureRecord]:
        return [FeatureRecord(s.seq_id, s.label, s.features) for s in self.sequences]


def _manual_block(
    spec: SyntheticSpec, g: int, rep: int
) -> tuple[np.ndarray, np.ndarray]:
    """Hand feature rows for one (group, repetition).

    Keyed only by (seed, group, rep): every variant of a group sees the
    identical manual realization, which is the construction that makes the
    manual channel uninformative within a group.
    """
    rng = np.random.default_rng([spec.seed, 7, g, rep])
    length = int(round(spec.frames * (1.0 + rng.uniform(-spec.time_warp, spec.time_warp))))
    length = max(length, 4)
    t = np.linspace(0.0, 1.0, length)
    amp = 1.0 + rng.uniform(-spec.amp_jitter, spec.amp_jitter)
    hands_raw = []
    for template in spec.trajectories[g]:
        path = template.evaluate(t)
        center = np.asarray(template.center)
        path = center + amp * (path - center)
        path = path + rng.normal(0.0, spec.noise_manual, size=path.shape)
        hands_raw.append(path)
    left_n, right_n, params = normalize_trajectories(hands_raw[0], hands_raw[1])
    x, y, w, h = SYNTH_FACE_BOX
    face = np.array([x + w / 2.0, y + h / 2.0])
    blocks = []
    for raw, norm in zip(hands_raw, (left_n, right_n)):
        vel = np.zeros_like(norm)
        vel[1:] = np.diff(norm, axis=0)
        pos = (raw - face) / np.array([w, h])
        blocks.append(np.concatenate([norm, vel, pos], axis=1))
    return np.concatenate(blocks, axis=1), t


def _head_block(spec: SyntheticSpec, g: int, v: int, rep: int, t: np.ndarray) -> np.ndarray:
    rng = np.random.default_rng([spec.seed, 11, g, v, rep])
    # Head motion is not locked to the hands: shift its clock per repetition.
    offset = rng.uniform(-spec.head_desync, spec.head_desync)
    rows = spec.heads[v].evaluate(np.clip(t + offset, 0.0, 1.0))
    rows = rows + rng.normal(0.0, spec.noise_head, size=rows.shape)
    return adaptive_smooth(rows, 0.5)


def generate_synthetic(spec: SyntheticSpec) -> SyntheticDataset:
    """Deterministic labeled dataset of COMBINED feature sequences."""
    layout = AssemblyConfig(include_shape=False)
    sequences = []
    for g in range(spec.n_groups):
        for rep in range(spec.repetitions):
            manual, t = _manual_block(spec, g, rep)
            for v in range(spec.variants_per_group):
                head = _head_block(spec, g, v, rep, t)
                rows = np.concatenate([manual, head], axis=1)
                label = spec.sign_id(g, v)
                sequences.append(
                    SyntheticSequence(
                        seq_id=f"{label}r{rep:03d}",
                        label=label,
                        group_id=f"group-{g}",
                        variant=v,
                        rep=rep,
                        features=FeatureSequence(Group.COMBINED, rows, layout.layout_tag),
                    )
                )
    return SyntheticDataset(spec, synthetic_catalog(spec), sequences, layout)


def write_dataset(dataset: SyntheticDataset, outdir: str | Path) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_feature_file(outdir / "features.csv", dataset.records())
    dataset.catalog.save(outdir / "catalog.json")
    dataset.spec.save(outdir / "spec.json")


# --- scripted raster clip for the vision front end ---------------------------------


@dataclass(frozen=True)
class DemoClipSpec:
    n_frames: int = 60
    width: int = 640
    height: int = 480
    lead_in: int = 5  # hand-less frames before the sign starts
    blob_radius: int = 22
    left_color: tuple[int, int, int] = (40, 200, 60)
    right_color: tuple[int, int, int] = (30, 60, 220)
    face_box: tuple[int, int, int, int] = (280, 40, 90, 110)
    nod_amplitude: int = 4
    nod_period: int = 20
    seed: int = 5


@dataclass
class DemoClip:
    frames: list[np.ndarray]
    face_boxes: list[tuple[int, int, int, int]]
    left_centers: list[tuple[float, float] | None]
    right_centers: list[tuple[float, float] | None]
    left_masks: list[np.ndarray]
    right_masks: list[np.ndarray]
    nod_shifts: np.ndarray


def _draw_disk(frame: np.ndarray, cx: float, cy: float, r: int, color) -> np.ndarray:
    yy, xx = np.mgrid[: frame.shape[0], : frame.shape[1]]
    mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
    frame[mask] = color
    return mask


def make_demo_clip(spec: DemoClipSpec = DemoClipSpec()) -> DemoClip:
    """Two colored blobs moving on smooth paths plus a textured face patch
    that nods vertically; background is dark with mild noise."""
    rng = np.random.default_rng(spec.seed)
    x, y, w, h = spec.face_box
    tex = rng.integers(0, 256, size=(h + 4 * spec.nod_amplitude, w)).astype(float)
    for _ in range(2):
        tex = (
            tex
            + np.roll(tex, 1, 0)
            + np.roll(tex, -1, 0)
            + np.roll(tex, 1, 1)
            + np.roll(tex, -1, 1)
        ) / 5.0
    tex = (tex - tex.min()) / (np.ptp(tex) + 1e-9) * 205 + 50

    frames, lmasks, rmasks, lcs, rcs, boxes = [], [], [], [], [], []
    shifts = np.round(
        spec.nod_amplitude
        * np.sin(2 * np.pi * np.arange(spec.n_frames) / spec.nod_period)
    ).astype(int)
    active = spec.n_frames - spec.lead_in
    for f in range(spec.n_frames):
        frame = rng.integers(8, 28, size=(spec.height, spec.width, 3)).astype(np.uint8)
        # Face: window into the tall texture; sliding the window up moves the
        # visible content down, so negate to make shifts[f] the on-screen
        # displacement of the face in image coordinates.
        off = 2 * spec.nod_amplitude - int(shifts[f])
        patch = tex[off : off + h, :].astype(np.uint8)
        frame[y : y + h, x : x + w] = patch[..., None]
        boxes.append(spec.face_box)

        if f < spec.lead_in:
            frames.append(frame)
            lmasks.append(np.zeros((spec.height, spec.width), dtype=bool))
            rmasks.append(np.zeros((spec.height, spec.width), dtype=bool))
            lcs.append(None)
            rcs.append(None)
            continue
        t = (f - spec.lead_in) / max(active - 1, 1)
        lx = 180 + 90 * math.cos(2 * math.pi * t)
        ly = 300 + 70 * math.sin(2 * math.pi * t)
        rx = 460 - 120 * t
        ry = 330 - 60 * t
        lmask = _draw_disk(frame, lx, ly, spec.blob_radius, spec.left_color)
        rmask = _draw_disk(frame, rx, ry, spec.blob_radius, spec.right_color)
        frames.append(frame)
        lmasks.append(lmask)
        rmasks.append(rmask)
        lcs.append((lx, ly))
        rcs.append((rx, ry))
    return DemoClip(frames, boxes, lcs, rcs, lmasks, rmasks, shifts)
