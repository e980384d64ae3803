"""Sequence trimming, trajectory/position normalization, feature assembly.

Raw per-frame observations (two hands, head signals, face box) are trimmed
to the signing interval, hand trajectories are normalized jointly for
translation/scale invariance, and per-frame feature vectors are assembled
for the three modality groups: MANUAL (hands only), NONMANUAL (head only)
and COMBINED (their concatenation).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateBoxError,
    DegenerateTrajectoryError,
    SignTutorError,
    TooShortError,
)
from .handshape import N_FEATURES, FeatureRanges, normalize_features
from .headmotion import adaptive_smooth


class AssemblyError(SignTutorError):
    pass


@dataclass(frozen=True)
class HandObservation:
    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0
    shape: np.ndarray | None = None  # raw 19-feature descriptor
    cluster: int | None = None
    copied: bool = False  # filled in from the last detected frame


@dataclass(frozen=True)
class ObservationFrame:
    left: HandObservation | None
    right: HandObservation | None
    head: tuple[float, float, float] = (0.0, 0.0, 0.0)  # energy, vx, vy
    face_box: tuple[int, int, int, int] | None = None

    @property
    def detected(self) -> bool:
        return self.left is not None or self.right is not None


@dataclass
class ObservationSequence:
    frames: list[ObservationFrame]

    def __len__(self) -> int:
        return len(self.frames)


class Group(Enum):
    MANUAL = "manual"
    NONMANUAL = "nonmanual"
    COMBINED = "combined"


@dataclass
class FeatureSequence:
    group: Group
    rows: np.ndarray  # (T, dim)
    layout_tag: str = ""

    def __post_init__(self) -> None:
        self.rows = np.asarray(self.rows, dtype=float)
        if self.rows.ndim != 2:
            raise ValueError("feature rows must be 2-D")
        if self.rows.size and not np.isfinite(self.rows).all():
            raise ValueError("feature rows contain non-finite values")

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True)
class NormalizationParams:
    x_m: float
    y_m: float
    d: float
    left_start: tuple[float, float] | None = None
    right_start: tuple[float, float] | None = None


def trim_sequence(seq: ObservationSequence, n_gap: int = 6, t_transition: int = 2) -> ObservationSequence:
    """Cut a raw sequence down to the signing interval.

    Leading undetected frames are dropped; an undetected gap shorter than
    ``n_gap`` is bridged by copying each hand's last observation (velocity
    zeroed); a gap of ``n_gap`` or more ends the sign, dropping the gap and
    everything after it; finally ``t_transition`` frames come off each end.
    """
    if n_gap < 1:
        raise ValueError("n_gap must be >= 1")
    if t_transition < 0:
        raise ValueError("t_transition must be >= 0")
    frames = seq.frames
    start = next((i for i, f in enumerate(frames) if f.detected), None)
    if start is None:
        raise TooShortError("no frame with a detected hand")

    kept: list[ObservationFrame] = []
    last_left: HandObservation | None = None
    last_right: HandObservation | None = None
    gap: list[ObservationFrame] = []
    for frame in frames[start:]:
        if not frame.detected:
            gap.append(frame)
            if len(gap) >= n_gap:
                break
            continue
        if gap:
            # Short gap: bridge with copies of the last detections.
            for g in gap:
                kept.append(
                    ObservationFrame(
                        _copied(last_left),
                        _copied(last_right),
                        g.head,
                        g.face_box,
                    )
                )
            gap = []
        left = frame.left if frame.left is not None else _copied(last_left)
        right = frame.right if frame.right is not None else _copied(last_right)
        kept.append(ObservationFrame(left, right, frame.head, frame.face_box))
        last_left = left if left is not None else last_left
        last_right = right if right is not None else last_right
    # A trailing shorter-than-n_gap gap is an unfinished rest: drop it too.

    if t_transition:
        kept = kept[t_transition : len(kept) - t_transition]
    if not kept:
        raise TooShortError("sequence is empty after trimming")
    return ObservationSequence(kept)


def _copied(obs: HandObservation | None) -> HandObservation | None:
    if obs is None:
        return None
    return replace(obs, vx=0.0, vy=0.0, copied=True)


def normalize_trajectories(
    left: np.ndarray, right: np.ndarray
) -> tuple[np.ndarray, np.ndarray, NormalizationParams]:
    """Joint translation/scale normalization of both hand paths.

    Midpoints and scale are computed over the union of both hands so the
    spatial relation between the hands survives; each hand is then shifted
    so its own first point is (0, 0).  Raises when every point coincides.
    """
    left = np.asarray(left, dtype=float).reshape(-1, 2)
    right = np.asarray(right, dtype=float).reshape(-1, 2)
    pts = np.concatenate([left, right], axis=0)
    if pts.shape[0] == 0:
        raise DegenerateTrajectoryError("no trajectory points at all")
    x_min, y_min = pts.min(axis=0)
    x_max, y_max = pts.max(axis=0)
    x_m = (x_max + x_min) / 2.0
    y_m = (y_max + y_min) / 2.0
    d = max((x_max - x_min) / 2.0, (y_max - y_min) / 2.0)
    if d == 0.0:
        raise DegenerateTrajectoryError("all trajectory points coincide")

    def scaled(a: np.ndarray) -> np.ndarray:
        out = np.empty_like(a)
        out[:, 0] = 0.5 + 0.5 * (a[:, 0] - x_m) / d
        out[:, 1] = 0.5 + 0.5 * (a[:, 1] - y_m) / d
        return out

    left_s, right_s = scaled(left), scaled(right)
    left_start = tuple(left_s[0]) if len(left_s) else None
    right_start = tuple(right_s[0]) if len(right_s) else None
    if len(left_s):
        left_s = left_s - left_s[0]
    if len(right_s):
        right_s = right_s - right_s[0]
    return left_s, right_s, NormalizationParams(x_m, y_m, d, left_start, right_start)


def position_features(
    com: tuple[float, float], face_box: tuple[int, int, int, int]
) -> tuple[float, float]:
    """Signed hand-to-face offset in face widths/heights (image coordinates:
    y grows downward, so "above" is negative)."""
    x, y, w, h = face_box
    if w <= 0 or h <= 0:
        raise DegenerateBoxError(f"face box {face_box} has zero area")
    face_cx = x + w / 2.0
    face_cy = y + h / 2.0
    return (com[0] - face_cx) / w, (com[1] - face_cy) / h


@dataclass(frozen=True)
class AssemblyConfig:
    """Which feature blocks enter the MANUAL group, plus shape ranges and
    the head-smoothing weight.  The layout tag is versioned into trained
    models so mismatched assemblies are rejected at scoring time."""

    include_trajectory: bool = True
    include_velocity: bool = True
    include_position: bool = True
    include_shape: bool = True
    shape_ranges: FeatureRanges | None = None
    alpha: float = 0.5

    @property
    def hand_dim(self) -> int:
        return (
            2 * self.include_trajectory
            + 2 * self.include_velocity
            + 2 * self.include_position
            + N_FEATURES * self.include_shape
        )

    @property
    def manual_dim(self) -> int:
        return 2 * self.hand_dim

    @property
    def nonmanual_dim(self) -> int:
        return 3

    def dim(self, group: Group) -> int:
        if group is Group.MANUAL:
            return self.manual_dim
        if group is Group.NONMANUAL:
            return self.nonmanual_dim
        return self.manual_dim + self.nonmanual_dim

    @property
    def layout_tag(self) -> str:
        blocks = [
            name
            for name, on in [
                ("traj", self.include_trajectory),
                ("vel", self.include_velocity),
                ("pos", self.include_position),
                ("shape", self.include_shape),
            ]
            if on
        ]
        return f"manual[{','.join(blocks)}]x2+head[energy,vx,vy]:v1"

    def manual_columns(self) -> list[int]:
        return list(range(self.manual_dim))

    def nonmanual_columns(self) -> list[int]:
        return list(range(self.manual_dim, self.manual_dim + 3))


def _hand_rows(
    observations: list[HandObservation | None],
    normalized: np.ndarray,
    d: float,
    face_boxes: list[tuple[int, int, int, int] | None],
    config: AssemblyConfig,
) -> np.ndarray:
    """Per-frame feature block for one hand; frames where the hand was never
    seen contribute zeros."""
    T = len(observations)
    rows = np.zeros((T, config.hand_dim))
    norm_iter = iter(normalized)
    for t, obs in enumerate(observations):
        cols: list[float] = []
        if obs is None:
            continue
        traj = next(norm_iter)
        if config.include_trajectory:
            cols.extend(traj)
        if config.include_velocity:
            # Kalman velocities rescaled by the same factor as positions so
            # the vector stays unit-consistent.
            cols.extend((0.5 * obs.vx / d, 0.5 * obs.vy / d))
        if config.include_position:
            box = face_boxes[t]
            if box is None:
                cols.extend((0.0, 0.0))
            else:
                cols.extend(position_features((obs.x, obs.y), box))
        if config.include_shape:
            if obs.shape is None:
                cols.extend([0.0] * N_FEATURES)
            else:
                if config.shape_ranges is None:
                    raise AssemblyError("shape features require fitted ranges")
                cols.extend(normalize_features(obs.shape, config.shape_ranges))
        rows[t] = cols
    return rows


def assemble(
    seq: ObservationSequence, group: Group, config: AssemblyConfig = AssemblyConfig()
) -> FeatureSequence:
    """Build the per-frame feature matrix for one modality group.

    MANUAL concatenates, per hand, normalized trajectory, velocity,
    face-relative position and normalized shape blocks (left hand first);
    NONMANUAL is the adaptively smoothed [energy, vx, vy]; COMBINED is
    MANUAL followed by NONMANUAL.
    """
    frames = seq.frames
    if not frames:
        raise AssemblyError("cannot assemble an empty sequence")
    blocks: list[np.ndarray] = []
    if group in (Group.MANUAL, Group.COMBINED):
        lefts = [f.left for f in frames]
        rights = [f.right for f in frames]
        left_pts = np.array([(o.x, o.y) for o in lefts if o is not None]).reshape(-1, 2)
        right_pts = np.array([(o.x, o.y) for o in rights if o is not None]).reshape(-1, 2)
        left_n, right_n, params = normalize_trajectories(left_pts, right_pts)
        boxes = [f.face_box for f in frames]
        blocks.append(_hand_rows(lefts, left_n, params.d, boxes, config))
        blocks.append(_hand_rows(rights, right_n, params.d, boxes, config))
    if group in (Group.NONMANUAL, Group.COMBINED):
        head = np.asarray([f.head for f in frames], dtype=float)
        blocks.append(adaptive_smooth(head, config.alpha))
    rows = np.concatenate(blocks, axis=1)
    if rows.shape[1] != config.dim(group):
        raise AssemblyError(
            f"assembled dim {rows.shape[1]} != layout dim {config.dim(group)}"
        )
    if not np.isfinite(rows).all():
        raise AssemblyError("assembled rows contain non-finite values")
    return FeatureSequence(group, rows, config.layout_tag)
