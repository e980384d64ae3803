"""Head motion signals: per-frame quantity of motion plus gated velocities.

Three signals per frame drive the non-manual models: a motion-energy scalar
and horizontal/vertical head velocities in face-relative units.  Energy is
a mean-equalized frame difference over the face box; velocity comes from
integer block matching with parabolic sub-pixel refinement.  Velocities are
zeroed whenever energy is below a gate (low-energy velocity readings are
false alarms) and reduced to the dominant axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateBoxError

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class HeadConfig:
    search: int = 8  # block-matching window, +/- pixels
    gate_threshold: float = 0.02
    alpha: float = 0.5  # adaptive smoothing weight


class HeadFeatureFrame(NamedTuple):
    energy: float
    vx: float  # face-widths per frame, signed
    vy: float  # face-heights per frame, signed


class VelocityEstimate(NamedTuple):
    vx: float
    vy: float
    clipped: bool  # search window hit the frame border


@dataclass
class HeadFeatureSequence:
    """(T, 3) array of [energy, vx, vy]; row 0 is zeros since the first
    frame has no motion reference."""

    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] != 3:
            raise ValueError("head features must be (T, 3)")

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def energy(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def vx(self) -> np.ndarray:
        return self.values[:, 1]

    @property
    def vy(self) -> np.ndarray:
        return self.values[:, 2]

    def frame(self, i: int) -> HeadFeatureFrame:
        return HeadFeatureFrame(*self.values[i])


def luminance(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame, dtype=float)
    if frame.ndim == 2:
        return frame
    return frame @ LUMA_WEIGHTS


def _check_box(frame: np.ndarray, box: tuple[int, int, int, int]) -> tuple[int, int, int, int]:
    x, y, w, h = (int(v) for v in box)
    if w <= 0 or h <= 0:
        raise DegenerateBoxError(f"face box {box} has zero area")
    if x < 0 or y < 0 or x + w > frame.shape[1] or y + h > frame.shape[0]:
        raise DegenerateBoxError(f"face box {box} exceeds frame bounds")
    return x, y, w, h


def motion_energy(prev: np.ndarray, cur: np.ndarray, box: tuple[int, int, int, int]) -> float:
    """Mean absolute luminance difference over the face box after removing
    each patch's own mean (a uniform brightness step contributes nothing),
    scaled by 1/255 so the gate threshold is resolution independent."""
    x, y, w, h = _check_box(prev, box)
    a = luminance(prev)[y : y + h, x : x + w]
    b = luminance(cur)[y : y + h, x : x + w]
    a = a - a.mean()
    b = b - b.mean()
    return float(np.mean(np.abs(b - a)) / 255.0)


def _parabolic_offset(s_minus: float, s_zero: float, s_plus: float) -> float:
    if s_zero == 0.0:  # exact match; nothing to refine
        return 0.0
    denom = s_minus - 2.0 * s_zero + s_plus
    if denom <= 0:
        return 0.0
    off = 0.5 * (s_minus - s_plus) / denom
    return float(np.clip(off, -0.5, 0.5))


def head_velocity(
    prev: np.ndarray,
    cur: np.ndarray,
    box: tuple[int, int, int, int],
    search: int = 8,
) -> VelocityEstimate:
    """Displacement of the face-box content from prev to cur, in face
    widths/heights per frame.

    Integer-pixel SAD block matching over a +/-search window (clipped at the
    frame border and flagged when that happens), then per-axis parabolic
    interpolation for sub-pixel resolution.
    """
    x, y, w, h = _check_box(prev, box)
    a = luminance(prev)[y : y + h, x : x + w]
    lum_cur = luminance(cur)

    dx_lo, dx_hi = -min(search, x), min(search, cur.shape[1] - (x + w))
    dy_lo, dy_hi = -min(search, y), min(search, cur.shape[0] - (y + h))
    clipped = (dx_hi - dx_lo != 2 * search) or (dy_hi - dy_lo != 2 * search)

    dxs = range(dx_lo, dx_hi + 1)
    dys = range(dy_lo, dy_hi + 1)
    sad = np.empty((len(dys), len(dxs)))
    for i, dy in enumerate(dys):
        for j, dx in enumerate(dxs):
            b = lum_cur[y + dy : y + dy + h, x + dx : x + dx + w]
            sad[i, j] = np.mean(np.abs(b - a))
    i, j = np.unravel_index(np.argmin(sad), sad.shape)
    best_dy, best_dx = dy_lo + i, dx_lo + j

    off_x = off_y = 0.0
    if 0 < j < sad.shape[1] - 1:
        off_x = _parabolic_offset(sad[i, j - 1], sad[i, j], sad[i, j + 1])
    if 0 < i < sad.shape[0] - 1:
        off_y = _parabolic_offset(sad[i - 1, j], sad[i, j], sad[i + 1, j])
    return VelocityEstimate((best_dx + off_x) / w, (best_dy + off_y) / h, clipped)


def gate_velocity(
    energy: float, vx: float, vy: float, gate_threshold: float = 0.02
) -> tuple[float, float]:
    """Zero both velocities below the energy gate; otherwise keep only the
    dominant axis (exact ties keep the horizontal one)."""
    if energy < gate_threshold:
        return 0.0, 0.0
    if abs(vx) >= abs(vy):
        return vx, 0.0
    return 0.0, vy


def adaptive_smooth(values: np.ndarray, alpha: float = 0.5) -> np.ndarray:
    """Recursive per-channel smoothing F_i := a*F_i + (1-a)*F_{i-1}, applied
    left to right with the already-smoothed predecessor; row 0 unchanged."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must be in (0, 1]")
    values = np.asarray(values, dtype=float)
    out = values.copy()
    for i in range(1, out.shape[0]):
        out[i] = alpha * out[i] + (1.0 - alpha) * out[i - 1]
    return out


def smooth_sequence(seq: HeadFeatureSequence, alpha: float = 0.5) -> HeadFeatureSequence:
    return HeadFeatureSequence(adaptive_smooth(seq.values, alpha))


def head_features(
    frames: Sequence[np.ndarray],
    boxes: Sequence[tuple[int, int, int, int]],
    config: HeadConfig = HeadConfig(),
) -> HeadFeatureSequence:
    """Per-frame [energy, vx, vy] for a clip; gating applied, smoothing not
    (smoothing happens at feature-assembly time)."""
    if len(frames) != len(boxes):
        raise ValueError("one face box per frame is required")
    rows = np.zeros((len(frames), 3))
    for t in range(1, len(frames)):
        energy = motion_energy(frames[t - 1], frames[t], boxes[t])
        vel = head_velocity(frames[t - 1], frames[t], boxes[t], config.search)
        vx, vy = gate_velocity(energy, vel.vx, vel.vy, config.gate_threshold)
        rows[t] = [energy, vx, vy]
    return HeadFeatureSequence(rows)
