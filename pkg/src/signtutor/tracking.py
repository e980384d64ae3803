"""Constant-velocity Kalman tracking of hand centroids.

One filter per hand; acceleration is neglected.  Missing detections are
survived by predict-only steps, and a hand is declared lost after
``loss_limit`` consecutive missing frames (six by default).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import TrackLostError

# State layout: (x, y, vx, vy); one frame per step.
TRANSITION = np.array(
    [
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
)
MEASUREMENT = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])


@dataclass(frozen=True)
class KalmanConfig:
    """Noise defaults; only the qualitative smoothing behavior is mandated,
    so every knob is open."""

    process_var: float = 1.0  # white-acceleration sigma^2, px^2/frame^4
    meas_var: float = 4.0  # px^2
    init_pos_var: float = 10.0
    init_vel_var: float = 100.0
    loss_limit: int = 6

    def process_noise(self) -> np.ndarray:
        # Discretized white-acceleration model with dt = 1.
        q = self.process_var
        return q * np.array(
            [
                [0.25, 0.0, 0.5, 0.0],
                [0.0, 0.25, 0.0, 0.5],
                [0.5, 0.0, 1.0, 0.0],
                [0.0, 0.5, 0.0, 1.0],
            ]
        )

    def meas_noise(self) -> np.ndarray:
        return self.meas_var * np.eye(2)

    def init_cov(self) -> np.ndarray:
        return np.diag(
            [self.init_pos_var, self.init_pos_var, self.init_vel_var, self.init_vel_var]
        )


class TrackStatus(Enum):
    NOT_STARTED = "not-started"
    ACTIVE = "active"
    LOST = "lost"


class PointFlag(Enum):
    MEASURED = "measured"
    PREDICTED = "predicted"
    ABSENT = "absent"


@dataclass
class TrackState:
    state: np.ndarray  # (4,)
    cov: np.ndarray  # (4, 4)
    frames_missing: int = 0
    status: TrackStatus = TrackStatus.ACTIVE


@dataclass(frozen=True)
class TrajectoryPoint:
    frame: int
    x: float | None
    y: float | None
    vx: float | None
    vy: float | None
    flag: PointFlag


@dataclass
class Trajectory:
    """Per-frame posterior states; one entry per processed frame.

    Frames before the first detection and after track loss carry the ABSENT
    flag and no state.
    """

    points: list[TrajectoryPoint] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.points)

    def tracked(self) -> list[TrajectoryPoint]:
        return [p for p in self.points if p.flag is not PointFlag.ABSENT]

    @property
    def start_frame(self) -> int | None:
        for p in self.points:
            if p.flag is not PointFlag.ABSENT:
                return p.frame
        return None


def center_of_mass(mask: np.ndarray) -> tuple[float, float] | None:
    """Arithmetic mean of foreground pixel coordinates as (x, y); None when
    the mask is empty."""
    rows, cols = np.nonzero(np.asarray(mask, dtype=bool))
    if rows.size == 0:
        return None
    return float(cols.mean()), float(rows.mean())


def init_track(x: float, y: float, config: KalmanConfig = KalmanConfig()) -> TrackState:
    """Start a filter at the first detection with zero velocity."""
    return TrackState(
        state=np.array([x, y, 0.0, 0.0]),
        cov=config.init_cov(),
        frames_missing=0,
        status=TrackStatus.ACTIVE,
    )


def kf_step(
    ts: TrackState,
    measurement: tuple[float, float] | None,
    config: KalmanConfig = KalmanConfig(),
) -> TrackState:
    """One predict(+correct) cycle.

    With a measurement the standard correction runs and the missing counter
    resets; without one the prior becomes the posterior.  Reaching
    ``loss_limit`` consecutive missing frames flips the status to LOST.
    """
    if ts.status is TrackStatus.LOST:
        raise TrackLostError("cannot step a lost track")
    x = TRANSITION @ ts.state
    p = TRANSITION @ ts.cov @ TRANSITION.T + config.process_noise()
    if measurement is None:
        missing = ts.frames_missing + 1
        status = TrackStatus.LOST if missing >= config.loss_limit else TrackStatus.ACTIVE
        return TrackState(x, p, missing, status)
    z = np.asarray(measurement, dtype=float)
    innovation = z - MEASUREMENT @ x
    s = MEASUREMENT @ p @ MEASUREMENT.T + config.meas_noise()
    gain = p @ MEASUREMENT.T @ np.linalg.inv(s)
    x = x + gain @ innovation
    ikh = np.eye(4) - gain @ MEASUREMENT
    # Joseph form keeps the covariance symmetric PSD.
    p = ikh @ p @ ikh.T + gain @ config.meas_noise() @ gain.T
    return TrackState(x, p, 0, TrackStatus.ACTIVE)


def track_centroids(
    centroids: Sequence[tuple[float, float] | None],
    config: KalmanConfig = KalmanConfig(),
) -> Trajectory:
    """Track a stream of per-frame centroid measurements (None = missing)."""
    traj = Trajectory()
    ts: TrackState | None = None
    for frame, com in enumerate(centroids):
        if ts is None:
            if com is None:
                traj.points.append(
                    TrajectoryPoint(frame, None, None, None, None, PointFlag.ABSENT)
                )
                continue
            ts = init_track(com[0], com[1], config)
            # First detection: the posterior is the measurement itself with
            # zero velocity; no predict step has happened yet.
            traj.points.append(
                TrajectoryPoint(frame, com[0], com[1], 0.0, 0.0, PointFlag.MEASURED)
            )
            continue
        if ts.status is TrackStatus.LOST:
            traj.points.append(
                TrajectoryPoint(frame, None, None, None, None, PointFlag.ABSENT)
            )
            continue
        ts = kf_step(ts, com, config)
        flag = PointFlag.MEASURED if com is not None else PointFlag.PREDICTED
        traj.points.append(
            TrajectoryPoint(
                frame,
                float(ts.state[0]),
                float(ts.state[1]),
                float(ts.state[2]),
                float(ts.state[3]),
                flag,
            )
        )
    return traj


def track_sequence(
    masks: Iterable[np.ndarray], config: KalmanConfig = KalmanConfig()
) -> Trajectory:
    """Track the center of mass of a per-frame binary mask stream."""
    return track_centroids([center_of_mass(m) for m in masks], config)


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "x", "y", "vx", "vy", "flag"])
        for p in traj.points:
            writer.writerow(
                [
                    p.frame,
                    "" if p.x is None else repr(p.x),
                    "" if p.y is None else repr(p.y),
                    "" if p.vx is None else repr(p.vx),
                    "" if p.vy is None else repr(p.vy),
                    p.flag.value,
                ]
            )


def read_trajectory_csv(path: str | Path) -> Trajectory:
    traj = Trajectory()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            flag = PointFlag(row["flag"])
            traj.points.append(
                TrajectoryPoint(
                    int(row["frame"]),
                    float(row["x"]) if row["x"] else None,
                    float(row["y"]) if row["y"] else None,
                    float(row["vx"]) if row["vx"] else None,
                    float(row["vy"]) if row["vy"] else None,
                    flag,
                )
            )
    return traj
