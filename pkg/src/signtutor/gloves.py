"""Colored-glove pixel classification.

Per-glove HSV histograms are trained from ground-truth snapshots, scored
per pixel, thresholded with hysteresis (strong seeds grow into weak but
connected pixels), and cleaned up by keeping the largest connected
component.  HSV is used for its tolerance to illumination changes; the same
machinery doubles as a naive skin detector for the fallback face box.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import TrainingError

EIGHT_CONNECTED = np.ones((3, 3), dtype=int)
DEFAULT_BIN_COUNTS = (32, 16, 16)  # H finer than S, V: hue carries glove identity


def rgb_to_hsv(frame: np.ndarray) -> np.ndarray:
    """8-bit RGB -> float HSV with H in [0, 360), S and V in [0, 1]."""
    rgb = np.asarray(frame, dtype=float) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
        h = np.zeros_like(v)
        safe = np.where(c > 0, c, 1.0)
        rmax = (v == r) & (c > 0)
        gmax = (v == g) & (c > 0) & ~rmax
        bmax = (c > 0) & ~rmax & ~gmax
        h[rmax] = np.mod((g - b)[rmax] / safe[rmax], 6.0)
        h[gmax] = (b - r)[gmax] / safe[gmax] + 2.0
        h[bmax] = (r - g)[bmax] / safe[bmax] + 4.0
    return np.stack([h * 60.0, s, v], axis=-1)


@dataclass
class ColorHistogram:
    """3-D HSV histogram, max-normalized so values lie in [0, 1]."""

    bins: np.ndarray  # (hb, sb, vb)

    @property
    def bin_counts(self) -> tuple[int, int, int]:
        return self.bins.shape  # type: ignore[return-value]

    def bin_indices(self, hsv: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        hb, sb, vb = self.bins.shape
        hi = np.clip((hsv[..., 0] / 360.0 * hb).astype(int), 0, hb - 1)
        si = np.clip((hsv[..., 1] * sb).astype(int), 0, sb - 1)
        vi = np.clip((hsv[..., 2] * vb).astype(int), 0, vb - 1)
        return hi, si, vi

    def score(self, hsv: np.ndarray) -> np.ndarray:
        """Per-pixel glove likelihood in [0, 1]."""
        hi, si, vi = self.bin_indices(hsv)
        return self.bins[hi, si, vi]


def train_histogram(
    snapshots: Sequence[tuple[np.ndarray, np.ndarray]],
    bin_counts: tuple[int, int, int] = DEFAULT_BIN_COUNTS,
) -> ColorHistogram:
    """Accumulate HSV bins of mask-true pixels, then max-normalize."""
    if not snapshots:
        raise TrainingError("at least one snapshot is required")
    bins = np.zeros(bin_counts)
    total = 0
    for frame, mask in snapshots:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != frame.shape[:2]:
            raise TrainingError("snapshot mask does not match its frame")
        if not mask.any():
            continue
        hsv = rgb_to_hsv(frame)[mask]
        hist = ColorHistogram(bins)
        hi, si, vi = hist.bin_indices(hsv)
        np.add.at(bins, (hi, si, vi), 1)
        total += mask.sum()
    if total == 0:
        raise TrainingError("no foreground evidence: every snapshot mask is empty")
    return ColorHistogram(bins / bins.max())


@dataclass
class GloveModel:
    histogram: ColorHistogram
    t_low: float
    t_high: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.t_low <= self.t_high <= 1.0:
            raise ValueError("thresholds must satisfy 0 <= t_low <= t_high <= 1")

    def to_dict(self) -> dict:
        return {
            "bin_counts": list(self.histogram.bin_counts),
            "bins": self.histogram.bins.ravel().tolist(),
            "t_low": self.t_low,
            "t_high": self.t_high,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GloveModel":
        bins = np.asarray(d["bins"], dtype=float).reshape(d["bin_counts"])
        return cls(ColorHistogram(bins), float(d["t_low"]), float(d["t_high"]))


def hysteresis_mask(scores: np.ndarray, t_low: float, t_high: float) -> np.ndarray:
    """Pixels >= t_high seed; pixels >= t_low survive iff 8-connected to a seed."""
    low = scores >= t_low
    labels, n = ndimage.label(low, structure=EIGHT_CONNECTED)
    if n == 0:
        return np.zeros_like(low)
    seeded = np.unique(labels[scores >= t_high])
    seeded = seeded[seeded > 0]
    return np.isin(labels, seeded)


def largest_component(mask: np.ndarray) -> np.ndarray:
    """Keep the maximal-area 8-connected component; area ties go to the
    component holding the row-major-first pixel."""
    mask = np.asarray(mask, dtype=bool)
    labels, n = ndimage.label(mask, structure=EIGHT_CONNECTED)
    if n == 0:
        return mask.copy()
    areas = np.bincount(labels.ravel())[1:]
    best = np.flatnonzero(areas == areas.max()) + 1
    if len(best) > 1:
        flat = labels.ravel()
        firsts = {label: np.argmax(flat == label) for label in best}
        winner = min(best, key=lambda label: firsts[label])
    else:
        winner = best[0]
    return labels == winner


def segment_scores(scores: np.ndarray, t_low: float, t_high: float) -> np.ndarray:
    return largest_component(hysteresis_mask(scores, t_low, t_high))


def segment_frame(
    frame: np.ndarray, left: GloveModel, right: GloveModel
) -> tuple[np.ndarray, np.ndarray]:
    """Per-glove binary masks; an empty mask means the hand is absent."""
    hsv = rgb_to_hsv(frame)
    out = []
    for model in (left, right):
        scores = model.histogram.score(hsv)
        out.append(segment_scores(scores, model.t_low, model.t_high))
    return out[0], out[1]


def fit_thresholds(
    histogram: ColorHistogram,
    snapshots: Sequence[tuple[np.ndarray, np.ndarray]],
    grid: int = 21,
    band_over: str = "glove",
) -> tuple[float, float]:
    """Grid-search (t_low <= t_high) minimizing misses + false alarms.

    Candidates are confined to [mu - delta, mu + delta] of the histogram
    score distribution; by default mu/delta come from the true glove pixels
    (``band_over="all"`` uses every labeled pixel instead).  Classification
    error is evaluated after full hysteresis segmentation of each labeled
    snapshot.  Ties prefer the larger t_high, then the larger t_low
    (conservative seeds).
    """
    if band_over not in ("glove", "all"):
        raise ValueError("band_over must be 'glove' or 'all'")
    scored = []
    band_scores = []
    n_glove = n_bg = 0
    for frame, mask in snapshots:
        mask = np.asarray(mask, dtype=bool)
        scores = histogram.score(rgb_to_hsv(frame))
        scored.append((scores, mask))
        band_scores.append(scores[mask] if band_over == "glove" else scores.ravel())
        n_glove += int(mask.sum())
        n_bg += int((~mask).sum())
    if n_glove == 0 or n_bg == 0:
        raise TrainingError("threshold fitting needs both glove and background pixels")
    band = np.concatenate(band_scores)
    mu = float(band.mean())
    delta = float(band.std())
    lo = max(0.0, mu - delta)
    hi = min(1.0, mu + delta)
    candidates = np.linspace(lo, hi, grid)

    best: tuple[float, float] | None = None
    best_err = None
    for i, t_low in enumerate(candidates):
        for t_high in candidates[i:]:
            err = 0
            for scores, mask in scored:
                seg = hysteresis_mask(scores, t_low, t_high)
                err += int((mask & ~seg).sum()) + int((~mask & seg).sum())
            key = (err, -t_high, -t_low)
            if best_err is None or key < best_err:
                best_err = key
                best = (float(t_low), float(t_high))
    assert best is not None
    return best


def train_glove_model(
    snapshots: Sequence[tuple[np.ndarray, np.ndarray]],
    bin_counts: tuple[int, int, int] = DEFAULT_BIN_COUNTS,
    grid: int = 21,
) -> GloveModel:
    histogram = train_histogram(snapshots, bin_counts)
    t_low, t_high = fit_thresholds(histogram, snapshots, grid)
    return GloveModel(histogram, t_low, t_high)


def save_glove_models(path: str | Path, left: GloveModel, right: GloveModel) -> None:
    payload = {"left": left.to_dict(), "right": right.to_dict()}
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_glove_models(path: str | Path) -> tuple[GloveModel, GloveModel]:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    return GloveModel.from_dict(d["left"]), GloveModel.from_dict(d["right"])


def default_skin_model(bin_counts: tuple[int, int, int] = DEFAULT_BIN_COUNTS) -> GloveModel:
    """Coarse built-in skin model for the fallback face box: a box in HSV
    space (low hues, moderate saturation, bright) marked as likelihood 1."""
    hb, sb, vb = bin_counts
    bins = np.zeros(bin_counts)
    h_hi = int(np.ceil(50 / 360 * hb))
    s_lo, s_hi = int(0.15 * sb), int(np.ceil(0.75 * sb))
    v_lo = int(0.25 * vb)
    bins[:h_hi, s_lo:s_hi, v_lo:] = 1.0
    return GloveModel(ColorHistogram(bins), t_low=0.5, t_high=0.5)


def naive_face_box(
    frame: np.ndarray, skin: GloveModel | None = None
) -> tuple[int, int, int, int] | None:
    """Bounding box of the largest skin-colored component, or None."""
    model = skin or default_skin_model()
    scores = model.histogram.score(rgb_to_hsv(frame))
    mask = segment_scores(scores, model.t_low, model.t_high)
    if not mask.any():
        return None
    rows, cols = np.nonzero(mask)
    x, y = int(cols.min()), int(rows.min())
    return (x, y, int(cols.max()) - x + 1, int(rows.max()) - y + 1)
