"""Hand-shape descriptors and template classification.

A binary hand mask becomes a 19-number descriptor: moment-ellipse geometry,
compactness, ellipse fill ratios, doubled-angle orientation, elongation,
eight angular area-fill fractions, and three raw size values that keep a
proxy for depth (those are deliberately not scale-invariant).  Descriptors
are min-max normalized, matched against a fixed template library by
k-nearest-template distance, rejected above a distance threshold, and the
per-cluster distances are smoothed over a six-frame window so the decision
cannot flicker frame to frame.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateShapeError

N_FEATURES = 19
# f9..f16 are already fractions in [0, 1]; they bypass min-max normalization.
PERCENTAGE_FEATURES = slice(8, 16)
# Weights for the temporal distance filter, newest frame first.
SMOOTHING_WEIGHTS = np.array([0.34, 0.25, 0.18, 0.12, 0.07, 0.04])
# Sector order within the feature vector: f9..f16.
SECTOR_ORDER = ("NW", "N", "NE", "E", "SE", "S", "SW", "W")
_CLOCKWISE = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")


@dataclass(frozen=True)
class MomentEllipse:
    """Moment-equivalent ellipse: shares the region's centroid and second
    central moments.  ``angle_deg`` is the major-axis angle in [0, 180)."""

    cx: float
    cy: float
    a: float  # semi-major
    b: float  # semi-minor
    angle_deg: float


def fit_ellipse(mask: np.ndarray) -> MomentEllipse:
    mask = np.asarray(mask, dtype=bool)
    rows, cols = np.nonzero(mask)
    n = rows.size
    if n < 3:
        raise DegenerateShapeError(f"mask has {n} foreground pixels; need >= 3")
    x = cols.astype(float)
    y = rows.astype(float)
    cx, cy = x.mean(), y.mean()
    dx, dy = x - cx, y - cy
    mu20 = float(np.mean(dx * dx))
    mu02 = float(np.mean(dy * dy))
    mu11 = float(np.mean(dx * dy))
    cov = np.array([[mu20, mu11], [mu11, mu02]])
    eig = np.linalg.eigvalsh(cov)  # ascending
    if eig[0] <= 1e-9:
        raise DegenerateShapeError("foreground pixels are collinear")
    angle = 0.5 * math.degrees(math.atan2(2.0 * mu11, mu20 - mu02))
    angle %= 180.0
    return MomentEllipse(cx, cy, 2.0 * math.sqrt(eig[1]), 2.0 * math.sqrt(eig[0]), angle)


def crack_edge_count(mask: np.ndarray) -> int:
    """4-neighbor foreground/background pixel edges (image border = background)."""
    p = np.pad(np.asarray(mask, dtype=bool), 1, constant_values=False)
    return int(np.sum(p[1:, :] != p[:-1, :]) + np.sum(p[:, 1:] != p[:, :-1]))


def perimeter(mask: np.ndarray) -> float:
    """Crofton two-direction estimate: crack edges scaled by pi/4, which is
    unbiased for smooth convex shapes and doubles exactly under a 2x
    nearest-neighbor upscale."""
    return crack_edge_count(mask) * math.pi / 4.0


def mirror_mask(mask: np.ndarray) -> np.ndarray:
    """Horizontal flip used on right-hand masks so both hands share geometry."""
    return np.fliplr(np.asarray(mask, dtype=bool)).copy()


def _sector_index(dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    # Angle measured clockwise from "up" (N) in image coordinates, where y
    # grows downward; sectors are 45 degrees wide, centered on the compass
    # directions, half-open clockwise.
    theta = np.degrees(np.arctan2(dx, -dy))
    return np.floor(((theta + 22.5) % 360.0) / 45.0).astype(int)


def extract_features(mask: np.ndarray, ratio_cap: float = 100.0) -> np.ndarray:
    """19-feature hand-shape descriptor of a non-degenerate binary mask.

    Layout (1-based): 1 ellipse width, 2 ellipse height, 3 compactness
    (perimeter^2/area), 4 hand outside/inside ellipse, 5 hand/background
    inside ellipse, 6 sin(2a), 7 cos(2a), 8 elongation, 9..16 sector fill
    fractions (NW N NE E SE S SW W), 17 area, 18 bbox width, 19 bbox height.
    Ratio features with a zero denominator saturate at ``ratio_cap``.
    """
    mask = np.asarray(mask, dtype=bool)
    ell = fit_ellipse(mask)
    rows, cols = np.nonzero(mask)
    area = rows.size

    f = np.zeros(N_FEATURES)
    f[0] = 2.0 * ell.a
    f[1] = 2.0 * ell.b
    f[2] = perimeter(mask) ** 2 / area

    r0, r1 = int(rows.min()), int(rows.max())
    c0, c1 = int(cols.min()), int(cols.max())

    # Ellipse membership evaluated on the pixel grid covering both the mask
    # bounding box and the ellipse extent (clipped to the image).
    pad = int(math.ceil(ell.a)) + 1
    er0 = max(0, min(r0, int(ell.cy) - pad))
    er1 = min(mask.shape[0] - 1, max(r1, int(ell.cy) + pad))
    ec0 = max(0, min(c0, int(ell.cx) - pad))
    ec1 = min(mask.shape[1] - 1, max(c1, int(ell.cx) + pad))
    yy, xx = np.mgrid[er0 : er1 + 1, ec0 : ec1 + 1]
    rel_x = xx - ell.cx
    rel_y = yy - ell.cy
    rad = math.radians(ell.angle_deg)
    u = rel_x * math.cos(rad) + rel_y * math.sin(rad)
    v = -rel_x * math.sin(rad) + rel_y * math.cos(rad)
    inside = (u / ell.a) ** 2 + (v / ell.b) ** 2 <= 1.0
    sub = mask[er0 : er1 + 1, ec0 : ec1 + 1]
    hand_in = int(np.sum(sub & inside))
    hand_out = area - hand_in
    bg_in = int(np.sum(~sub & inside))
    f[3] = hand_out / hand_in if hand_in > 0 else ratio_cap
    f[4] = hand_in / bg_in if bg_in > 0 else ratio_cap

    two_alpha = math.radians(2.0 * ell.angle_deg)
    f[5] = math.sin(two_alpha)
    f[6] = math.cos(two_alpha)
    f[7] = ell.a / ell.b

    # Sector fill: fraction of each angular slice of the bounding box that
    # is covered by hand pixels.
    byy, bxx = np.mgrid[r0 : r1 + 1, c0 : c1 + 1]
    center_x = (c0 + c1) / 2.0
    center_y = (r0 + r1) / 2.0
    sectors = _sector_index(bxx - center_x, byy - center_y)
    box = mask[r0 : r1 + 1, c0 : c1 + 1]
    for feat_idx, name in enumerate(SECTOR_ORDER):
        sel = sectors == _CLOCKWISE.index(name)
        total = int(sel.sum())
        f[8 + feat_idx] = float(np.sum(box[sel])) / total if total else 0.0

    f[16] = float(area)
    f[17] = float(c1 - c0 + 1)
    f[18] = float(r1 - r0 + 1)
    return f


@dataclass(frozen=True)
class FeatureRanges:
    """Per-feature (min, max) learned from a training corpus."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        if np.any(self.lo > self.hi):
            raise ValueError("range min must not exceed max")

    @classmethod
    def fit(cls, vectors: Sequence[np.ndarray]) -> "FeatureRanges":
        arr = np.asarray(list(vectors), dtype=float)
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise ValueError("need at least one feature vector")
        return cls(arr.min(axis=0), arr.max(axis=0))

    def to_dict(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureRanges":
        return cls(np.asarray(d["lo"], dtype=float), np.asarray(d["hi"], dtype=float))


def normalize_features(v: np.ndarray, ranges: FeatureRanges) -> np.ndarray:
    """Map to [0, 1]: fraction features pass through, the rest are min-max
    scaled and clamped; a collapsed range pins the output at 0.5."""
    v = np.asarray(v, dtype=float)
    span = ranges.hi - ranges.lo
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(span > 0, (v - ranges.lo) / np.where(span > 0, span, 1.0), 0.5)
    out = np.clip(out, 0.0, 1.0)
    out[PERCENTAGE_FEATURES] = v[PERCENTAGE_FEATURES]
    return out


@dataclass
class ShapeCluster:
    cluster_id: int
    name: str
    templates: np.ndarray  # (m, 19), normalized

    def __post_init__(self) -> None:
        self.templates = np.asarray(self.templates, dtype=float)
        if self.templates.ndim != 2 or self.templates.shape[0] == 0:
            raise ValueError(f"cluster {self.cluster_id} has no templates")
        if self.templates.min() < -1e-9 or self.templates.max() > 1 + 1e-9:
            raise ValueError(
                f"cluster {self.cluster_id} templates must be normalized to [0, 1]"
            )


@dataclass
class TemplateLibrary:
    clusters: list[ShapeCluster]
    reject_threshold: float = 0.6
    knn_k: int = 4

    def __post_init__(self) -> None:
        if not self.clusters:
            raise ValueError("template library has no clusters")

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    def to_dict(self) -> dict:
        return {
            "reject_threshold": self.reject_threshold,
            "knn_k": self.knn_k,
            "clusters": [
                {"id": c.cluster_id, "name": c.name, "templates": c.templates.tolist()}
                for c in self.clusters
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TemplateLibrary":
        return cls(
            clusters=[
                ShapeCluster(c["id"], c.get("name", str(c["id"])), c["templates"])
                for c in d["clusters"]
            ],
            reject_threshold=float(d.get("reject_threshold", 0.6)),
            knn_k=int(d.get("knn_k", 4)),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TemplateLibrary":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def cluster_distances(v: np.ndarray, lib: TemplateLibrary) -> np.ndarray:
    """Per cluster: mean Euclidean distance to the k nearest templates
    (clusters smaller than k use all of their templates)."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(lib.n_clusters)
    for i, cluster in enumerate(lib.clusters):
        d = np.linalg.norm(cluster.templates - v, axis=1)
        k = min(lib.knn_k, d.size)
        out[i] = float(np.sort(d)[:k].mean())
    return out


def smooth_distances(history: Sequence[np.ndarray]) -> np.ndarray:
    """Weighted average over the last <= 6 frames of distance vectors
    (chronological order, newest last); shorter histories renormalize the
    truncated weights to sum 1."""
    if len(history) == 0:
        raise ValueError("distance history is empty")
    recent = list(history)[-len(SMOOTHING_WEIGHTS) :]
    w = SMOOTHING_WEIGHTS[: len(recent)]
    w = w / w.sum()
    stacked = np.asarray(recent[::-1], dtype=float)  # newest first
    return w @ stacked


UNCLASSIFIED = None


@dataclass(frozen=True)
class ClusterDecision:
    smoothed_distances: np.ndarray
    cluster_id: int | None  # None = unclassified
    distances: np.ndarray | None = None  # raw, pre-smoothing, when available


def classify_shape(
    smoothed: np.ndarray,
    lib: TemplateLibrary,
    distances: np.ndarray | None = None,
) -> ClusterDecision:
    """Argmin cluster if its smoothed distance clears the reject threshold;
    exact ties go to the lowest cluster id."""
    smoothed = np.asarray(smoothed, dtype=float)
    best_pos = min(
        range(len(smoothed)), key=lambda i: (smoothed[i], lib.clusters[i].cluster_id)
    )
    if smoothed[best_pos] <= lib.reject_threshold:
        cluster_id = lib.clusters[best_pos].cluster_id
    else:
        cluster_id = UNCLASSIFIED
    return ClusterDecision(smoothed, cluster_id, distances)


class ShapeClassifier:
    """Per-sequence stateful classifier: extracts nothing itself, just keeps
    the six-frame smoothing window and applies the reject rule."""

    def __init__(self, lib: TemplateLibrary):
        self.lib = lib
        self._history: deque[np.ndarray] = deque(maxlen=len(SMOOTHING_WEIGHTS))

    def reset(self) -> None:
        self._history.clear()

    def observe(self, normalized: np.ndarray) -> ClusterDecision:
        raw = cluster_distances(normalized, self.lib)
        self._history.append(raw)
        smoothed = smooth_distances(list(self._history))
        return classify_shape(smoothed, self.lib, distances=raw)


def build_library(
    labeled: Sequence[tuple[int, np.ndarray]],
    templates_per_cluster: int = 15,
    reject_threshold: float = 0.6,
    knn_k: int = 4,
    names: dict[int, str] | None = None,
) -> TemplateLibrary:
    """Build a library from (cluster id, normalized vector) exemplars.

    Clusters larger than ``templates_per_cluster`` are reduced by averaging
    contiguous chunks, which keeps the build deterministic.
    """
    by_id: dict[int, list[np.ndarray]] = {}
    for cid, vec in labeled:
        by_id.setdefault(int(cid), []).append(np.asarray(vec, dtype=float))
    clusters = []
    for cid in sorted(by_id):
        vecs = np.asarray(by_id[cid])
        if vecs.shape[0] > templates_per_cluster:
            chunks = np.array_split(vecs, templates_per_cluster)
            vecs = np.asarray([c.mean(axis=0) for c in chunks])
        name = (names or {}).get(cid, f"cluster-{cid}")
        clusters.append(ShapeCluster(cid, name, vecs))
    return TemplateLibrary(clusters, reject_threshold, knn_k)
