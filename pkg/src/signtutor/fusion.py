"""Model banks, confusability clusters, sequential fusion and evaluation.

Three per-sign HMM banks are trained on column slices of one COMBINED
feature layout: hands only, hands+head, and head only.  A validation pass
with the combined bank yields per-sign confusability clusters; at test time
the combined bank picks a base sign and the head-only bank re-decides among
the base's cluster.  No prior knowledge of which signs form a family enters
recognition; groups are only an evaluation lens.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import LayoutMismatchError, TrainingError
from .features import Group
from .hmm import SignHmm, TrainConfig, bank_from_dict, bank_to_dict, log_likelihood, train
from .ingest import FeatureRecord


@dataclass
class ModelBanks:
    manual: dict[str, SignHmm]
    combined: dict[str, SignHmm]
    nonmanual: dict[str, SignHmm]
    layout_tag: str
    manual_cols: list[int]
    nonmanual_cols: list[int]

    def __post_init__(self) -> None:
        ids = set(self.combined)
        if set(self.manual) != ids or set(self.nonmanual) != ids:
            raise ValueError("all three banks must cover the identical sign-id set")

    @property
    def sign_ids(self) -> list[str]:
        return sorted(self.combined)

    def _check_layout(self, rows: np.ndarray, layout_tag: str | None) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        if layout_tag is not None and self.layout_tag and layout_tag != self.layout_tag:
            raise LayoutMismatchError(
                f"sequence layout {layout_tag!r} does not match banks "
                f"layout {self.layout_tag!r}"
            )
        width = len(self.manual_cols) + len(self.nonmanual_cols)
        if rows.ndim != 2 or rows.shape[1] != width:
            raise LayoutMismatchError(
                f"sequence dim {rows.shape} does not match combined dim {width}"
            )
        return rows

    def scores(
        self, bank: str, rows: np.ndarray, layout_tag: str | None = None
    ) -> dict[str, float]:
        """Log-likelihood of one sequence under every sign model of a bank.

        Deliberately not length-normalized: every decision compares one
        fixed sequence across models, so length factors cancel in the
        argmax.
        """
        rows = self._check_layout(rows, layout_tag)
        if bank == "manual":
            models, view = self.manual, rows[:, self.manual_cols]
        elif bank == "nonmanual":
            models, view = self.nonmanual, rows[:, self.nonmanual_cols]
        elif bank == "combined":
            models, view = self.combined, rows
        else:
            raise ValueError(f"unknown bank {bank!r}")
        return {sign_id: log_likelihood(m, view) for sign_id, m in models.items()}


def _argmax(scores: dict[str, float]) -> str:
    # Deterministic: ties break to the smallest sign id.
    return max(sorted(scores), key=lambda s: scores[s])


def train_banks(
    train_set: Sequence[FeatureRecord],
    cfg: TrainConfig = TrainConfig(),
    manual_cols: Sequence[int] | None = None,
    nonmanual_cols: Sequence[int] | None = None,
) -> ModelBanks:
    """Per sign, three HMMs on the appropriate column slices.

    Column slices default to "last three columns are the head channels",
    which matches the standard assembly layout.
    """
    if not train_set:
        raise TrainingError("empty training set")
    for rec in train_set:
        if rec.features.group is not Group.COMBINED:
            raise TrainingError("training requires COMBINED feature sequences")
    width = train_set[0].features.dim
    layout_tag = train_set[0].features.layout_tag
    if nonmanual_cols is None:
        nonmanual_cols = list(range(width - 3, width))
    if manual_cols is None:
        manual_cols = [c for c in range(width) if c not in set(nonmanual_cols)]

    by_label: dict[str, list[np.ndarray]] = {}
    for rec in train_set:
        by_label.setdefault(rec.label, []).append(rec.features.rows)
    for label, seqs in sorted(by_label.items()):
        if len(seqs) < 2:
            raise TrainingError(f"class {label!r} has {len(seqs)} training sequences; need >= 2")

    banks: dict[str, dict[str, SignHmm]] = {"manual": {}, "combined": {}, "nonmanual": {}}
    slices = {
        "manual": list(manual_cols),
        "combined": list(range(width)),
        "nonmanual": list(nonmanual_cols),
    }
    for label, seqs in sorted(by_label.items()):
        for bank_name, cols in slices.items():
            views = [s[:, cols] for s in seqs]
            model, _ = train(views, cfg, layout_tag=f"{layout_tag}|{bank_name}")
            banks[bank_name][label] = model
    return ModelBanks(
        manual=banks["manual"],
        combined=banks["combined"],
        nonmanual=banks["nonmanual"],
        layout_tag=layout_tag,
        manual_cols=list(manual_cols),
        nonmanual_cols=list(nonmanual_cols),
    )


@dataclass
class ClusterMap:
    """Per sign: the ordered set of signs it is confusable with (always
    including itself)."""

    clusters: dict[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        for sign_id, members in self.clusters.items():
            if sign_id not in members:
                raise ValueError(f"cluster of {sign_id!r} must contain itself")

    def cluster(self, sign_id: str) -> tuple[str, ...]:
        return self.clusters.get(sign_id, (sign_id,))

    def all_singletons(self) -> bool:
        return all(len(m) == 1 for m in self.clusters.values())

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in sorted(self.clusters.items())}

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterMap":
        return cls({k: tuple(v) for k, v in d.items()})


def extract_clusters(
    banks: ModelBanks,
    validation_set: Sequence[FeatureRecord],
    symmetric: bool = False,
) -> ClusterMap:
    """Classify the validation set with the combined bank; every
    misclassification adds the predicted sign to the true sign's cluster."""
    if not validation_set:
        raise TrainingError("empty validation set")
    members: dict[str, set[str]] = {sign_id: {sign_id} for sign_id in banks.sign_ids}
    for rec in validation_set:
        predicted = _argmax(banks.scores("combined", rec.features.rows, rec.features.layout_tag))
        members.setdefault(rec.label, {rec.label}).add(predicted)
        if symmetric:
            members.setdefault(predicted, {predicted}).add(rec.label)
    return ClusterMap({k: tuple(sorted(v)) for k, v in members.items()})


@dataclass(frozen=True)
class FusionDecision:
    base: str
    candidates: tuple[str, ...]
    final: str
    combined_scores: dict[str, float]
    nonmanual_scores: dict[str, float]  # candidates only

    def __post_init__(self) -> None:
        if self.base not in self.candidates or self.final not in self.candidates:
            raise ValueError("base and final must lie in the candidate set")


def classify_sequential(
    banks: ModelBanks,
    clusters: ClusterMap,
    rows: np.ndarray,
    layout_tag: str | None = None,
) -> FusionDecision:
    """Two-stage decision: combined-bank argmax picks the base sign, then
    the head-only bank re-decides within the base's confusability cluster."""
    combined_scores = banks.scores("combined", rows, layout_tag)
    base = _argmax(combined_scores)
    candidates = clusters.cluster(base)
    nonmanual_all = banks.scores("nonmanual", rows, layout_tag)
    nonmanual_scores = {s: nonmanual_all[s] for s in candidates}
    final = _argmax(nonmanual_scores)
    return FusionDecision(base, candidates, final, combined_scores, nonmanual_scores)


def make_decider(
    banks: ModelBanks, clusters: ClusterMap | None = None, mode: str = "fused"
) -> Callable[[FeatureRecord], str]:
    """Uniform label-deciding callables for evaluate()."""
    if mode == "fused":
        if clusters is None:
            raise ValueError("fused mode requires a cluster map")
        return lambda rec: classify_sequential(
            banks, clusters, rec.features.rows, rec.features.layout_tag
        ).final
    if mode in ("manual", "combined", "nonmanual"):
        return lambda rec: _argmax(banks.scores(mode, rec.features.rows, rec.features.layout_tag))
    raise ValueError(f"unknown decision mode {mode!r}")


@dataclass
class ConfusionMatrix:
    labels: list[str]
    counts: np.ndarray  # (true, predicted)

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=int)
        n = len(self.labels)
        if self.counts.shape != (n, n):
            raise ValueError("counts must be square over the label set")
        if (self.counts < 0).any():
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total if self.total else 0.0

    def within_group_accuracy(self, partition: dict[str, Iterable[str]]) -> float:
        """Prediction counts as correct if it lies in the true sign's group."""
        index = {label: i for i, label in enumerate(self.labels)}
        group_of: dict[str, str] = {}
        for group_id, members in partition.items():
            for m in members:
                group_of[m] = group_id
        hits = 0
        for ti, true in enumerate(self.labels):
            for pi, pred in enumerate(self.labels):
                if self.counts[ti, pi] and group_of.get(true) == group_of.get(pred):
                    hits += self.counts[ti, pi]
        return float(hits) / self.total if self.total else 0.0

    def row_sums(self) -> dict[str, int]:
        return {label: int(self.counts[i].sum()) for i, label in enumerate(self.labels)}

    def render_text(self, title: str = "") -> str:
        width = max(max((len(s) for s in self.labels), default=4), 4)
        head = " " * (width + 1) + " ".join(f"{s:>{width}}" for s in self.labels)
        lines = [title, head] if title else [head]
        for i, label in enumerate(self.labels):
            row = " ".join(f"{int(v):>{width}}" for v in self.counts[i])
            lines.append(f"{label:>{width}} {row}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"labels": self.labels, "confusion": self.counts.tolist()}


@dataclass
class EvalReport:
    confusion: ConfusionMatrix
    accuracy: float
    within_group_accuracy: float | None = None

    def to_dict(self) -> dict:
        d = self.confusion.to_dict()
        d["accuracy"] = self.accuracy
        d["within_group_accuracy"] = self.within_group_accuracy
        return d


def evaluate(
    decide: Callable[[FeatureRecord], str],
    test_set: Sequence[FeatureRecord],
    group_partition: dict[str, Iterable[str]] | None = None,
    labels: Sequence[str] | None = None,
) -> EvalReport:
    pairs = [(rec.label, decide(rec)) for rec in test_set]
    if labels is None:
        labels = sorted({t for t, _ in pairs} | {p for _, p in pairs})
    labels = list(labels)
    index = {label: i for i, label in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=int)
    for true, predicted in pairs:
        counts[index[true], index[predicted]] += 1
    cm = ConfusionMatrix(labels, counts)
    within = cm.within_group_accuracy(group_partition) if group_partition else None
    return EvalReport(cm, cm.accuracy(), within)


# --- splits -------------------------------------------------------------------------


def split_dataset(
    records: Sequence[FeatureRecord],
    train_frac: float = 0.7,
    val_frac_of_train: float = 0.2,
    seed: int = 0,
    strategy: str = "by-performance",
    subjects: dict[str, str] | None = None,
) -> tuple[list[FeatureRecord], list[FeatureRecord], list[FeatureRecord]]:
    """Stratified train/validation/test split.

    ``by-performance`` shuffles repetitions per class; ``by-subject`` keeps
    whole subjects together (requires a seq_id -> subject mapping).
    """
    rng = np.random.default_rng(seed)
    train: list[FeatureRecord] = []
    val: list[FeatureRecord] = []
    test: list[FeatureRecord] = []
    if strategy == "by-performance":
        by_label: dict[str, list[FeatureRecord]] = {}
        for rec in records:
            by_label.setdefault(rec.label, []).append(rec)
        for label in sorted(by_label):
            recs = by_label[label]
            order = rng.permutation(len(recs))
            n_train = int(round(train_frac * len(recs)))
            n_val = int(round(val_frac_of_train * n_train))
            for pos, idx in enumerate(order):
                if pos < n_train - n_val:
                    train.append(recs[idx])
                elif pos < n_train:
                    val.append(recs[idx])
                else:
                    test.append(recs[idx])
    elif strategy == "by-subject":
        if not subjects:
            raise ValueError("by-subject split requires subject assignments")
        subject_ids = sorted(set(subjects.values()))
        order = rng.permutation(len(subject_ids))
        n_train = max(1, int(round(train_frac * len(subject_ids))))
        n_val = max(1, int(round(val_frac_of_train * n_train))) if n_train > 1 else 0
        train_subj = {subject_ids[i] for i in order[: n_train - n_val]}
        val_subj = {subject_ids[i] for i in order[n_train - n_val : n_train]}
        for rec in records:
            subj = subjects.get(rec.seq_id)
            if subj in train_subj:
                train.append(rec)
            elif subj in val_subj:
                val.append(rec)
            else:
                test.append(rec)
    else:
        raise ValueError(f"unknown split strategy {strategy!r}")
    return train, val, test


# --- persistence ---------------------------------------------------------------------


def save_banks(
    path: str | Path,
    banks: ModelBanks,
    clusters: ClusterMap | None = None,
    meta: dict | None = None,
) -> None:
    payload = {
        "layout_tag": banks.layout_tag,
        "manual_cols": banks.manual_cols,
        "nonmanual_cols": banks.nonmanual_cols,
        "banks": {
            name: bank_to_dict(getattr(banks, name), banks.layout_tag)
            for name in ("manual", "combined", "nonmanual")
        },
        "clusters": clusters.to_dict() if clusters else None,
        "meta": meta or {},
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_banks(path: str | Path) -> tuple[ModelBanks, ClusterMap | None, dict]:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    parts = {}
    for name in ("manual", "combined", "nonmanual"):
        bank, _ = bank_from_dict(d["banks"][name])
        for model in bank.values():
            model.layout_tag = f"{d['layout_tag']}|{name}"
        parts[name] = bank
    banks = ModelBanks(
        manual=parts["manual"],
        combined=parts["combined"],
        nonmanual=parts["nonmanual"],
        layout_tag=d["layout_tag"],
        manual_cols=list(d["manual_cols"]),
        nonmanual_cols=list(d["nonmanual_cols"]),
    )
    clusters = ClusterMap.from_dict(d["clusters"]) if d.get("clusters") else None
    return banks, clusters, d.get("meta", {})
