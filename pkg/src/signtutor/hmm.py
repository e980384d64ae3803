"""Left-to-right continuous HMMs: flat-start init, Baum-Welch, forward scoring.

Models advance by at most one state per frame (transition support is
restricted to ``{i, i+1}``), always start in state 0, and emit from a single
diagonal-covariance Gaussian per state.  All likelihood work is done in the
log domain, so arbitrarily long sequences score without underflow and a
brute-force path enumeration can be compared against the forward recursion
exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import LayoutMismatchError, TrainingError

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class TrainConfig:
    """Baum-Welch hyperparameters.  All fields must be positive."""

    n_states: int = 4
    max_iters: int = 100
    rel_tol: float = 1e-4
    var_floor: float = 1e-4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_states < 1:
            raise ValueError("n_states must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if not self.var_floor > 0:
            raise ValueError("var_floor must be > 0")


@dataclass
class SignHmm:
    """Parameters of one per-sign model.

    ``trans`` is row-stochastic with support on the diagonal and first
    superdiagonal only; the initial distribution is implicitly
    ``(1, 0, ..., 0)``.
    """

    n_states: int
    trans: np.ndarray  # (n, n)
    means: np.ndarray  # (n, d)
    variances: np.ndarray  # (n, d)
    layout_tag: str = ""

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def validate(self, atol: float = 1e-9) -> None:
        n = self.n_states
        if self.trans.shape != (n, n):
            raise ValueError("transition matrix shape mismatch")
        if self.means.shape != self.variances.shape or self.means.shape[0] != n:
            raise ValueError("emission parameter shape mismatch")
        if np.any(self.variances <= 0):
            raise ValueError("variances must be positive")
        rows = self.trans.sum(axis=1)
        if not np.allclose(rows, 1.0, atol=atol):
            raise ValueError("transition rows must sum to 1")
        off = self.trans.copy()
        for i in range(n):
            off[i, i] = 0.0
            if i + 1 < n:
                off[i, i + 1] = 0.0
        if np.any(off != 0.0):
            raise ValueError("transitions outside {self, advance} support")

    def to_dict(self) -> dict:
        return {
            "n_states": self.n_states,
            "A": self.trans.tolist(),
            "means": self.means.tolist(),
            "vars": self.variances.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict, layout_tag: str = "") -> "SignHmm":
        return cls(
            n_states=int(d["n_states"]),
            trans=np.asarray(d["A"], dtype=float),
            means=np.asarray(d["means"], dtype=float),
            variances=np.asarray(d["vars"], dtype=float),
            layout_tag=layout_tag,
        )


def _as_sequences(sequences: Sequence[np.ndarray]) -> list[np.ndarray]:
    out = [np.asarray(s, dtype=float) for s in sequences]
    if not out:
        raise TrainingError("at least one training sequence is required")
    dim = out[0].shape[1]
    for s in out:
        if s.ndim != 2 or s.shape[1] != dim:
            raise TrainingError("training sequences must share one feature dimension")
    return out


def init_model(
    sequences: Sequence[np.ndarray],
    n_states: int,
    var_floor: float = 1e-4,
    layout_tag: str = "",
) -> SignHmm:
    """Flat-start initialization from equal time segments.

    Each sequence is split into ``n_states`` contiguous segments; state
    means/variances come from the statistics pooled over the matching
    segments of every sequence.  Deterministic given its inputs.
    """
    seqs = _as_sequences(sequences)
    for s in seqs:
        if s.shape[0] < n_states:
            raise TrainingError(
                f"sequence of length {s.shape[0]} is shorter than {n_states} states"
            )
    dim = seqs[0].shape[1]
    means = np.zeros((n_states, dim))
    variances = np.zeros((n_states, dim))
    for i in range(n_states):
        chunks = [np.array_split(s, n_states)[i] for s in seqs]
        pooled = np.concatenate(chunks, axis=0)
        means[i] = pooled.mean(axis=0)
        variances[i] = np.maximum(pooled.var(axis=0), var_floor)
    trans = np.zeros((n_states, n_states))
    for i in range(n_states - 1):
        trans[i, i] = 0.5
        trans[i, i + 1] = 0.5
    trans[n_states - 1, n_states - 1] = 1.0
    return SignHmm(n_states, trans, means, variances, layout_tag)


def _frame_log_emissions(model: SignHmm, seq: np.ndarray) -> np.ndarray:
    """(T, n) matrix of per-frame, per-state Gaussian log densities."""
    x = seq[:, None, :]  # (T, 1, d)
    mu = model.means[None, :, :]  # (1, n, d)
    var = model.variances[None, :, :]
    return -0.5 * np.sum(LOG_2PI + np.log(var) + (x - mu) ** 2 / var, axis=2)


def _check_dims(model: SignHmm, seq: np.ndarray, layout_tag: str | None) -> np.ndarray:
    seq = np.asarray(seq, dtype=float)
    if seq.ndim != 2 or seq.shape[1] != model.dim:
        raise LayoutMismatchError(
            f"sequence dim {seq.shape} does not match model dim {model.dim}"
        )
    if layout_tag is not None and model.layout_tag and layout_tag != model.layout_tag:
        raise LayoutMismatchError(
            f"layout {layout_tag!r} does not match model layout {model.layout_tag!r}"
        )
    return seq


def _forward(model: SignHmm, logb: np.ndarray) -> np.ndarray:
    """Log-domain forward lattice; alpha[t, j] = log p(o_0..o_t, s_t = j)."""
    T, n = logb.shape
    with np.errstate(divide="ignore"):
        log_a = np.log(model.trans)
    alpha = np.full((T, n), -np.inf)
    alpha[0, 0] = logb[0, 0]
    for t in range(1, T):
        stay = alpha[t - 1] + np.diag(log_a)
        move = np.full(n, -np.inf)
        move[1:] = alpha[t - 1, :-1] + np.diag(log_a, k=1)
        alpha[t] = np.logaddexp(stay, move) + logb[t]
    return alpha


def _backward(model: SignHmm, logb: np.ndarray) -> np.ndarray:
    T, n = logb.shape
    with np.errstate(divide="ignore"):
        log_a = np.log(model.trans)
    beta = np.full((T, n), -np.inf)
    beta[T - 1] = 0.0
    for t in range(T - 2, -1, -1):
        stay = np.diag(log_a) + logb[t + 1] + beta[t + 1]
        move = np.full(n, -np.inf)
        move[:-1] = np.diag(log_a, k=1) + logb[t + 1, 1:] + beta[t + 1, 1:]
        beta[t] = np.logaddexp(stay, move)
    return beta


def log_likelihood(model: SignHmm, seq: np.ndarray, layout_tag: str | None = None) -> float:
    """Exact marginal log p(seq | model) over all state paths.

    ``-inf`` is a legal result for sequences the topology assigns zero
    probability (e.g. zero self-transitions force more advancement than the
    sequence has frames).
    """
    seq = _check_dims(model, seq, layout_tag)
    if seq.shape[0] == 0:
        raise ValueError("cannot score an empty sequence")
    logb = _frame_log_emissions(model, seq)
    alpha = _forward(model, logb)
    return float(logsumexp(alpha[-1]))


@dataclass
class _Accumulators:
    n_states: int
    dim: int
    trans_num: np.ndarray = field(init=False)
    occ: np.ndarray = field(init=False)
    wsum: np.ndarray = field(init=False)
    wsq: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.trans_num = np.zeros((self.n_states, self.n_states))
        self.occ = np.zeros(self.n_states)
        self.wsum = np.zeros((self.n_states, self.dim))
        self.wsq = np.zeros((self.n_states, self.dim))


def _e_step(model: SignHmm, seq: np.ndarray, acc: _Accumulators) -> float:
    logb = _frame_log_emissions(model, seq)
    alpha = _forward(model, logb)
    beta = _backward(model, logb)
    ll = float(logsumexp(alpha[-1]))
    if not np.isfinite(ll):
        return ll
    gamma = np.exp(alpha + beta - ll)  # (T, n)
    T, n = logb.shape
    with np.errstate(divide="ignore"):
        log_a = np.log(model.trans)
    if T > 1:
        # Transition posteriors, restricted to the {self, advance} support.
        stay = np.exp(
            alpha[:-1] + np.diag(log_a)[None, :] + logb[1:] + beta[1:] - ll
        )  # (T-1, n)
        adv = np.exp(
            alpha[:-1, :-1]
            + np.diag(log_a, k=1)[None, :]
            + logb[1:, 1:]
            + beta[1:, 1:]
            - ll
        )  # (T-1, n-1)
        acc.trans_num[np.arange(n), np.arange(n)] += stay.sum(axis=0)
        acc.trans_num[np.arange(n - 1), np.arange(1, n)] += adv.sum(axis=0)
    acc.occ += gamma.sum(axis=0)
    acc.wsum += gamma.T @ seq
    acc.wsq += gamma.T @ (seq**2)
    return ll


def _m_step(model: SignHmm, acc: _Accumulators, var_floor: float) -> SignHmm:
    n = model.n_states
    trans = model.trans.copy()
    for i in range(n):
        row = acc.trans_num[i]
        total = row.sum()
        if total > 0:
            # Zero-count rows keep their previous values; otherwise the
            # renormalization stays inside the allowed support by design.
            trans[i] = row / total
    means = model.means.copy()
    variances = model.variances.copy()
    seen = acc.occ > 1e-12
    means[seen] = acc.wsum[seen] / acc.occ[seen, None]
    second = np.zeros_like(means)
    second[seen] = acc.wsq[seen] / acc.occ[seen, None]
    variances[seen] = np.maximum(second[seen] - means[seen] ** 2, var_floor)
    return SignHmm(n, trans, means, variances, model.layout_tag)


def total_log_likelihood(model: SignHmm, sequences: Sequence[np.ndarray]) -> float:
    return float(sum(log_likelihood(model, s) for s in sequences))


def train(
    sequences: Sequence[np.ndarray],
    cfg: TrainConfig = TrainConfig(),
    layout_tag: str = "",
) -> tuple[SignHmm, list[float]]:
    """Baum-Welch from a flat start.

    Returns the trained model and the per-iteration total log-likelihood
    trace; ``trace[0]`` is the flat-start score and ``trace[k]`` the score
    after ``k`` EM updates, so the trace is non-decreasing up to float
    noise.  Training stops after ``max_iters`` updates or when the relative
    improvement falls below ``rel_tol``.
    """
    seqs = _as_sequences(sequences)
    model = init_model(seqs, cfg.n_states, cfg.var_floor, layout_tag)
    trace = [total_log_likelihood(model, seqs)]
    if not np.isfinite(trace[0]):
        raise TrainingError("flat-start model assigns zero likelihood to the data")
    for it in range(1, cfg.max_iters + 1):
        acc = _Accumulators(model.n_states, model.dim)
        ll = 0.0
        for seq in seqs:
            seq_ll = _e_step(model, seq, acc)
            if not np.isfinite(seq_ll):
                raise TrainingError(f"likelihood underflow at iteration {it}")
            ll += seq_ll
        model = _m_step(model, acc, cfg.var_floor)
        new_ll = total_log_likelihood(model, seqs)
        if not np.isfinite(new_ll):
            raise TrainingError(f"likelihood underflow at iteration {it}")
        trace.append(new_ll)
        if (new_ll - ll) / max(abs(ll), 1e-300) < cfg.rel_tol:
            break
    return model, trace


def sample(
    model: SignHmm, length: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Draw one observation sequence (and its state path) from the model."""
    states = np.zeros(length, dtype=int)
    obs = np.zeros((length, model.dim))
    s = 0
    for t in range(length):
        states[t] = s
        obs[t] = rng.normal(model.means[s], np.sqrt(model.variances[s]))
        if t + 1 < length:
            s = int(rng.choice(model.n_states, p=model.trans[s]))
    return obs, states


# --- model bank serialization -------------------------------------------------

def bank_to_dict(bank: dict[str, SignHmm], layout_tag: str) -> dict:
    return {
        "layout_tag": layout_tag,
        "signs": [
            {"id": sign_id, **bank[sign_id].to_dict()} for sign_id in sorted(bank)
        ],
    }


def bank_from_dict(d: dict) -> tuple[dict[str, SignHmm], str]:
    layout_tag = d.get("layout_tag", "")
    bank = {
        entry["id"]: SignHmm.from_dict(entry, layout_tag) for entry in d["signs"]
    }
    return bank, layout_tag


def save_bank(path: str | Path, bank: dict[str, SignHmm], layout_tag: str) -> None:
    Path(path).write_text(json.dumps(bank_to_dict(bank, layout_tag)), encoding="utf-8")


def load_bank(path: str | Path) -> tuple[dict[str, SignHmm], str]:
    return bank_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
