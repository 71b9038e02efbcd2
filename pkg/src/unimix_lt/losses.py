"""Cross-entropy variants for long-tailed training, with analytic gradients.

The central loss adds a per-class margin to the logits before the softmax
to compensate the mismatch between the training label prior pi and the
target (test-time) prior pi':

    margin_y = ln(pi_y) - ln(pi'_y),

which for a balanced target reduces to ln(pi_y) + ln(C) and vanishes when
train and target priors agree. The margin is a training-time device only;
inference uses the raw logits.

The comparison zoo implements the bare formulas of the usual suspects:
focal reweighting, effective-number (class-balanced) weights, per-class
logit temperatures, a true-class-only margin scaled by n^(-1/4), and the
prior-scaled margin on every logit. Two of the zoo members deliberately
break softmax shift invariance and simplex-tangent gradients: the
per-class temperature rescales logits rather than shifting them.

Natural log throughout. All functions accept a single logit vector; the
batch_* variants take an (N, C) matrix and vectorize over rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .theory import check_prior

__all__ = [
    "LossSpec",
    "LOSS_KINDS",
    "softmax",
    "log_softmax",
    "bayias_margin",
    "cross_entropy",
    "bayias_ce",
    "bayias_ce_pairwise",
    "focal_loss",
    "cb_loss",
    "cdt_loss",
    "ldam_loss",
    "la_loss",
    "loss_value",
    "loss_grad",
    "batch_loss",
    "batch_grad",
    "mixed_vrm_loss",
]

LOSS_KINDS = ("ce", "bayias_ce", "focal", "cb", "cdt", "ldam", "la")


def softmax(z: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax over the last axis; rows sum to 1."""
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def bayias_margin(train_prior: np.ndarray, target_prior: np.ndarray | None = None) -> np.ndarray:
    """Per-class margin ln(pi) - ln(pi'); balanced target when pi' is None.

    Zero everywhere when the two priors coincide (in particular for a
    uniform train prior with a balanced target).
    """
    pi = check_prior(train_prior, require_positive=True)
    if target_prior is None:
        return np.log(pi) + math.log(pi.shape[0])
    pi_target = check_prior(target_prior, require_positive=True)
    if pi_target.shape != pi.shape:
        raise ValueError("train and target priors must have the same length")
    return np.log(pi) - np.log(pi_target)


def _nll(z: np.ndarray, y, margins: np.ndarray | None):
    """-log softmax(z + margins)_y over the last axis, batched."""
    u = np.asarray(z, dtype=np.float64)
    if margins is not None:
        u = u + margins
    m = u.max(axis=-1, keepdims=True)
    lse = (m + np.log(np.exp(u - m).sum(axis=-1, keepdims=True)))[..., 0]
    if u.ndim == 1:
        return float(lse - u[y])
    return lse - np.take_along_axis(u, np.asarray(y)[:, None], axis=-1)[:, 0]


def cross_entropy(z: np.ndarray, y: int) -> float:
    """Standard softmax cross entropy (the zero-margin case)."""
    return bayias_ce(z, y, np.zeros(np.asarray(z).shape[-1]))


def bayias_ce(z: np.ndarray, y: int, margins: np.ndarray) -> float:
    """Margin-compensated cross entropy: -log softmax(z + margins)_y."""
    return _nll(z, y, np.asarray(margins, dtype=np.float64))


def bayias_ce_pairwise(z: np.ndarray, y: int, margins: np.ndarray) -> float:
    """Pairwise form log(1 + sum_{k != y} e^(dm_k + dz_k)) of the same loss.

    Mathematically identical to `bayias_ce`; kept as an independent
    evaluation path for cross-checking.
    """
    z = np.asarray(z, dtype=np.float64)
    m = np.asarray(margins, dtype=np.float64)
    diffs = (z + m) - (z[y] + m[y])
    others = np.delete(diffs, y)
    return float(np.log1p(np.exp(others).sum()))


def focal_loss(z: np.ndarray, y: int, gamma: float) -> float:
    """Cross entropy weighted down for easy samples by (1 - p_y)^gamma."""
    if gamma < 0:
        raise ValueError(f"focal gamma must be >= 0, got {gamma}")
    if gamma == 0.0:
        return cross_entropy(z, y)
    log_p = log_softmax(z)[y]
    return float(-((1.0 - math.exp(log_p)) ** gamma) * log_p)


def _cb_weight(class_counts: np.ndarray, beta: float) -> np.ndarray:
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"effective-number beta must be in [0, 1), got {beta}")
    counts = np.asarray(class_counts, dtype=np.float64)
    return (1.0 - beta) / (1.0 - beta**counts)


def cb_loss(z: np.ndarray, y: int, class_counts: np.ndarray, beta: float) -> float:
    """Cross entropy scaled by the effective-number weight (1-b)/(1-b^n_y)."""
    return float(_cb_weight(class_counts, beta)[y] * cross_entropy(z, y))


def _cdt_scale(class_counts: np.ndarray, gamma: float) -> np.ndarray:
    if gamma < 0:
        raise ValueError(f"temperature gamma must be >= 0, got {gamma}")
    counts = np.asarray(class_counts, dtype=np.float64)
    return (counts.max() / counts) ** gamma


def cdt_loss(z: np.ndarray, y: int, class_counts: np.ndarray, gamma: float) -> float:
    """Cross entropy on temperature-scaled logits z_k / (n_max/n_k)^gamma."""
    return _nll(np.asarray(z, dtype=np.float64) / _cdt_scale(class_counts, gamma), y, None)


def _ldam_margins(class_counts: np.ndarray, const: float) -> np.ndarray:
    if const <= 0:
        raise ValueError(f"margin constant must be positive, got {const}")
    counts = np.asarray(class_counts, dtype=np.float64)
    return const / counts**0.25


def ldam_loss(z: np.ndarray, y: int, class_counts: np.ndarray, const: float) -> float:
    """Cross entropy with margin const/n_y^(1/4) subtracted from the true logit only."""
    u = np.array(z, dtype=np.float64)
    u[y] -= _ldam_margins(class_counts, const)[y]
    return _nll(u, y, None)


def la_loss(z: np.ndarray, y: int, prior: np.ndarray, tau: float) -> float:
    """Cross entropy with margin tau*ln(pi_k) added to every logit."""
    pi = check_prior(prior, require_positive=True)
    return _nll(z, y, tau * np.log(pi))


@dataclass(frozen=True, eq=False)
class LossSpec:
    """Tagged loss selection with its per-kind parameters.

    `class_counts` feeds cb/cdt/ldam, `prior` feeds the margin losses;
    `target_prior` (margin loss only) defaults to a balanced target.
    """

    kind: str
    gamma: float = 1.0
    beta: float = 0.999
    ldam_c: float = 0.5
    la_tau: float = 1.0
    class_counts: np.ndarray | None = None
    prior: np.ndarray | None = None
    target_prior: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"loss kind must be one of {LOSS_KINDS}, got {self.kind!r}")
        if self.kind in ("cb", "cdt", "ldam") and self.class_counts is None:
            raise ValueError(f"{self.kind} loss needs class_counts")
        if self.kind in ("bayias_ce", "la") and self.prior is None:
            raise ValueError(f"{self.kind} loss needs the training prior")
        # fail fast on bad parameters; margins are fixed once per run
        if self.kind == "focal":
            focal_loss(np.zeros(2), 0, self.gamma)
        elif self.kind == "cb":
            _cb_weight(self.class_counts, self.beta)
        elif self.kind == "cdt":
            _cdt_scale(self.class_counts, self.gamma)
        elif self.kind == "ldam":
            _ldam_margins(self.class_counts, self.ldam_c)
        object.__setattr__(self, "margins", self._build_margins())

    def _build_margins(self) -> np.ndarray | None:
        if self.kind == "bayias_ce":
            return bayias_margin(self.prior, self.target_prior)
        if self.kind == "la":
            return self.la_tau * np.log(check_prior(self.prior, require_positive=True))
        return None


def batch_loss(spec: LossSpec, z: np.ndarray, y) -> np.ndarray:
    """Per-sample loss values for an (N, C) logit matrix and (N,) labels."""
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.int64))
    if spec.kind == "ce":
        return _nll(z, y, None)
    if spec.kind in ("bayias_ce", "la"):
        return _nll(z, y, spec.margins)
    if spec.kind == "focal":
        if spec.gamma == 0.0:
            return _nll(z, y, None)
        log_p = np.take_along_axis(log_softmax(z), y[:, None], axis=1)[:, 0]
        return -((1.0 - np.exp(log_p)) ** spec.gamma) * log_p
    if spec.kind == "cb":
        return _cb_weight(spec.class_counts, spec.beta)[y] * _nll(z, y, None)
    if spec.kind == "cdt":
        return _nll(z / _cdt_scale(spec.class_counts, spec.gamma), y, None)
    if spec.kind == "ldam":
        u = z.copy()
        rows = np.arange(u.shape[0])
        u[rows, y] -= _ldam_margins(spec.class_counts, spec.ldam_c)[y]
        return _nll(u, y, None)
    raise AssertionError(spec.kind)


def batch_grad(spec: LossSpec, z: np.ndarray, y) -> np.ndarray:
    """Per-sample gradients d loss / d logits, shape (N, C)."""
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.int64))
    rows = np.arange(z.shape[0])
    onehot = np.zeros_like(z)
    onehot[rows, y] = 1.0
    if spec.kind == "ce":
        return softmax(z) - onehot
    if spec.kind in ("bayias_ce", "la"):
        return softmax(z + spec.margins) - onehot
    if spec.kind == "focal":
        if spec.gamma == 0.0:
            return softmax(z) - onehot
        p = softmax(z)
        log_p = np.log(np.take_along_axis(p, y[:, None], axis=1)[:, 0])
        p_y = np.exp(log_p)
        coef = spec.gamma * (1.0 - p_y) ** (spec.gamma - 1.0) * p_y * log_p \
            - (1.0 - p_y) ** spec.gamma
        return coef[:, None] * (onehot - p)
    if spec.kind == "cb":
        w = _cb_weight(spec.class_counts, spec.beta)[y]
        return w[:, None] * (softmax(z) - onehot)
    if spec.kind == "cdt":
        scale = _cdt_scale(spec.class_counts, spec.gamma)
        return (softmax(z / scale) - onehot) / scale
    if spec.kind == "ldam":
        u = z.copy()
        u[rows, y] -= _ldam_margins(spec.class_counts, spec.ldam_c)[y]
        return softmax(u) - onehot
    raise AssertionError(spec.kind)


def loss_value(spec: LossSpec, z: np.ndarray, y: int) -> float:
    """Selected loss for a single logit vector."""
    return float(batch_loss(spec, np.asarray(z)[None, :], [y])[0])


def loss_grad(spec: LossSpec, z: np.ndarray, y: int) -> np.ndarray:
    """Analytic gradient of the selected loss with respect to the logits."""
    return batch_grad(spec, np.asarray(z)[None, :], [y])[0]


def mixed_vrm_loss(spec: LossSpec, z: np.ndarray, y_i: int, y_j: int, xi: float) -> float:
    """Convex label combination xi*loss(z, y_i) + (1-xi)*loss(z, y_j)."""
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"mixing weight must be in [0, 1], got {xi}")
    return xi * loss_value(spec, z, y_i) + (1.0 - xi) * loss_value(spec, z, y_j)
