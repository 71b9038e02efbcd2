"""Beta mixing, the prior-aware mixing factor, and its Monte Carlo validator.

The prior-aware factor redistributes a symmetric Beta(alpha, alpha) draw
by a cyclic shift: with pair priors (pi_i, pi_j) and

    c = pi_j / (pi_i + pi_j),

the factor is xi* = frac(xi_beta + c). The shift moves the Beta density's
mass to peak at c and its vicinity, which is exactly the piecewise form
obtained by splitting the Beta density at c; the rarer class of the pair
then tends to receive the dominant mixing weight. The cyclic shift is the
unique sampling rule with that density.

A mixed sample reinforces the class whose weight is >= 0.5 (ties go to
the first pair member). `mc_xi_aug_histogram` tallies that class over
many random pairs to validate the closed forms in `theory`.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .sampling import draw_classes, inverse_prior
from .streams import derive_rng
from .theory import check_prior

__all__ = [
    "MixConfig",
    "MixedSample",
    "MIX_MODES",
    "sample_beta",
    "cyclic_shift",
    "unimix_factor",
    "mix_pair",
    "xi_aug_class",
    "mc_xi_aug_histogram",
]

MIX_MODES = ("vanilla_mixup", "unimix_factor_only", "unimix_full")


@dataclass(frozen=True)
class MixConfig:
    """Mixing-pipeline selection: Beta parameter, mode, pair-sampler exponent."""

    alpha: float = 0.5
    mode: str = "unimix_full"
    tau: float = -1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.mode not in MIX_MODES:
            raise ValueError(f"mode must be one of {MIX_MODES}, got {self.mode!r}")

    @property
    def pair_tau(self) -> float:
        """Exponent for the pair-member sampler; random (tau=1) except in full mode."""
        return self.tau if self.mode == "unimix_full" else 1.0


@dataclass(frozen=True)
class MixedSample:
    """A virtual sample: mixed features, the source labels, and the mixing weight."""

    x_mixed: np.ndarray
    y_i: int
    y_j: int
    xi: float

    def __post_init__(self):
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"mixing weight must be in [0, 1], got {self.xi}")


def sample_beta(alpha: float, rng: np.random.Generator, size=None):
    """Beta(alpha, alpha) draw(s); alpha = 1 is uniform on [0, 1]."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return rng.beta(alpha, alpha, size=size)


def cyclic_shift(xi, c):
    """frac(xi + c) on [0, 1), implemented so c = 0 returns xi bit-for-bit."""
    out = np.asarray(xi, dtype=np.float64) + np.asarray(c, dtype=np.float64)
    out = np.where(out >= 1.0, out - 1.0, out)
    return out if out.ndim else float(out)


def unimix_factor(pi_i, pi_j, alpha: float, rng: np.random.Generator):
    """Prior-aware mixing weight(s) for pair priors (pi_i, pi_j).

    Accepts scalars or equal-length arrays; one Beta draw per pair.
    """
    pi_i = np.asarray(pi_i, dtype=np.float64)
    pi_j = np.asarray(pi_j, dtype=np.float64)
    if np.any(pi_i <= 0) or np.any(pi_j <= 0):
        raise ValueError("pair priors must be strictly positive")
    c = pi_j / (pi_i + pi_j)
    return cyclic_shift(sample_beta(alpha, rng, size=None if c.ndim == 0 else c.shape), c)


def mix_pair(xi_sample: tuple[np.ndarray, int], xj_sample: tuple[np.ndarray, int],
             xi: float) -> MixedSample:
    """Convex feature combination xi*x_i + (1-xi)*x_j with both labels kept."""
    x_i, y_i = xi_sample
    x_j, y_j = xj_sample
    x_i = np.asarray(x_i, dtype=np.float64)
    x_j = np.asarray(x_j, dtype=np.float64)
    if x_i.shape != x_j.shape:
        raise ValueError(f"feature shapes differ: {x_i.shape} vs {x_j.shape}")
    return MixedSample(xi * x_i + (1.0 - xi) * x_j, int(y_i), int(y_j), float(xi))


def xi_aug_class(sample: MixedSample) -> int:
    """Class the mixed sample reinforces: y_i iff xi >= 0.5, else y_j."""
    return sample.y_i if sample.xi >= 0.5 else sample.y_j


def _mc_chunk(prior, pair_prior, config, trials, rng):
    y_i = draw_classes(prior, trials, rng)
    y_j = draw_classes(pair_prior, trials, rng)
    if config.mode == "vanilla_mixup":
        xi = sample_beta(config.alpha, rng, size=trials)
    else:
        xi = unimix_factor(prior[y_i], prior[y_j], config.alpha, rng)
    winner = np.where(xi >= 0.5, y_i, y_j)
    return np.bincount(winner, minlength=prior.shape[0])


def mc_xi_aug_histogram(ds_prior: np.ndarray, config: MixConfig, trials: int,
                        seed: int, streams: int = 4) -> np.ndarray:
    """Empirical distribution of the reinforced class over `trials` mixed pairs.

    The first pair member is drawn from `ds_prior`; the second from
    `ds_prior` reweighted by the config's pair exponent (plain prior
    except in full mode). Trials are split over independent seeded
    streams whose partial histograms merge in stream order, so the result
    depends only on (seed, streams). UNIMIX_LT_THREADS caps the worker
    threads used to evaluate the streams.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if streams < 1:
        raise ValueError("streams must be >= 1")
    prior = check_prior(ds_prior, require_positive=True)
    pair_prior = inverse_prior(prior, config.pair_tau)
    sizes = [trials // streams + (1 if k < trials % streams else 0) for k in range(streams)]
    jobs = [(size, derive_rng(seed, "mc", k)) for k, size in enumerate(sizes) if size > 0]
    if len(jobs) > 1:
        max_workers = int(os.environ.get("UNIMIX_LT_THREADS", 0) or os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=min(len(jobs), max_workers)) as pool:
            parts = list(pool.map(
                lambda job: _mc_chunk(prior, pair_prior, config, job[0], job[1]), jobs))
    else:
        parts = [_mc_chunk(prior, pair_prior, config, size, rng) for size, rng in jobs]
    counts = np.sum(parts, axis=0)
    return check_prior(counts / trials)
