"""Decision-boundary study on the two-disjoint-circles binary set.

A linear softmax classifier (no hidden layer, trained with the shared
pipeline) is fit under four scenarios: balanced data, imbalanced data,
imbalanced data with plain beta mixing, and imbalanced data with the
prior-aware factor plus inverse pair sampling. Because the two disks are
reflections of each other through the origin, the ideal boundary passes
through the origin with normal parallel to the positive-disk center
(y = -x for the default center (2, 2)).

Deviation from ideal is summarized as angle_error_deg + 10 * |offset at
origin|; both raw components are reported alongside the single score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, TwoCircleSpec, empirical_prior, gen_two_circles
from .losses import LossSpec
from .mixing import MixConfig, sample_beta, unimix_factor
from .model import LRSchedule, TrainConfig, train_two_phase
from .sampling import draw_batch, inverse_prior
from .streams import derive_rng

__all__ = ["SCENARIOS", "BoundaryResult", "run_circles", "virtual_cloud", "run_all_scenarios"]

SCENARIOS = ("balanced", "imbalanced", "mixup", "unimix")


@dataclass(frozen=True)
class BoundaryResult:
    scenario: str
    weight: tuple[float, float]
    bias: float
    angle_error_deg: float
    offset: float

    def __post_init__(self):
        if not 0.0 <= self.angle_error_deg <= 90.0:
            raise ValueError("angle error must lie in [0, 90] degrees")

    @property
    def deviation(self) -> float:
        """Single ranking score: angle error plus 10x the origin offset."""
        return self.angle_error_deg + 10.0 * abs(self.offset)


def _scenario_config(scenario: str, seed: int, steps: int, batch_size: int,
                     lr: float) -> TrainConfig:
    if scenario in ("balanced", "imbalanced"):
        mix = MixConfig(alpha=1.0, mode="vanilla_mixup", tau=1.0)
        t1 = 0  # plain training throughout
    elif scenario == "mixup":
        mix = MixConfig(alpha=1.0, mode="vanilla_mixup", tau=1.0)
        t1 = int(round(0.9 * steps))
    elif scenario == "unimix":
        mix = MixConfig(alpha=0.5, mode="unimix_full", tau=-1.0)
        t1 = int(round(0.9 * steps))
    else:
        raise ValueError(f"scenario must be one of {SCENARIOS}, got {scenario!r}")
    return TrainConfig(
        t1_steps=t1,
        t2_steps=steps,
        batch_size=batch_size,
        lr=LRSchedule.scaled(lr, steps),
        mix=mix,
        loss=LossSpec(kind="ce"),
        seed=seed,
        hidden_dims=(),
    )


def _boundary(params, center) -> tuple[np.ndarray, float, float, float]:
    (w, b) = params.layers[0]
    normal = w[:, 0] - w[:, 1]  # points toward the positive-class side
    bias = float(b[0] - b[1])
    norm = float(np.linalg.norm(normal))
    ideal = np.asarray(center, dtype=np.float64)
    ideal /= np.linalg.norm(ideal)
    cos = abs(float(normal @ ideal)) / norm
    angle = math.degrees(math.acos(min(1.0, max(-1.0, cos))))
    offset = bias / norm
    return normal, bias, angle, offset


def run_circles(spec: TwoCircleSpec, scenario: str, steps: int = 400,
                batch_size: int = 64, lr: float = 0.5) -> BoundaryResult:
    """Train one scenario and measure its boundary against the ideal one."""
    data_spec = replace(spec, n_neg=spec.n_pos) if scenario == "balanced" else spec
    ds = gen_two_circles(data_spec)
    cfg = _scenario_config(scenario, spec.seed, steps, batch_size, lr)
    params, _ = train_two_phase(ds, cfg)
    normal, bias, angle, offset = _boundary(params, spec.center)
    return BoundaryResult(scenario, (float(normal[0]), float(normal[1])), bias, angle, offset)


def virtual_cloud(ds: Dataset, scenario: str, num_points: int, seed: int) -> np.ndarray:
    """Mixed virtual points (x, y, reinforced label) for scatter plots."""
    if scenario not in ("mixup", "unimix"):
        return np.empty((0, 3))
    prior = empirical_prior(ds)
    rng = derive_rng(seed, "cloud")
    if scenario == "mixup":
        pair_prior, alpha = prior, 1.0
    else:
        pair_prior, alpha = inverse_prior(prior, -1.0), 0.5
    x_i, y_i = draw_batch(ds, prior, num_points, rng)
    x_j, y_j = draw_batch(ds, pair_prior, num_points, rng)
    if scenario == "mixup":
        xi = sample_beta(alpha, rng, size=num_points)
    else:
        xi = unimix_factor(prior[y_i], prior[y_j], alpha, rng)
    mixed = xi[:, None] * x_i + (1.0 - xi)[:, None] * x_j
    labels = np.where(xi >= 0.5, y_i, y_j)
    return np.column_stack([mixed, labels.astype(np.float64)])


def run_all_scenarios(spec: TwoCircleSpec, steps: int = 400, batch_size: int = 64,
                      lr: float = 0.5) -> list[BoundaryResult]:
    return [run_circles(spec, s, steps=steps, batch_size=batch_size, lr=lr)
            for s in SCENARIOS]
