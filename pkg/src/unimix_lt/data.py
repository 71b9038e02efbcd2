"""Desk-scale dataset synthesis and CSV ingestion.

Two generators cover the experiments: isotropic Gaussian clusters with
exponentially decaying per-class counts, and the two-disjoint-circles
binary set used for the decision-boundary study. Both are deterministic
functions of (spec, seed).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .streams import derive_rng
from .theory import check_prior

__all__ = [
    "Dataset",
    "TwoCircleSpec",
    "gen_lt_gaussians",
    "gen_two_circles",
    "load_csv",
    "save_csv",
    "empirical_prior",
    "lt_class_counts",
    "class_means",
]


@dataclass(eq=False)
class Dataset:
    """Immutable labeled feature set: N x d features, integer labels in [0, C)."""

    features: np.ndarray
    labels: np.ndarray
    class_counts: np.ndarray
    indices_by_class: list[np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.class_counts = np.asarray(self.class_counts, dtype=np.int64)
        if self.features.ndim != 2 or self.labels.ndim != 1:
            raise ValueError("features must be N x d and labels a vector")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("features and labels disagree on sample count")
        c = self.class_counts.shape[0]
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= c):
            raise ValueError(f"labels must lie in [0, {c})")
        hist = np.bincount(self.labels, minlength=c)
        if not np.array_equal(hist, self.class_counts):
            raise ValueError("class_counts does not match the label histogram")
        self.indices_by_class = [np.flatnonzero(self.labels == k) for k in range(c)]

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def num_classes(self) -> int:
        return self.class_counts.shape[0]

    @property
    def dims(self) -> int:
        return self.features.shape[1]


def lt_class_counts(num_classes: int, rho: float, n_max: int,
                    reverse: bool = False) -> np.ndarray:
    """Integer per-class counts n_i = max(1, round(n_max * rho^(-(i-1)/(C-1)))).

    Ties round half up. The floor at 1 keeps every class populated so
    prior-based margins stay finite. `reverse` flips the count vector
    (class C-1 becomes the head) while leaving class identities alone,
    which builds reversed-LT test sets.
    """
    if num_classes < 2:
        raise ValueError("need at least 2 classes")
    if rho < 1:
        raise ValueError(f"imbalance factor must be >= 1, got {rho}")
    if n_max < num_classes:
        raise ValueError("n_max must be >= num_classes so every class gets a sample")
    exponents = -np.arange(num_classes, dtype=np.float64) / (num_classes - 1)
    counts = np.maximum(1, np.floor(n_max * rho**exponents + 0.5).astype(np.int64))
    return counts[::-1].copy() if reverse else counts


def class_means(num_classes: int, dims: int, cluster_spread: float) -> np.ndarray:
    """Fixed deterministic layout of class means.

    Depends only on (C, dims, spread) so train and test sets built with
    different counts or seeds share class-conditional distributions.
    Means are scaled so the minimum pairwise distance is 4x the cluster
    spread, keeping the balanced problem nearly separable.
    """
    if dims < 2:
        raise ValueError("need at least 2 feature dimensions")
    if cluster_spread <= 0:
        raise ValueError("cluster_spread must be positive")
    if num_classes <= dims:
        dirs = np.eye(num_classes, dims)
    else:
        rng = np.random.default_rng(np.random.SeedSequence(0x6D65616E))  # fixed layout stream
        dirs = rng.standard_normal((num_classes, dims))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    diffs = dirs[:, None, :] - dirs[None, :, :]
    dist = np.linalg.norm(diffs, axis=-1)
    min_dist = dist[~np.eye(num_classes, dtype=bool)].min()
    if min_dist <= 0:
        raise ValueError("degenerate mean layout; reduce num_classes or raise dims")
    return dirs * (4.0 * cluster_spread / min_dist)


def gen_lt_gaussians(num_classes: int, rho: float, n_max: int, dims: int,
                     cluster_spread: float = 1.0, seed: int = 0,
                     reverse: bool = False) -> Dataset:
    """Long-tailed isotropic Gaussian clusters.

    Class i (0-indexed) draws its count from the exponential decay model
    and its features from N(mean_i, spread^2 * I) with means on the fixed
    layout from `class_means`.
    """
    counts = lt_class_counts(num_classes, rho, n_max, reverse=reverse)
    means = class_means(num_classes, dims, cluster_spread)
    rng = derive_rng(seed, "data")
    feats = []
    labels = []
    for k in range(num_classes):
        feats.append(means[k] + cluster_spread * rng.standard_normal((counts[k], dims)))
        labels.append(np.full(counts[k], k, dtype=np.int64))
    return Dataset(np.concatenate(feats), np.concatenate(labels), counts)


@dataclass(frozen=True)
class TwoCircleSpec:
    """Two disjoint disks: positives around (x0, y0), negatives around (-x0, -y0)."""

    center: tuple[float, float] = (2.0, 2.0)
    radius: float = 1.5
    n_pos: int = 500
    n_neg: int = 10
    seed: int = 0

    def __post_init__(self):
        x0, y0 = self.center
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if x0 * x0 + y0 * y0 <= self.radius**2:
            raise ValueError("circles overlap: need x0^2 + y0^2 > r^2")
        if self.n_pos < 1 or self.n_neg < 1:
            raise ValueError("both circles need at least one sample")


def _uniform_disk(rng: np.random.Generator, n: int, center, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return np.stack([center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)], axis=1)


def gen_two_circles(spec: TwoCircleSpec) -> Dataset:
    """Uniform samples from the two disks: label 0 positive disk, label 1 negative."""
    rng = derive_rng(spec.seed, "data")
    x0, y0 = spec.center
    pos = _uniform_disk(rng, spec.n_pos, (x0, y0), spec.radius)
    neg = _uniform_disk(rng, spec.n_neg, (-x0, -y0), spec.radius)
    features = np.concatenate([pos, neg])
    labels = np.concatenate([np.zeros(spec.n_pos, np.int64), np.ones(spec.n_neg, np.int64)])
    return Dataset(features, labels, np.array([spec.n_pos, spec.n_neg]))


def empirical_prior(ds: Dataset) -> np.ndarray:
    """Per-class instance proportions; errors if any class is empty."""
    if np.any(ds.class_counts == 0):
        empty = np.flatnonzero(ds.class_counts == 0).tolist()
        raise ValueError(f"classes {empty} have no samples; prior margins would diverge")
    return check_prior(ds.class_counts / ds.num_samples, require_positive=True)


def save_csv(ds: Dataset, path) -> None:
    """Write `f0,...,f{d-1},label` rows; floats use repr for exact round-trips."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(ds.dims)] + ["label"])
        for row, label in zip(ds.features, ds.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def load_csv(path) -> Dataset:
    """Read a dataset written by `save_csv`; C is max label + 1."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if not header or header[-1] != "label":
            raise ValueError(f"{path}: last column must be 'label', got header {header}")
        dims = len(header) - 1
        if dims < 1 or header[:-1] != [f"f{i}" for i in range(dims)]:
            raise ValueError(f"{path}: expected feature columns f0..f{dims - 1}")
        features, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != dims + 1:
                raise ValueError(f"{path}:{lineno}: expected {dims + 1} fields, got {len(row)}")
            try:
                features.append([float(v) for v in row[:-1]])
                label = int(row[-1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if label < 0:
                raise ValueError(f"{path}:{lineno}: negative label {label}")
            labels.append(label)
    if not labels:
        raise ValueError(f"{path}: no data rows")
    labels = np.asarray(labels, dtype=np.int64)
    counts = np.bincount(labels, minlength=labels.max() + 1)
    return Dataset(np.asarray(features), labels, counts)
