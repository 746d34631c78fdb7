"""Binary cross-entropy, the soft-label distillation loss and mixed batches."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels

EPS = 1e-7
SOURCE = "source"
TARGET = "target"
POSITIVE_FRACTION = 0.25  # 1 positive : 3 negatives


def binary_cross_entropy(y, p, eps: float = EPS):
    """``-[y log p + (1 - y) log(1 - p)]`` with ``p`` clamped to ``[eps, 1 - eps]``.

    Works elementwise on arrays; returns a float for scalar input.
    """
    p = np.clip(np.asarray(p, dtype=np.float64), eps, 1.0 - eps)
    y = np.asarray(y, dtype=np.float64)
    out = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    return float(out) if out.ndim == 0 else out


def entropy(y, eps: float = EPS):
    """Minimum of :func:`binary_cross_entropy` over ``p``, reached at ``p = y``."""
    return binary_cross_entropy(y, y, eps)


@dataclass(frozen=True)
class TrainingSample:
    domain: str
    label: float
    features: np.ndarray
    weight: float = 1.0

    def __post_init__(self) -> None:
        if self.domain not in (SOURCE, TARGET):
            raise ValueError(f"domain must be source or target, got {self.domain!r}")
        if not 0.0 <= self.label <= 1.0:
            raise ValueError(f"label must lie in [0, 1], got {self.label}")
        if self.domain == SOURCE and self.label not in (0.0, 1.0):
            raise ValueError("source samples carry hard labels")
        if not self.weight > 0:
            raise ValueError(f"weight must be > 0, got {self.weight}")


def distillation_loss(sample: TrainingSample, p: float) -> float:
    """Loss of one region. The stored label is ``y`` for source and the soft label for target."""
    return binary_cross_entropy(sample.label, p)


def mean_distillation_loss(weights, bias, X, labels, sample_weights=None):
    """Weighted mean loss of a linear-logistic scorer and its gradient.

    Returns ``(loss, grad_weights, grad_bias)``.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if sample_weights is None:
        sample_weights = np.ones(labels.shape[0])
    return kernels.logistic_loss_grad(weights, bias, X, labels, sample_weights, EPS)


@dataclass(frozen=True)
class BatchSpec:
    regions_per_image: int = 64
    positive_fraction: float = POSITIVE_FRACTION

    def __post_init__(self) -> None:
        if self.regions_per_image < 1:
            raise ValueError("regions_per_image must be >= 1")
        if not 0.0 <= self.positive_fraction <= 1.0:
            raise ValueError("positive_fraction must lie in [0, 1]")

    @property
    def max_positives(self) -> int:
        return int(round(self.regions_per_image * self.positive_fraction))


@dataclass(frozen=True)
class TrainingImage:
    """Regions available in one image: labeled positives and background negatives."""

    domain: str
    positives: np.ndarray
    labels: np.ndarray
    negatives: np.ndarray

    def __post_init__(self) -> None:
        if self.positives.shape[0] != self.labels.shape[0]:
            raise ValueError("one label per positive region")


@dataclass(frozen=True)
class Batch:
    features: np.ndarray
    labels: np.ndarray
    domains: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return int(self.labels.shape[0])


def sample_regions(image: TrainingImage, spec: BatchSpec, rng: np.random.Generator):
    n_pos = min(image.positives.shape[0], spec.max_positives)
    n_neg = spec.regions_per_image - n_pos
    pos = rng.choice(image.positives.shape[0], size=n_pos, replace=False) if n_pos else np.empty(0, np.int64)
    pool = image.negatives.shape[0]
    if pool == 0 and n_neg:
        raise ValueError("image has no background regions to sample negatives from")
    neg = rng.choice(pool, size=n_neg, replace=pool < n_neg) if n_neg else np.empty(0, np.int64)
    X = np.concatenate([image.positives[pos], image.negatives[neg]])
    y = np.concatenate([image.labels[pos], np.zeros(n_neg)])
    return X, y


def compose_mixed_batch(
    source_pool: Sequence[TrainingImage],
    target_pool: Sequence[TrainingImage],
    spec: BatchSpec,
    rng: np.random.Generator,
) -> Batch:
    """One source image and one target image, ``regions_per_image`` regions each.

    The two halves form a single batch so their gradients are summed before
    any parameter update.
    """
    if not source_pool or not target_pool:
        raise ValueError("both source and target pools must be non-empty")
    src = source_pool[int(rng.integers(len(source_pool)))]
    tgt = target_pool[int(rng.integers(len(target_pool)))]
    Xs, ys = sample_regions(src, spec, rng)
    Xt, yt = sample_regions(tgt, spec, rng)
    n = spec.regions_per_image
    return Batch(
        features=np.concatenate([Xs, Xt]),
        labels=np.concatenate([ys, yt]),
        domains=np.array([SOURCE] * n + [TARGET] * n),
        weights=np.ones(2 * n),
    )
