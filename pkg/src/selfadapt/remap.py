"""Empirical score distributions, cross-domain score mapping and threshold transfer.

A target score ``x`` is mapped to the source domain as ``G^-1(F(x))`` where
``F`` is the target CDF and ``G^-1`` is the source quantile function. A source
threshold travels the other way as ``F^-1(G(theta_s))``.

Conventions
-----------
``F(x)`` is the step CDF ``#{samples <= x} / n``. The quantile function joins
the points ``(k / n, z_k)`` of the sorted samples ``z_1 <= ... <= z_n`` with
straight lines and is flat at ``z_1`` below ``1 / n``. When a CDF is evaluated
on the *source* side of a threshold transfer we use the exact inverse of that
polyline, so ``transfer_threshold(remap_score(x))`` returns ``x`` for target
sample points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import Detection, GroundTruthBox

SOURCE = "source"
TARGET = "target"


@dataclass(frozen=True, eq=False)
class ScoreCdf:
    samples: np.ndarray
    domain: str = TARGET
    _levels: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        s = np.sort(np.asarray(self.samples, dtype=np.float64).ravel())
        if s.size == 0:
            raise ValueError("an empirical CDF needs at least one score")
        if not np.all(np.isfinite(s)):
            raise ValueError("scores must be finite")
        s.setflags(write=False)
        levels = np.arange(1, s.size + 1, dtype=np.float64) / s.size
        levels.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "_levels", levels)

    @property
    def n(self) -> int:
        return int(self.samples.size)

    def __call__(self, x):
        """Step CDF: fraction of samples <= x."""
        return np.searchsorted(self.samples, x, side="right") / self.n

    def quantile(self, q):
        """Piecewise-linear quantile through ``(k/n, z_k)``."""
        return np.interp(q, self._levels, self.samples)

    def smooth_cdf(self, x):
        """Inverse of :meth:`quantile`: 0 below the minimum, linear between distinct samples."""
        values, last = np.unique(self.samples[::-1], return_index=True)
        # ``last`` indexes the reversed array; convert to the last position of each value
        counts = (self.n - last) / self.n
        x = np.asarray(x, dtype=np.float64)
        out = np.interp(x, values, counts)
        return np.where(x < values[0], 0.0, out)


def build_empirical_cdf(scores: Sequence[float], domain: str = TARGET) -> ScoreCdf:
    return ScoreCdf(np.asarray(scores, dtype=np.float64), domain)


def remap_scores(x, target: ScoreCdf, source: ScoreCdf) -> np.ndarray:
    """Vectorised ``G^-1(F(x))`` clamped to [0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    return np.clip(source.quantile(target(x)), 0.0, 1.0)


def remap_score(x: float, target: ScoreCdf, source: ScoreCdf) -> float:
    return float(remap_scores(x, target, source))


def transfer_threshold(theta_source: float, target: ScoreCdf, source: ScoreCdf) -> float:
    if not 0.0 <= theta_source <= 1.0:
        raise ValueError(f"theta_source must lie in [0, 1], got {theta_source}")
    q = source.smooth_cdf(theta_source)
    return float(np.clip(target.quantile(q), 0.0, 1.0))


@dataclass(frozen=True)
class ThresholdTransfer:
    theta_source: float
    theta_target: float
    precision: float
    achieved_precision: float

    def __post_init__(self) -> None:
        for name in ("theta_source", "theta_target"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


def precision_curve(scores: np.ndarray, tp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distinct thresholds (descending) and the precision of ``score >= t`` at each."""
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    hits = np.cumsum(tp[order].astype(np.float64))
    counts = np.arange(1, s.size + 1, dtype=np.float64)
    # last index of each run of equal scores: everything >= t is counted
    last = np.r_[np.nonzero(np.diff(s))[0], s.size - 1]
    return s[last], hits[last] / counts[last]


def threshold_at_precision(
    detections: Sequence[Detection],
    ground_truth: Sequence[GroundTruthBox],
    target_precision: float = 0.95,
    iou_thresh: float = 0.5,
) -> tuple[float, float]:
    """Smallest score threshold whose precision reaches ``target_precision``.

    Returns ``(theta, achieved_precision)``; ``(1.0, nan)`` if no threshold
    qualifies.
    """
    from .evaluate import match_detections

    if not detections:
        raise ValueError("threshold selection needs at least one detection")
    if not 0.0 <= target_precision <= 1.0:
        raise ValueError(f"target precision must lie in [0, 1], got {target_precision}")
    tp = np.asarray(match_detections(detections, ground_truth, iou_thresh), dtype=bool)
    scores = np.array([d.score for d in detections], dtype=np.float64)
    thresholds, precision = precision_curve(scores, tp)
    ok = np.nonzero(precision >= target_precision)[0]
    if ok.size == 0:
        return 1.0, float("nan")
    k = ok[-1]
    return float(thresholds[k]), float(precision[k])


def auto_threshold(
    source_detections: Sequence[Detection],
    source_truth: Sequence[GroundTruthBox],
    target_detections: Sequence[Detection],
    target_precision: float = 0.95,
    iou_thresh: float = 0.5,
    score_floor: float = 0.0,
) -> ThresholdTransfer:
    """Pick theta on labeled source data and carry it to the target domain."""
    theta_s, achieved = threshold_at_precision(source_detections, source_truth, target_precision, iou_thresh)
    src = [d.score for d in source_detections if d.score >= score_floor]
    tgt = [d.score for d in target_detections if d.score >= score_floor]
    if not src or not tgt:
        raise ValueError(f"no detection scores at or above the floor {score_floor}")
    theta_t = transfer_threshold(theta_s, build_empirical_cdf(tgt, TARGET), build_empirical_cdf(src, SOURCE))
    return ThresholdTransfer(theta_s, theta_t, target_precision, achieved)


def remap_table(target: ScoreCdf, source: ScoreCdf, points: int = 101) -> list[tuple[float, float]]:
    xs = np.round(np.linspace(0.0, 1.0, points), 10)
    return list(zip(xs.tolist(), remap_scores(xs, target, source).tolist()))
