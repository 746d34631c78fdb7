"""Pseudo-label assembly and soft-label schemes.

Scheme summary (positives only; negatives are hard 0 and never stored):

============  ==========================  =======================  ==========
scheme        labels kept                 soft score s             lambda
============  ==========================  =======================  ==========
det           detector-origin entries     s = y                    0
track         tracker-origin entries      s = y                    0
hp            all tracklet entries        s = y                    0
label-smooth  all tracklet entries        d (detector) / theta     user
hp-cons       all tracklet entries        d (detector) / 1         1
score-remap   all tracklet entries        G^-1(F(d)) / theta       1
============  ==========================  =======================  ==========
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .core import BoundingBox, Detection, FrameRef, ValidationError
from .remap import ScoreCdf, remap_scores
from .tracklet import DETECTOR, ORIGINS, TRACKER, Tracklet

SCHEMES = ("det", "track", "hp", "label-smooth", "hp-cons", "score-remap")
HARD_SCHEMES = ("det", "track", "hp")
SOFT_SCHEMES = ("label-smooth", "hp-cons", "score-remap")


class ConfigError(ValueError):
    """Invalid scheme configuration."""


@dataclass(frozen=True, slots=True)
class PseudoLabel:
    frame: FrameRef
    box: BoundingBox
    origin: str
    detector_score: Optional[float]
    tracklet_id: int
    hard_label: float = 1.0
    soft_score: float = 1.0
    soft_label: float = 1.0

    def __post_init__(self) -> None:
        if self.origin not in ORIGINS:
            raise ValidationError(f"origin must be one of {ORIGINS}, got {self.origin!r}")
        if self.detector_score is None:
            if self.origin != TRACKER:
                raise ValidationError("only tracker-origin labels may omit the detector score")
        elif not (0.0 <= self.detector_score <= 1.0):
            raise ValidationError(f"detector score must lie in [0, 1], got {self.detector_score!r}")
        for name in ("soft_score", "soft_label"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1], got {v!r}")


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str
    theta: float = 0.5
    lam: Optional[float] = None
    source_cdf: Optional[ScoreCdf] = None
    target_cdf: Optional[ScoreCdf] = None

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if not 0.0 < self.theta < 1.0:
            raise ConfigError(f"theta must lie in (0, 1), got {self.theta}")
        if self.scheme == "label-smooth":
            if self.lam is None:
                raise ConfigError("label-smooth needs lambda")
            if not 0.0 <= self.lam <= 1.0:
                raise ConfigError(f"lambda must lie in [0, 1], got {self.lam}")
        elif self.lam is not None:
            raise ConfigError(f"lambda only applies to label-smooth, not {self.scheme}")
        has_cdfs = self.source_cdf is not None and self.target_cdf is not None
        if self.scheme == "score-remap" and not has_cdfs:
            raise ConfigError("score-remap needs both source and target score distributions")
        if self.scheme != "score-remap" and (self.source_cdf is not None or self.target_cdf is not None):
            raise ConfigError(f"score distributions only apply to score-remap, not {self.scheme}")

    @property
    def interpolation(self) -> float:
        """The lambda actually used when forming soft labels."""
        if self.scheme == "label-smooth":
            return float(self.lam)
        if self.scheme in ("hp-cons", "score-remap"):
            return 1.0
        return 0.0

    @property
    def assembly_mode(self) -> str:
        return self.scheme if self.scheme in HARD_SCHEMES else "hp"


def select_high_confidence(detections: Sequence[Detection], theta: float) -> list[Detection]:
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    return [d for d in detections if d.score >= theta]


def assemble_pseudolabels(tracklets: Sequence[Tracklet], mode: str, theta: float) -> list[PseudoLabel]:
    """Turn surviving tracklet entries into hard-labeled positives.

    Origins are recomputed against ``theta`` so the assembly threshold may
    differ from the one used while linking.
    """
    if mode not in HARD_SCHEMES:
        raise ConfigError(f"assembly mode must be one of {HARD_SCHEMES}, got {mode!r}")
    out = []
    for t in tracklets:
        for e in t.entries:
            origin = DETECTOR if e.score is not None and e.score >= theta else TRACKER
            if mode == "det" and origin != DETECTOR:
                continue
            if mode == "track" and origin != TRACKER:
                continue
            out.append(PseudoLabel(FrameRef(t.video_id, e.frame_index), e.box, origin, e.score, t.id))
    return out


def detections_to_pseudolabels(detections: Sequence[Detection], theta: float) -> list[PseudoLabel]:
    """Det labels without tracklet filtering; isolated detections survive."""
    return [
        PseudoLabel(d.frame, d.box, DETECTOR, d.score, -1)
        for d in select_high_confidence(detections, theta)
    ]


def assign_soft_scores(labels: Sequence[PseudoLabel], config: SchemeConfig) -> list[PseudoLabel]:
    scheme = config.scheme
    if scheme in HARD_SCHEMES:
        return [replace(p, soft_score=p.hard_label) for p in labels]
    if scheme == "score-remap":
        if config.source_cdf is None or config.target_cdf is None:
            raise ConfigError("score-remap needs both source and target score distributions")
        det = [i for i, p in enumerate(labels) if p.origin == DETECTOR]
        mapped = remap_scores(
            np.array([labels[i].detector_score for i in det], dtype=np.float64),
            config.target_cdf,
            config.source_cdf,
        )
        scores = [config.theta] * len(labels)
        for i, v in zip(det, mapped):
            scores[i] = float(v)
        return [replace(p, soft_score=s) for p, s in zip(labels, scores)]

    tracker_score = 1.0 if scheme == "hp-cons" else config.theta
    return [
        replace(p, soft_score=p.detector_score if p.origin == DETECTOR else tracker_score)
        for p in labels
    ]


def interpolate(soft_score: float, hard_label: float, lam: float) -> float:
    """``lam * s + (1 - lam) * y``, exact at both endpoints and monotone in ``lam``."""
    if lam == 1.0:
        return soft_score
    return hard_label + lam * (soft_score - hard_label)


def interpolate_labels(labels: Sequence[PseudoLabel], lam: float) -> list[PseudoLabel]:
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    return [replace(p, soft_label=interpolate(p.soft_score, p.hard_label, lam)) for p in labels]


def apply_scheme(tracklets: Sequence[Tracklet], config: SchemeConfig) -> list[PseudoLabel]:
    labels = assemble_pseudolabels(tracklets, config.assembly_mode, config.theta)
    labels = assign_soft_scores(labels, config)
    return frame_sorted(interpolate_labels(labels, config.interpolation))


def frame_sorted(labels: Sequence[PseudoLabel]) -> list[PseudoLabel]:
    """Stable sort by (video, frame); within a frame tracklet order is kept."""
    return sorted(labels, key=lambda p: (p.frame.video_id, p.frame.frame_index))


def apply_scheme_to_detections(detections: Sequence[Detection], config: SchemeConfig) -> list[PseudoLabel]:
    """Det scheme over raw detections (the ``--no-tracklet-filter`` route)."""
    if config.scheme != "det":
        raise ConfigError("skipping the tracklet filter is only defined for the det scheme")
    labels = detections_to_pseudolabels(detections, config.theta)
    labels = assign_soft_scores(labels, config)
    return frame_sorted(interpolate_labels(labels, config.interpolation))
