"""Self-training adaptation of object detectors on unlabeled video.

Stages: link detections into tracklets, turn them into (soft) pseudo-labels,
optionally remap target scores onto the source score distribution, and score
the re-trained detector with AP@0.5. A synthetic two-domain world with a
linear-logistic detector runs the whole loop end to end.
"""

from .core import BoundingBox, Detection, FrameRef, GroundTruthBox, ValidationError, iou
from .evaluate import average_precision, average_precision_50, ks_statistic, match_detections
from .loss import binary_cross_entropy, mean_distillation_loss
from .pseudolabel import SCHEMES, ConfigError, PseudoLabel, SchemeConfig, apply_scheme, interpolate
from .remap import (
    ScoreCdf,
    auto_threshold,
    build_empirical_cdf,
    remap_score,
    threshold_at_precision,
    transfer_threshold,
)
from .tracklet import Tracklet, link_tracklets, link_videos, prune_tracklets

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "ConfigError",
    "Detection",
    "FrameRef",
    "GroundTruthBox",
    "PseudoLabel",
    "SCHEMES",
    "SchemeConfig",
    "ScoreCdf",
    "Tracklet",
    "ValidationError",
    "apply_scheme",
    "auto_threshold",
    "average_precision",
    "average_precision_50",
    "binary_cross_entropy",
    "build_empirical_cdf",
    "interpolate",
    "iou",
    "ks_statistic",
    "link_tracklets",
    "link_videos",
    "match_detections",
    "mean_distillation_loss",
    "prune_tracklets",
    "remap_score",
    "threshold_at_precision",
    "transfer_threshold",
]
