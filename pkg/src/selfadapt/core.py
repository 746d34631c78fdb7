"""Geometric and identity value types shared by every stage."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Sequence

import numpy as np


class ValidationError(ValueError):
    """Raised when a record violates a type invariant."""


@dataclass(frozen=True, slots=True)
class BoundingBox:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"box {name} must be finite, got {getattr(self, name)!r}")
        if not self.w > 0 or not self.h > 0:
            raise ValidationError(f"box width and height must be > 0, got w={self.w}, h={self.h}")

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True, slots=True, order=True)
class FrameRef:
    video_id: str
    frame_index: int

    def __post_init__(self) -> None:
        if self.frame_index < 0:
            raise ValidationError(f"frame_index must be >= 0, got {self.frame_index}")


@dataclass(frozen=True, slots=True)
class Detection:
    frame: FrameRef
    box: BoundingBox
    score: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.score <= 1.0):
            raise ValidationError(f"score must lie in [0, 1], got {self.score!r}")


@dataclass(frozen=True, slots=True)
class GroundTruthBox:
    frame: FrameRef
    box: BoundingBox
    tags: FrozenSet[str] = field(default_factory=frozenset)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; 1.0 exactly for identical boxes."""
    ax2, ay2 = a.x + a.w, a.y + a.h
    bx2, by2 = b.x + b.w, b.y + b.h
    iw = min(ax2, bx2) - max(a.x, b.x)
    ih = min(ay2, by2) - max(a.y, b.y)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (ax2 - a.x) * (ay2 - a.y) + (bx2 - b.x) * (by2 - b.y) - inter
    return inter / union


def boxes_to_array(boxes: Iterable[BoundingBox]) -> np.ndarray:
    rows = [(b.x, b.y, b.w, b.h) for b in boxes]
    return np.asarray(rows, dtype=np.float64).reshape(-1, 4)


def sort_key(frame: FrameRef) -> tuple[str, int]:
    return (frame.video_id, frame.frame_index)


def group_by_video(items: Sequence, key=lambda d: d.frame.video_id) -> dict[str, list]:
    """Bucket records by video id, keeping input order inside each bucket."""
    out: dict[str, list] = {}
    for item in items:
        out.setdefault(key(item), []).append(item)
    return out
