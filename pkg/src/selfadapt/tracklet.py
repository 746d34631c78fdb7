"""Greedy IoU tracklet linking and length pruning.

The linker is a deterministic frame-to-frame association:

* detections scoring below ``RECALL_FLOOR`` are dropped before linking;
* at frame ``t`` every tracklet whose last entry sits at ``t - 1`` competes for
  the detections of frame ``t``; candidate pairs with IoU >= ``link_iou`` are
  accepted greedily by descending IoU, ties going to the lower frame-local
  detection index and then to the lower tracklet id;
* unmatched detections scoring >= ``theta`` open new tracklets, unmatched
  low-score detections are discarded;
* a tracklet that finds no match terminates (no gap tolerance).

Entries carried on with a score below ``theta`` are flagged ``tracker``; they
are the hard examples the detector alone would have missed.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .core import BoundingBox, Detection, ValidationError, boxes_to_array, group_by_video

RECALL_FLOOR = 0.05
DEFAULT_LINK_IOU = 0.5
DEFAULT_MIN_LEN = 10

DETECTOR = "detector"
TRACKER = "tracker"
ORIGINS = (DETECTOR, TRACKER)


@dataclass(frozen=True, slots=True)
class TrackEntry:
    frame_index: int
    box: BoundingBox
    origin: str
    score: Optional[float] = None

    def __post_init__(self) -> None:
        if self.origin not in ORIGINS:
            raise ValidationError(f"origin must be one of {ORIGINS}, got {self.origin!r}")
        if self.score is not None and not (0.0 <= self.score <= 1.0):
            raise ValidationError(f"score must lie in [0, 1], got {self.score!r}")


@dataclass(frozen=True, slots=True)
class Tracklet:
    id: int
    video_id: str
    entries: tuple[TrackEntry, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValidationError("a tracklet needs at least one entry")
        frames = [e.frame_index for e in self.entries]
        if any(b - a != 1 for a, b in zip(frames, frames[1:])):
            raise ValidationError(f"tracklet {self.id}: frames must be consecutive, got {frames}")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def start(self) -> int:
        return self.entries[0].frame_index


def _check_thresholds(link_iou: float, theta: float) -> None:
    if not 0.0 < link_iou < 1.0:
        raise ValueError(f"link_iou must lie in (0, 1), got {link_iou}")
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")


def link_tracklets(
    detections: Sequence[Detection],
    link_iou: float = DEFAULT_LINK_IOU,
    theta: float = 0.5,
    start_id: int = 0,
    recall_floor: float = RECALL_FLOOR,
) -> list[Tracklet]:
    """Link the detections of a single video into tracklets.

    ``detections`` must belong to one video and be sorted by frame index;
    order within a frame is the frame-local detection index used for tie
    breaking. Returned tracklets are ordered by start frame, then id.
    """
    _check_thresholds(link_iou, theta)
    if not detections:
        return []
    video = detections[0].frame.video_id
    prev = -1
    for d in detections:
        if d.frame.video_id != video:
            raise ValueError(f"link_tracklets takes one video, got {video!r} and {d.frame.video_id!r}")
        if d.frame.frame_index < prev:
            raise ValueError(
                f"detections are not sorted by frame (frame {d.frame.frame_index} after {prev})"
            )
        prev = d.frame.frame_index

    kept = [d for d in detections if d.score >= recall_floor]

    entries: list[list[TrackEntry]] = []
    active: list[int] = []  # indices into ``entries``, ascending == ascending id
    last_frame = None
    i = 0
    while i < len(kept):
        frame = kept[i].frame.frame_index
        j = i
        while j < len(kept) and kept[j].frame.frame_index == frame:
            j += 1
        dets = kept[i:j]
        i = j

        if last_frame is None or frame != last_frame + 1:
            active = []
        last_frame = frame

        det_to_track = np.full(len(dets), -1, dtype=np.int64)
        if active:
            last_boxes = boxes_to_array(entries[k][-1].box for k in active)
            cur_boxes = boxes_to_array(d.box for d in dets)
            det_to_track = kernels.greedy_link(kernels.iou_matrix(last_boxes, cur_boxes), link_iou)

        matched: list[int] = []
        new: list[int] = []
        for c, d in enumerate(dets):
            origin = DETECTOR if d.score >= theta else TRACKER
            r = int(det_to_track[c])
            if r >= 0:
                k = active[r]
                entries[k].append(TrackEntry(frame, d.box, origin, d.score))
                matched.append(k)
            elif origin == DETECTOR:
                entries.append([TrackEntry(frame, d.box, DETECTOR, d.score)])
                new.append(len(entries) - 1)
        active = sorted(matched) + new

    return [Tracklet(start_id + k, video, tuple(e)) for k, e in enumerate(entries)]


def link_videos(
    detections: Iterable[Detection],
    link_iou: float = DEFAULT_LINK_IOU,
    theta: float = 0.5,
    threads: int = 1,
    recall_floor: float = RECALL_FLOOR,
) -> list[Tracklet]:
    """Link every video independently; ids are renumbered in canonical order.

    Canonical order is (video id, start frame, per-video creation order), so
    the result does not depend on ``threads``.
    """
    _check_thresholds(link_iou, theta)
    by_video = group_by_video(list(detections))
    videos = sorted(by_video)

    def run(video: str) -> list[Tracklet]:
        dets = sorted(by_video[video], key=lambda d: d.frame.frame_index)
        return link_tracklets(dets, link_iou, theta, 0, recall_floor)

    if threads > 1 and len(videos) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_video = list(pool.map(run, videos))
    else:
        per_video = [run(v) for v in videos]

    out: list[Tracklet] = []
    for tracks in per_video:
        for t in tracks:
            out.append(replace(t, id=len(out)))
    return out


def prune_tracklets(tracklets: Sequence[Tracklet], min_len: int = DEFAULT_MIN_LEN) -> list[Tracklet]:
    if min_len < 1:
        raise ValueError(f"min_len must be >= 1, got {min_len}")
    return [t for t in tracklets if len(t) >= min_len]
