"""Greedy detection matching, AP@0.5 with 101-point interpolation, KS distance."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .core import Detection, GroundTruthBox, boxes_to_array

RECALL_GRID = np.arange(101, dtype=np.float64) / 100.0
ALL = "all"


def _frame_codes(det_frames, gt_frames):
    """Integer code per frame, increasing with (video_id, frame_index)."""
    frames = sorted(set(det_frames) | set(gt_frames))
    index = {f: i for i, f in enumerate(frames)}
    return (
        np.array([index[f] for f in det_frames], dtype=np.int64),
        np.array([index[f] for f in gt_frames], dtype=np.int64),
    )


def match_arrays(det_codes, det_boxes, det_scores, gt_codes, gt_boxes, iou_thresh=0.5) -> np.ndarray:
    """Array form of :func:`match_detections`; frames are given as integer codes."""
    det_codes = np.asarray(det_codes, dtype=np.int64)
    gt_codes = np.asarray(gt_codes, dtype=np.int64)
    det_scores = np.asarray(det_scores, dtype=np.float64)
    det_boxes = np.asarray(det_boxes, dtype=np.float64).reshape(-1, 4)
    gt_boxes = np.asarray(gt_boxes, dtype=np.float64).reshape(-1, 4)
    n = det_codes.size
    tp = np.zeros(n, dtype=bool)
    if n == 0 or gt_codes.size == 0:
        return tp

    order = np.lexsort((np.arange(n), -det_scores, det_codes))
    gt_order = np.argsort(gt_codes, kind="stable")
    gt_sorted = gt_codes[gt_order]
    codes_sorted = det_codes[order]
    starts = np.r_[0, np.nonzero(np.diff(codes_sorted))[0] + 1]
    ends = np.r_[starts[1:], n]
    for s, e in zip(starts, ends):
        code = codes_sorted[s]
        lo = np.searchsorted(gt_sorted, code, side="left")
        hi = np.searchsorted(gt_sorted, code, side="right")
        if lo == hi:
            continue
        rows = order[s:e]
        iou = kernels.iou_matrix(det_boxes[rows], gt_boxes[gt_order[lo:hi]])
        tp[rows] = kernels.greedy_match(iou, iou_thresh) >= 0
    return tp


def match_detections(
    detections: Sequence[Detection],
    ground_truth: Sequence[GroundTruthBox],
    iou_thresh: float = 0.5,
) -> list[bool]:
    """TP/FP flag per detection, in input order.

    Detections are visited by descending score (ties: video, frame, input
    order) and each takes the unmatched ground-truth box of its frame with the
    highest IoU, provided it reaches ``iou_thresh``.
    """
    det_codes, gt_codes = _frame_codes([d.frame for d in detections], [g.frame for g in ground_truth])
    tp = match_arrays(
        det_codes,
        boxes_to_array(d.box for d in detections),
        [d.score for d in detections],
        gt_codes,
        boxes_to_array(g.box for g in ground_truth),
        iou_thresh,
    )
    return tp.tolist()


@dataclass(frozen=True)
class PrCurve:
    thresholds: np.ndarray
    recall: np.ndarray
    precision: np.ndarray


def pr_curve(scores, tp, n_gt: int, tie_codes=None) -> PrCurve:
    scores = np.asarray(scores, dtype=np.float64)
    tp = np.asarray(tp, dtype=bool)
    n = scores.size
    if tie_codes is None:
        tie_codes = np.zeros(n, dtype=np.int64)
    order = np.lexsort((np.arange(n), tie_codes, -scores))
    hits = np.cumsum(tp[order])
    counts = np.arange(1, n + 1)
    return PrCurve(scores[order], hits / n_gt, hits / counts)


def ap_from_flags(scores, tp, n_gt: int, tie_codes=None) -> float:
    """101-point interpolated AP from per-detection TP flags."""
    if n_gt <= 0:
        raise ValueError("AP is undefined without ground truth")
    if len(scores) == 0:
        return 0.0
    curve = pr_curve(scores, tp, n_gt, tie_codes)
    envelope = np.maximum.accumulate(curve.precision[::-1])[::-1]
    idx = np.searchsorted(curve.recall, RECALL_GRID, side="left")
    reached = idx < envelope.size
    q = np.zeros_like(RECALL_GRID)
    q[reached] = envelope[idx[reached]]
    return float(q.mean())


def ap50_arrays(det_codes, det_boxes, det_scores, gt_codes, gt_boxes, iou_thresh=0.5) -> float:
    tp = match_arrays(det_codes, det_boxes, det_scores, gt_codes, gt_boxes, iou_thresh)
    return ap_from_flags(det_scores, tp, len(gt_codes), det_codes)


def average_precision(
    detections: Sequence[Detection],
    ground_truth: Sequence[GroundTruthBox],
    iou_thresh: float = 0.5,
) -> float:
    det_codes, gt_codes = _frame_codes([d.frame for d in detections], [g.frame for g in ground_truth])
    return ap50_arrays(
        det_codes,
        boxes_to_array(d.box for d in detections),
        np.array([d.score for d in detections], dtype=np.float64),
        gt_codes,
        boxes_to_array(g.box for g in ground_truth),
        iou_thresh,
    )


@dataclass
class GroupAP:
    group: str
    ap: float
    num_gt: int
    num_detections: int


@dataclass
class APReport:
    groups: dict[str, GroupAP] = field(default_factory=dict)
    skipped: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ap": {k: g.ap for k, g in self.groups.items()},
            "groups": [vars(g) for g in self.groups.values()],
            "skipped": list(self.skipped),
        }


def average_precision_50(
    detections: Sequence[Detection],
    ground_truth: Sequence[GroundTruthBox],
    group_by_tags: bool = False,
    iou_thresh: float = 0.5,
) -> APReport:
    """AP@0.5 overall, or per tag.

    With ``group_by_tags`` a tag selects every frame holding at least one
    ground-truth box carrying it; that tag's AP uses all boxes and detections
    of those frames. Groups without ground truth are skipped and recorded.
    """
    report = APReport()
    groups: dict[str, tuple[list, list]] = {}
    if group_by_tags:
        frames_by_tag: dict[str, set] = {}
        for g in ground_truth:
            for tag in g.tags:
                frames_by_tag.setdefault(tag, set()).add(g.frame)
        for tag in sorted(frames_by_tag):
            fs = frames_by_tag[tag]
            groups[tag] = (
                [d for d in detections if d.frame in fs],
                [g for g in ground_truth if g.frame in fs],
            )
    else:
        groups[ALL] = (list(detections), list(ground_truth))

    for name, (dets, gts) in groups.items():
        if not gts:
            warnings.warn(f"group {name!r} has no ground truth; skipped", stacklevel=2)
            report.skipped.append(name)
            continue
        report.groups[name] = GroupAP(name, average_precision(dets, gts, iou_thresh), len(gts), len(dets))
    return report


def ks_statistic(scores_a, scores_b) -> float:
    """Largest gap between the two empirical CDFs."""
    a = np.sort(np.asarray(scores_a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(scores_b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("KS statistic needs two non-empty samples")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))
