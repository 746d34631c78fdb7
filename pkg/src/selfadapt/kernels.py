"""Hot numeric kernels with a numba path and a pure-numpy path.

The public names at the bottom of this module resolve to the numba
implementation unless ``SELFADAPT_NO_NUMBA`` is set. Both paths are always
importable (``numpy_kernels`` / ``numba_kernels``) so they can be compared
against each other in tests and in ``benchmarks/bench_kernels.py``.

Boxes are ``(x, y, w, h)`` rows. Widths inside the IoU kernels are re-derived
as ``(x + w) - x`` so that a box compared with itself gives exactly 1.0.
"""

import math
from types import SimpleNamespace

import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, njit


# ---------------------------------------------------------------- numpy path


def _iou_matrix_np(a, b):
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    ax1, ay1 = a[:, 0:1], a[:, 1:2]
    ax2, ay2 = ax1 + a[:, 2:3], ay1 + a[:, 3:4]
    bx1, by1 = b[:, 0], b[:, 1]
    bx2, by2 = bx1 + b[:, 2], by1 + b[:, 3]
    area_a = (ax2 - ax1) * (ay2 - ay1)
    area_b = (bx2 - bx1) * (by2 - by1)
    iw = np.clip(np.minimum(ax2, bx2) - np.maximum(ax1, bx1), 0.0, None)
    ih = np.clip(np.minimum(ay2, by2) - np.maximum(ay1, by1), 0.0, None)
    inter = iw * ih
    union = area_a + area_b - inter
    return inter / union


def _greedy_link_np(iou, thresh):
    n_tracks, n_dets = iou.shape
    det_to_track = np.full(n_dets, -1, dtype=np.int64)
    if n_tracks == 0 or n_dets == 0:
        return det_to_track
    rows, cols = np.nonzero(iou >= thresh)
    order = np.lexsort((rows, cols, -iou[rows, cols]))
    track_used = np.zeros(n_tracks, dtype=np.bool_)
    for k in order:
        r, c = rows[k], cols[k]
        if track_used[r] or det_to_track[c] >= 0:
            continue
        track_used[r] = True
        det_to_track[c] = r
    return det_to_track


def _greedy_match_np(iou, thresh):
    n_dets, n_gt = iou.shape
    det_to_gt = np.full(n_dets, -1, dtype=np.int64)
    if n_gt == 0:
        return det_to_gt
    taken = np.zeros(n_gt, dtype=np.bool_)
    for i in range(n_dets):
        row = np.where(taken, -1.0, iou[i])
        j = int(np.argmax(row))
        if row[j] >= thresh:
            taken[j] = True
            det_to_gt[i] = j
    return det_to_gt


def _sigmoid_np(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _logistic_loss_grad_np(w, b, X, y, sw, eps):
    z = X @ w + b
    p = _sigmoid_np(z)
    pc = np.clip(p, eps, 1.0 - eps)
    per = -(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))
    total = sw.sum()
    loss = float((sw * per).sum() / total)
    r = sw * (p - y) / total
    return loss, X.T @ r, float(r.sum())


# ---------------------------------------------------------------- numba path


@njit
def _iou_matrix_nb(a, b):
    n = a.shape[0]
    m = b.shape[0]
    out = np.zeros((n, m))
    for i in range(n):
        ax1 = a[i, 0]
        ay1 = a[i, 1]
        ax2 = ax1 + a[i, 2]
        ay2 = ay1 + a[i, 3]
        area_a = (ax2 - ax1) * (ay2 - ay1)
        for j in range(m):
            bx1 = b[j, 0]
            by1 = b[j, 1]
            bx2 = bx1 + b[j, 2]
            by2 = by1 + b[j, 3]
            iw = min(ax2, bx2) - max(ax1, bx1)
            ih = min(ay2, by2) - max(ay1, by1)
            if iw <= 0.0 or ih <= 0.0:
                continue
            inter = iw * ih
            area_b = (bx2 - bx1) * (by2 - by1)
            out[i, j] = inter / (area_a + area_b - inter)
    return out


@njit
def _greedy_link_nb(iou, thresh):
    n_tracks = iou.shape[0]
    n_dets = iou.shape[1]
    det_to_track = np.full(n_dets, -1, dtype=np.int64)
    track_used = np.zeros(n_tracks, dtype=np.bool_)
    while True:
        best = -1.0
        br = -1
        bc = -1
        # column-major scan so the first strict maximum has the lowest
        # detection index, then the lowest track row
        for c in range(n_dets):
            if det_to_track[c] >= 0:
                continue
            for r in range(n_tracks):
                if track_used[r]:
                    continue
                v = iou[r, c]
                if v >= thresh and v > best:
                    best = v
                    br = r
                    bc = c
        if br < 0:
            break
        track_used[br] = True
        det_to_track[bc] = br
    return det_to_track


@njit
def _greedy_match_nb(iou, thresh):
    n_dets = iou.shape[0]
    n_gt = iou.shape[1]
    det_to_gt = np.full(n_dets, -1, dtype=np.int64)
    taken = np.zeros(n_gt, dtype=np.bool_)
    for i in range(n_dets):
        best = -1.0
        bj = -1
        for j in range(n_gt):
            if taken[j]:
                continue
            if iou[i, j] > best:
                best = iou[i, j]
                bj = j
        if bj >= 0 and best >= thresh:
            taken[bj] = True
            det_to_gt[i] = bj
    return det_to_gt


@njit
def _logistic_loss_grad_nb(w, b, X, y, sw, eps):
    n, d = X.shape
    gw = np.zeros(d)
    gb = 0.0
    loss = 0.0
    total = 0.0
    for i in range(n):
        total += sw[i]
    for i in range(n):
        z = b
        for k in range(d):
            z += X[i, k] * w[k]
        if z >= 0.0:
            p = 1.0 / (1.0 + math.exp(-z))
        else:
            ez = math.exp(z)
            p = ez / (1.0 + ez)
        pc = min(max(p, eps), 1.0 - eps)
        loss += sw[i] * -(y[i] * math.log(pc) + (1.0 - y[i]) * math.log(1.0 - pc))
        r = sw[i] * (p - y[i]) / total
        gb += r
        for k in range(d):
            gw[k] += r * X[i, k]
    return loss / total, gw, gb


# ---------------------------------------------------------------- dispatch


def _as_boxes(a):
    return np.ascontiguousarray(np.asarray(a, dtype=np.float64).reshape(-1, 4))


def _wrap_nb_iou(a, b):
    return _iou_matrix_nb(_as_boxes(a), _as_boxes(b))


def _wrap_nb_link(iou, thresh):
    return _greedy_link_nb(np.ascontiguousarray(iou, dtype=np.float64), float(thresh))


def _wrap_nb_match(iou, thresh):
    return _greedy_match_nb(np.ascontiguousarray(iou, dtype=np.float64), float(thresh))


def _wrap_nb_loss(w, b, X, y, sw, eps):
    loss, gw, gb = _logistic_loss_grad_nb(
        np.ascontiguousarray(w, dtype=np.float64),
        float(b),
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
        np.ascontiguousarray(sw, dtype=np.float64),
        float(eps),
    )
    return float(loss), gw, float(gb)


def _wrap_np_loss(w, b, X, y, sw, eps):
    return _logistic_loss_grad_np(
        np.asarray(w, dtype=np.float64),
        float(b),
        np.asarray(X, dtype=np.float64),
        np.asarray(y, dtype=np.float64),
        np.asarray(sw, dtype=np.float64),
        float(eps),
    )


numpy_kernels = SimpleNamespace(
    name="numpy",
    iou_matrix=_iou_matrix_np,
    greedy_link=lambda iou, thresh: _greedy_link_np(np.asarray(iou, dtype=np.float64), float(thresh)),
    greedy_match=lambda iou, thresh: _greedy_match_np(np.asarray(iou, dtype=np.float64), float(thresh)),
    logistic_loss_grad=_wrap_np_loss,
)

numba_kernels = SimpleNamespace(
    name="numba",
    iou_matrix=_wrap_nb_iou,
    greedy_link=_wrap_nb_link,
    greedy_match=_wrap_nb_match,
    logistic_loss_grad=_wrap_nb_loss,
) if HAVE_NUMBA else None

active = numba_kernels if USE_NUMBA else numpy_kernels
BACKEND = active.name

iou_matrix = active.iou_matrix
greedy_link = active.greedy_link
greedy_match = active.greedy_match
logistic_loss_grad = active.logistic_loss_grad
sigmoid = _sigmoid_np
