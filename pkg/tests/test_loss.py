import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from selfadapt.loss import (
    EPS,
    SOURCE,
    TARGET,
    BatchSpec,
    TrainingImage,
    TrainingSample,
    binary_cross_entropy,
    compose_mixed_batch,
    distillation_loss,
    entropy,
    mean_distillation_loss,
)
from selfadapt.pseudolabel import interpolate

LN2 = math.log(2.0)
GRID = np.arange(1, 1000) / 1000.0


def entropy_oracle(y):
    return -(y * math.log(y) + (1 - y) * math.log(1 - y))


def test_bce_worked_values():
    assert binary_cross_entropy(0.0, 0.5) == pytest.approx(LN2, abs=1e-15)
    assert binary_cross_entropy(1.0, 1.0 - EPS) == pytest.approx(0.0, abs=1e-6)
    assert binary_cross_entropy(1.0, 1.0) == binary_cross_entropy(1.0, 1.0 - EPS)
    assert math.isfinite(binary_cross_entropy(1.0, 0.0))


@pytest.mark.parametrize("y, want", [(0.89, 0.3465153369186662), (0.846, 0.4295851999835733)])
def test_soft_label_minimum_is_entropy(y, want):
    assert entropy_oracle(y) == pytest.approx(want, abs=1e-15)
    assert entropy(y) == pytest.approx(want, abs=1e-12)
    assert binary_cross_entropy(y, y) == pytest.approx(want, abs=1e-12)
    grid = binary_cross_entropy(np.full_like(GRID, y), GRID)
    assert grid.min() >= want - 1e-12
    assert GRID[np.argmin(grid)] == pytest.approx(y, abs=1e-3)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.001, 0.999))
def test_bce_bounded_below_by_entropy(y):
    h = entropy(y)
    vals = binary_cross_entropy(np.full_like(GRID, y), GRID)
    assert np.all(vals >= h - 1e-12)


def test_distillation_loss_dispatches_on_stored_label():
    x = np.zeros(4)
    assert distillation_loss(TrainingSample(SOURCE, 1.0, x), 0.5) == pytest.approx(LN2)
    assert distillation_loss(TrainingSample(TARGET, 1.0, x), 0.5) == pytest.approx(LN2)
    assert distillation_loss(TrainingSample(TARGET, 0.846, x), 0.846) == pytest.approx(entropy_oracle(0.846))


def test_training_sample_validation():
    x = np.zeros(2)
    with pytest.raises(ValueError):
        TrainingSample(SOURCE, 0.5, x)
    with pytest.raises(ValueError):
        TrainingSample(TARGET, 1.5, x)
    with pytest.raises(ValueError):
        TrainingSample("elsewhere", 1.0, x)
    with pytest.raises(ValueError):
        TrainingSample(TARGET, 1.0, x, weight=0.0)


def numeric_loss(w, b, X, y):
    p = 1.0 / (1.0 + np.exp(-(X @ w + b)))
    p = np.clip(p, EPS, 1 - EPS)
    return float(np.mean(-(y * np.log(p) + (1 - y) * np.log1p(-p))))


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 6))
    y = rng.random(40)
    worst = 0.0
    for _ in range(100):
        w, b = rng.normal(scale=0.5, size=6), float(rng.normal(scale=0.5))
        loss, gw, gb = mean_distillation_loss(w, b, X, y)
        assert loss == pytest.approx(numeric_loss(w, b, X, y), rel=1e-12)
        h = 1e-6
        num = np.empty(7)
        for k in range(6):
            e = np.zeros(6)
            e[k] = h
            num[k] = (numeric_loss(w + e, b, X, y) - numeric_loss(w - e, b, X, y)) / (2 * h)
        num[6] = (numeric_loss(w, b + h, X, y) - numeric_loss(w, b - h, X, y)) / (2 * h)
        ana = np.append(gw, gb)
        worst = max(worst, np.linalg.norm(ana - num) / np.linalg.norm(num))
    assert worst < 1e-5


def test_loss_ignores_sample_order():
    rng = np.random.default_rng(1)
    X, y, w = rng.normal(size=(30, 5)), rng.random(30), rng.normal(size=5)
    perm = rng.permutation(30)
    a = mean_distillation_loss(w, 0.1, X, y)
    b = mean_distillation_loss(w, 0.1, X[perm], y[perm])
    assert a[0] == pytest.approx(b[0], rel=1e-12)
    assert np.allclose(a[1], b[1], rtol=1e-12)


def test_lambda_zero_is_hard_loss():
    rng = np.random.default_rng(2)
    X, w = rng.normal(size=(20, 3)), rng.normal(size=3)
    soft = rng.random(20)
    labels = np.array([interpolate(s, 1.0, 0.0) for s in soft])
    assert mean_distillation_loss(w, 0.0, X, labels)[0] == mean_distillation_loss(w, 0.0, X, np.ones(20))[0]


# ------------------------------------------------------------------ batches


def pool(domain, n_images, n_pos, rng, dim=4):
    return [
        TrainingImage(domain, rng.normal(size=(n_pos, dim)), np.ones(n_pos), rng.normal(size=(100, dim)))
        for _ in range(n_images)
    ]


def test_batch_shape_and_halves():
    rng = np.random.default_rng(0)
    batch = compose_mixed_batch(pool(SOURCE, 3, 30, rng), pool(TARGET, 3, 5, rng), BatchSpec(), rng)
    assert len(batch) == 128
    assert (batch.domains == SOURCE).sum() == 64
    src = batch.labels[batch.domains == SOURCE]
    tgt = batch.labels[batch.domains == TARGET]
    assert (src > 0).sum() == 16  # capped at 1:3
    assert (tgt > 0).sum() == 5


def test_batch_target_without_labels_is_all_negative():
    rng = np.random.default_rng(0)
    batch = compose_mixed_batch(pool(SOURCE, 1, 5, rng), pool(TARGET, 1, 0, rng), BatchSpec(), rng)
    assert np.all(batch.labels[batch.domains == TARGET] == 0.0)


def test_batch_is_seeded():
    data = np.random.default_rng(9)
    src, tgt = pool(SOURCE, 4, 10, data), pool(TARGET, 4, 10, data)
    a = compose_mixed_batch(src, tgt, BatchSpec(), np.random.default_rng(3))
    b = compose_mixed_batch(src, tgt, BatchSpec(), np.random.default_rng(3))
    assert a.features.tobytes() == b.features.tobytes()
    assert a.labels.tobytes() == b.labels.tobytes()


def test_batch_needs_both_pools():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        compose_mixed_batch([], pool(TARGET, 1, 1, rng), BatchSpec(), rng)
    with pytest.raises(ValueError):
        BatchSpec(regions_per_image=0)
