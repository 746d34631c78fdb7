import numpy as np
import pytest

from selfadapt import kernels

pytestmark = pytest.mark.skipif(kernels.numba_kernels is None, reason="numba not installed")
NB, NP = kernels.numba_kernels, kernels.numpy_kernels


def random_boxes(rng, n):
    xy = rng.integers(0, 50, size=(n, 2)).astype(float)
    wh = rng.integers(5, 30, size=(n, 2)).astype(float)
    return np.hstack([xy, wh])


@pytest.mark.parametrize("seed", range(5))
def test_iou_matrix_agrees(seed):
    rng = np.random.default_rng(seed)
    a, b = random_boxes(rng, 17), random_boxes(rng, 9)
    assert NB.iou_matrix(a, b).tobytes() == NP.iou_matrix(a, b).tobytes()
    assert np.all(np.diag(NB.iou_matrix(a, a)) == 1.0)


def test_empty_shapes_agree():
    e = np.empty((0, 4))
    b = random_boxes(np.random.default_rng(0), 3)
    assert NB.iou_matrix(e, b).shape == NP.iou_matrix(e, b).shape == (0, 3)


@pytest.mark.parametrize("seed", range(20))
def test_greedy_assignments_agree(seed):
    rng = np.random.default_rng(seed)
    # coarse values force ties
    iou = rng.choice([0.0, 0.3, 0.5, 0.5, 0.8, 1.0], size=(rng.integers(1, 8), rng.integers(1, 8)))
    for thresh in (0.3, 0.5):
        assert np.array_equal(NB.greedy_link(iou, thresh), NP.greedy_link(iou, thresh))
        assert np.array_equal(NB.greedy_match(iou, thresh), NP.greedy_match(iou, thresh))


@pytest.mark.parametrize("seed", range(5))
def test_loss_and_gradient_agree(seed):
    rng = np.random.default_rng(seed)
    X, y, w, sw = rng.normal(size=(64, 8)), rng.random(64), rng.normal(size=8), rng.random(64) + 0.5
    a = NB.logistic_loss_grad(w, 0.2, X, y, sw, 1e-7)
    b = NP.logistic_loss_grad(w, 0.2, X, y, sw, 1e-7)
    assert a[0] == pytest.approx(b[0], rel=1e-12)
    assert np.allclose(a[1], b[1], rtol=1e-10, atol=1e-14)
    assert a[2] == pytest.approx(b[2], rel=1e-10, abs=1e-14)


def test_backend_flag(monkeypatch):
    import importlib

    from selfadapt import _accel

    monkeypatch.setenv("SELFADAPT_NO_NUMBA", "1")
    try:
        importlib.reload(_accel)
        importlib.reload(kernels)
        assert kernels.BACKEND == "numpy"
    finally:
        monkeypatch.delenv("SELFADAPT_NO_NUMBA")
        importlib.reload(_accel)
        importlib.reload(kernels)
    assert kernels.BACKEND == "numba"
