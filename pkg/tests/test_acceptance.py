"""Acceptance suite: one test per criterion, summarised as PASS/FAIL lines.

Run on its own with ``pytest tests/test_acceptance.py`` (or
``python tests/test_acceptance.py``); the summary appears at the end of the
pytest output under "acceptance criteria".
"""

import json
import random
import time

import numpy as np
import pytest

from selfadapt.cli import main
from selfadapt.core import BoundingBox, Detection, FrameRef
from selfadapt.evaluate import average_precision, ks_statistic
from selfadapt.ingest import serialize_detections, serialize_ground_truth
from selfadapt.loss import binary_cross_entropy, entropy, mean_distillation_loss
from selfadapt.pseudolabel import PseudoLabel, SchemeConfig, apply_scheme, interpolate_labels
from selfadapt.remap import build_empirical_cdf, remap_score, remap_scores, threshold_at_precision, transfer_threshold
from selfadapt.sim import Pipeline, ScenarioConfig, generate_scenario
from selfadapt.tracklet import DETECTOR, TRACKER, TrackEntry, Tracklet, link_tracklets, prune_tracklets

from .oracles import iou_xywh, reference_ap, reference_link, reference_match, reference_threshold
from .test_evaluate import plain, random_instance
from .test_remap import labeled_set, synthetic_source
from .test_tracklet import as_plain, as_reference_input, random_video


@pytest.mark.criterion(1, "worked example: soft scores and hp-cons label")
def test_criterion_1_worked_example(note):
    t0 = time.perf_counter()
    entries = tuple(
        TrackEntry(i, BoundingBox(10.0 + i, 20.0, 30.0, 40.0), DETECTOR if d >= 0.5 else TRACKER, d)
        for i, d in enumerate([0.78, 0.83, 0.32])
    )
    track = Tracklet(0, "fig", entries)
    smooth = apply_scheme([track], SchemeConfig("label-smooth", 0.5, lam=0.5))
    assert [p.soft_score for p in smooth] == [0.78, 0.83, 0.5]
    cons = apply_scheme([track], SchemeConfig("hp-cons", 0.5))
    assert cons[2].detector_score == 0.32 and cons[2].soft_label == 1.0
    assert [p.soft_label for p in cons[:2]] == [0.78, 0.83]
    elapsed = time.perf_counter() - t0
    note(f"{elapsed * 1e3:.2f} ms")
    assert elapsed < 0.1


@pytest.mark.criterion(2, "interpolation endpoints and monotonicity")
def test_criterion_2_interpolation(note):
    rng = np.random.default_rng(2)
    frame, box = FrameRef("v", 0), BoundingBox(0, 0, 1, 1)
    labels = [
        PseudoLabel(frame, box, DETECTOR, float(d), i, float(y), float(s), 0.0)
        for i, (d, y, s) in enumerate(zip(rng.random(1000), rng.integers(0, 2, 1000), rng.random(1000)))
    ]
    zero = interpolate_labels(labels, 0.0)
    one = interpolate_labels(labels, 1.0)
    assert all(p.soft_label == p.hard_label for p in zero)
    assert all(p.soft_label == p.soft_score for p in one)
    grid = [k / 100 for k in range(101)]
    curves = np.array([[p.soft_label for p in interpolate_labels(labels, lam)] for lam in grid])
    up = np.array([p.soft_score >= p.hard_label for p in labels])
    steps = np.diff(curves, axis=0)
    assert np.all(steps[:, up] >= 0) and np.all(steps[:, ~up] <= 0)
    note("1000 labels, 101 lambda values")


@pytest.mark.criterion(3, "histogram specification KS < 0.05; identity within 1e-6")
def test_criterion_3_histogram_specification(note):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    target = rng.beta(2, 5, size=10_000)
    source = rng.beta(5, 2, size=10_000)
    mapped = remap_scores(target, build_empirical_cdf(target), build_empirical_cdf(source))
    ks = ks_statistic(mapped, source)
    # fresh draws from the target distribution, not the ones the CDF was built from
    fresh = remap_scores(rng.beta(2, 5, size=10_000), build_empirical_cdf(target), build_empirical_cdf(source))
    ks_fresh = ks_statistic(fresh, source)
    same = build_empirical_cdf(target)
    identity = np.max(np.abs(remap_scores(target, same, same) - target))
    elapsed = time.perf_counter() - t0
    note(f"KS {ks:.4f}, on fresh draws {ks_fresh:.4f}, identity error {identity:.1e}, {elapsed:.2f} s")
    assert ks < 0.05 and ks_fresh < 0.05
    assert identity <= 1e-6
    assert elapsed < 1.0


@pytest.mark.criterion(4, "threshold transfer round trip and threshold selection")
def test_criterion_4_threshold_transfer(note):
    rng = np.random.default_rng(4)
    tgt = rng.beta(2, 3, size=2000)
    src = rng.beta(4, 2, size=2000)
    target, source = build_empirical_cdf(tgt), build_empirical_cdf(src)
    worst = max(abs(transfer_threshold(remap_score(x, target, source), target, source) - x) for x in tgt)
    assert worst <= 1e-6

    r = random.Random(4)
    for _ in range(200):
        n = r.randint(1, 25)
        flags = [r.random() < 0.6 for _ in range(n)]
        scores = [r.choice([0.1, 0.3, 0.5, 0.6, 0.8, 0.9, 0.95]) for _ in range(n)]
        dets, gts = labeled_set(flags, scores)
        tp = reference_match(*plain(dets, gts))
        want_theta, _ = reference_threshold(scores, tp, 0.95)
        assert threshold_at_precision(dets, gts, 0.95)[0] == want_theta

    achieved = []
    for seed in range(3):
        dets, gts = synthetic_source(10_000, seed)
        achieved.append(threshold_at_precision(dets, gts, 0.95)[1])
    note(f"round trip {worst:.1e}, achieved precision {', '.join(f'{a:.4f}' for a in achieved)}")
    assert all(abs(a - 0.95) <= 0.02 for a in achieved)


@pytest.mark.criterion(5, "loss value, minimality and gradient")
def test_criterion_5_loss(note):
    assert abs(binary_cross_entropy(0.0, 0.5) - np.log(2.0)) <= 1e-12
    grid = np.arange(1, 1000) / 1000.0
    ys, ps = np.meshgrid(grid, grid, indexing="ij")
    gap = binary_cross_entropy(ys, ps) - entropy(grid)[:, None]
    assert gap.min() >= -1e-12
    # equality only on the diagonal
    off = ~np.eye(grid.size, dtype=bool)
    assert gap[off].min() > 0

    rng = np.random.default_rng(5)
    X, y = rng.normal(size=(64, 16)), rng.random(64)

    def f(w, b):
        return mean_distillation_loss(w, b, X, y)[0]

    worst = 0.0
    for _ in range(100):
        w, b = rng.normal(scale=0.5, size=16), float(rng.normal(scale=0.5))
        _, gw, gb = mean_distillation_loss(w, b, X, y)
        h = 1e-6
        num = [(f(w + h * e, b) - f(w - h * e, b)) / (2 * h) for e in np.eye(16)]
        num.append((f(w, b + h) - f(w, b - h)) / (2 * h))
        num = np.array(num)
        worst = max(worst, np.linalg.norm(np.append(gw, gb) - num) / np.linalg.norm(num))
    note(f"worst relative gradient error {worst:.1e}")
    assert worst < 1e-5


@pytest.mark.criterion(6, "AP matches brute force; perfect 1.0, empty 0.0")
def test_criterion_6_ap_oracle(note):
    rng = random.Random(6)
    worst = 0.0
    for _ in range(500):
        dets, gts = random_instance(rng)
        worst = max(worst, abs(average_precision(dets, gts) - reference_ap(*plain(dets, gts))))
    note(f"worst difference {worst:.1e} over 500 instances")
    assert worst <= 1e-9
    gts = [d for d in random_instance(random.Random(0))[1]]
    perfect = [Detection(g.frame, g.box, 0.9) for g in gts]
    assert average_precision(perfect, gts) == 1.0
    assert average_precision([], gts) == 0.0


@pytest.mark.criterion(7, "tracklet contracts and brute-force equivalence")
def test_criterion_7_tracklets(note):
    rng = random.Random(7)
    for _ in range(200):
        dets = random_video(rng, rng.randint(1, 6), rng.randint(1, 40), grid=False)
        out = link_tracklets(dets)
        seen = set()
        for t in out:
            frames = [e.frame_index for e in t.entries]
            assert frames == list(range(frames[0], frames[0] + len(frames)))
            for e in t.entries:
                assert id(e.box) not in seen
                seen.add(id(e.box))
        assert all(len(t) >= 10 for t in prune_tracklets(out, 10))
    n = 0
    for n_objects in range(1, 4):
        for n_frames in range(1, 6):
            for _ in range(40):
                dets = random_video(rng, n_objects, n_frames)
                assert as_plain(link_tracklets(dets)) == reference_link(as_reference_input(dets))
                n += 1
    note(f"{n} small instances")


@pytest.mark.criterion(8, "end-to-end trends on the default scenario, 5 rounds, < 5 min")
def test_criterion_8_end_to_end(note):
    t0 = time.perf_counter()
    pipe = Pipeline(generate_scenario(ScenarioConfig()))
    base = pipe.baseline_ap
    runs = {
        "det": pipe.run("det", rounds=5),
        "track": pipe.run("track", rounds=5),
        "hp": pipe.run("hp", rounds=5),
        "ls0.3": pipe.run("label-smooth", rounds=5, lam=0.3),
        "ls0.5": pipe.run("label-smooth", rounds=5, lam=0.5),
        "ls0.7": pipe.run("label-smooth", rounds=5, lam=0.7),
        "hp-cons": pipe.run("hp-cons", rounds=5),
        "score-remap": pipe.run("score-remap", rounds=5),
    }
    elapsed = time.perf_counter() - t0
    mean = {k: r.mean for k, r in runs.items()}
    best_soft = max(mean[k] for k in ("ls0.3", "ls0.5", "ls0.7", "hp-cons", "score-remap"))
    note(f"baseline {base:.3f}, " + ", ".join(f"{k} {v:.3f}" for k, v in mean.items()) + f"; {elapsed:.0f} s")
    assert all(v >= base + 0.05 for v in mean.values()), "(a) every scheme beats the baseline by 0.05"
    assert mean["hp"] >= mean["det"] - 0.01, "(b) hp keeps up with det"
    assert best_soft > mean["hp"], "(c) the best soft scheme beats hp"
    assert elapsed < 300


def _write_inputs(tmp_path):
    rng = np.random.default_rng(9)
    from selfadapt.core import GroundTruthBox

    dets, gts = [], []
    for v in range(3):
        for t in range(20):
            f = FrameRef(f"v{v}", t)
            box = BoundingBox(50.0 + 3 * t, 40.0 * v, 30.0, 30.0)
            dets.append(Detection(f, box, float(rng.uniform(0.2, 0.99))))
            dets.append(Detection(f, BoundingBox(float(rng.uniform(300, 500)), 200.0, 20.0, 20.0), float(rng.random())))
            gts.append(GroundTruthBox(f, box))
    (tmp_path / "dets.jsonl").write_text(serialize_detections(dets))
    (tmp_path / "gt.jsonl").write_text(serialize_ground_truth(gts))
    (tmp_path / "scenario.json").write_text(json.dumps(
        {"n_source_images": 40, "n_target_videos": 4, "frames_per_video": 15, "n_test_images": 40}
    ))


@pytest.mark.criterion(9, "every stage reruns to bit-identical files")
def test_criterion_9_determinism(tmp_path, capsys, note):
    _write_inputs(tmp_path)
    d = str(tmp_path)

    def stages(tag):
        out = lambda name: f"{d}/{tag}-{name}"  # noqa: E731
        yield ["track", "--in", f"{d}/dets.jsonl", "--out", out("tracks.jsonl")], None
        for scheme in ("det", "track", "hp", "label-smooth", "hp-cons", "score-remap"):
            extra = ["--source-scores", f"{d}/dets.jsonl", "--target-scores", f"{d}/dets.jsonl"] if scheme == "score-remap" else []
            yield ["pseudolabel", "--in", out("tracks.jsonl"), "--scheme", scheme, "--out", out(f"{scheme}.jsonl"), *extra], None
        yield ["remap", "--source-scores", f"{d}/dets.jsonl", "--target-scores", f"{d}/dets.jsonl", "--out", out("remap.csv")], None
        yield ["auto-threshold", "--source-dets", f"{d}/dets.jsonl", "--source-gt", f"{d}/gt.jsonl",
               "--target-dets", f"{d}/dets.jsonl"], out("auto.json")
        yield ["eval", "--dets", f"{d}/dets.jsonl", "--gt", f"{d}/gt.jsonl", "--csv", out("eval.csv")], out("eval.json")
        yield ["sim", "--config", f"{d}/scenario.json", "--scheme", "hp-cons", "--rounds", "2", "--seed", "3",
               "--csv", out("sim.csv"), "--out", out("sim.json")], out("sim-stdout.json")

    for tag in ("a", "b"):
        for argv, stdout_file in stages(tag):
            assert main(argv) == 0, argv
            text = capsys.readouterr().out
            if stdout_file:
                with open(stdout_file, "w") as fh:
                    fh.write(text)
    names = sorted(p.name[2:] for p in tmp_path.glob("a-*"))
    for name in names:
        assert (tmp_path / f"a-{name}").read_bytes() == (tmp_path / f"b-{name}").read_bytes(), name
    note(f"{len(names)} files compared")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
