"""Synthetic two-domain detection world and a trainable linear-logistic detector.

Region features live in ``feature_dim`` dimensions split into four equal
blocks:

* block A carries the object cue the source domain teaches;
* block B carries an object cue that only exists in the target domain;
* block N1 holds the distractor signature; the last block is pure nuisance.

Source objects have mean ``signal`` on A. Target objects keep ``1 - cue_loss
* shift`` of that and gain ``signal * target_cue * shift`` on B, so a
source-trained scorer misses part of what separates target objects and
pseudo-labels can teach it the B cue. Every target region is translated
down along A by ``translation * shift``. Target background sits at
``clutter_cue * signal`` on A, giving the source scorer false positives that
target negatives can fix.

Target videos add three kinds of trouble:

* occlusion runs scale an object's A cue by ``1 - occlusion_strength`` for a
  few frames, dropping its score below ``theta`` while the box keeps moving
  smoothly; these frames are what tracklets recover as tracker-only labels;
* distractors are static regions resembling objects on A (times
  ``distractor_similarity``) with a fraction ``distractor_cue`` of the B cue
  and a negative N1 signature, so they form long tracklets of wrong
  pseudo-labels that mostly score in the middle of the range;
* with probability ``drift_rate`` a track outlives its object for a few
  frames as a left-behind background patch (A cue ``ghost_cue``).

Region boxes are given (no proposal stage). Detections on a frame are all of
its regions scored by the detector.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .core import BoundingBox, Detection, FrameRef
from .evaluate import ap50_arrays
from .loss import BatchSpec, TrainingImage, compose_mixed_batch, mean_distillation_loss
from .pseudolabel import SchemeConfig, apply_scheme
from .remap import SOURCE, TARGET, build_empirical_cdf
from .tracklet import DEFAULT_LINK_IOU, DEFAULT_MIN_LEN, RECALL_FLOOR, TRACKER, link_tracklets, prune_tracklets

log = logging.getLogger(__name__)

CANVAS = (1280.0, 720.0)
BASELINE = "baseline"
SIM_SCHEMES = (BASELINE, "det", "track", "hp", "label-smooth", "hp-cons", "score-remap")


@dataclass(frozen=True)
class ScenarioConfig:
    feature_dim: int = 64
    n_source_images: int = 200
    n_target_videos: int = 40
    frames_per_video: int = 30
    n_test_images: int = 300
    objects_per_image: float = 3.0
    clutter_per_image: int = 40
    distractors_per_video: float = 3.2
    signal: float = 1.0
    identity_noise: float = 0.32
    frame_noise: float = 0.15
    shift: float = 1.0
    translation: float = 0.0
    cue_loss: float = 0.0
    target_cue: float = 1.0
    occlusion_rate: float = 0.145
    occlusion_run_length: float = 5.0
    occlusion_strength: float = 0.45
    distractor_similarity: float = 0.78
    distractor_cue: float = 0.89
    clutter_cue: float = 0.41
    drift_rate: float = 0.0
    drift_length: float = 4.0
    ghost_cue: float = 0.3
    subdomains: tuple = (("dusk", 0.8), ("night", 1.2))
    seed: int = 0

    def __post_init__(self) -> None:
        counts = ("feature_dim", "n_source_images", "n_target_videos", "frames_per_video", "n_test_images")
        for name in counts:
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.feature_dim % 4:
            raise ValueError("feature_dim must be a multiple of 4")
        for name in ("objects_per_image", "distractors_per_video", "occlusion_rate", "occlusion_run_length",
                     "identity_noise", "frame_noise", "shift", "clutter_per_image", "drift_rate", "drift_length"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.subdomains:
            raise ValueError("at least one sub-domain is required")
        object.__setattr__(self, "subdomains", tuple((str(n), float(m)) for n, m in self.subdomains))

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown scenario keys: {', '.join(sorted(unknown))}")
        data = dict(data)
        if "subdomains" in data:
            sd = data["subdomains"]
            data["subdomains"] = tuple(sd.items()) if isinstance(sd, dict) else tuple(map(tuple, sd))
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["subdomains"] = [list(s) for s in self.subdomains]
        return d


@dataclass(frozen=True, eq=False)
class RegionSet:
    """Candidate regions of one image: what a detector is allowed to see."""

    video_id: str
    frame_index: int
    boxes: np.ndarray
    features: np.ndarray


@dataclass(frozen=True, eq=False)
class LabeledImage:
    regions: RegionSet
    is_object: np.ndarray
    tags: tuple = ()


@dataclass(frozen=True, eq=False)
class Scenario:
    config: ScenarioConfig
    source: list
    target_videos: list  # list[list[RegionSet]]
    test: list
    # hidden target truth, indexed like target_videos; read by diagnostics only
    _target_objects: list = field(repr=False, default_factory=list)
    _target_occluded: list = field(repr=False, default_factory=list)
    # per-frame region kinds: 0 object, 1 distractor, 2 left-behind patch, 3 clutter
    _target_kinds: list = field(repr=False, default_factory=list)


# ------------------------------------------------------------------ scenario


class _World:
    def __init__(self, config: ScenarioConfig, rng: np.random.Generator):
        self.c = config
        self.rng = rng
        q = config.feature_dim // 4
        self.a = slice(0, q)
        self.b = slice(q, 2 * q)
        self.n1 = slice(2 * q, 3 * q)

    def object_mean(self, shift: float, occluded: bool = False) -> np.ndarray:
        c = self.c
        m = np.zeros(c.feature_dim)
        cue = c.signal * max(1.0 - c.cue_loss * shift, 0.0)
        if occluded:
            cue *= 1.0 - c.occlusion_strength
        m[self.a] = cue - c.translation * shift
        m[self.b] = c.signal * c.target_cue * shift
        return m

    def distractor_mean(self, shift: float) -> np.ndarray:
        c = self.c
        m = np.zeros(c.feature_dim)
        m[self.a] = c.signal * c.distractor_similarity - c.translation * shift
        m[self.b] = c.signal * c.target_cue * shift * c.distractor_cue
        m[self.n1] = -0.5 * c.signal
        return m

    def ghost_mean(self, shift: float) -> np.ndarray:
        m = self.background_mean(shift)
        m[self.a] += self.c.signal * self.c.ghost_cue
        return m

    def background_mean(self, shift: float) -> np.ndarray:
        m = np.zeros(self.c.feature_dim)
        m[self.a] = (self.c.signal * self.c.clutter_cue - self.c.translation) * shift
        return m

    def noise(self, n: int, scale: float) -> np.ndarray:
        return self.rng.normal(0.0, 1.0, size=(n, self.c.feature_dim)) * scale

    def random_boxes(self, n: int) -> np.ndarray:
        w = self.rng.uniform(40.0, 120.0, size=n)
        h = w * 1.2
        x = self.rng.uniform(0.0, CANVAS[0] - 120.0, size=n)
        y = self.rng.uniform(0.0, CANVAS[1] - 150.0, size=n)
        return np.stack([x, y, w, h], axis=1)

    def clutter(self, n: int, avoid: np.ndarray) -> np.ndarray:
        """Random boxes overlapping none of ``avoid`` by IoU >= 0.3."""
        out = np.empty((0, 4))
        while out.shape[0] < n:
            cand = self.random_boxes(2 * (n - out.shape[0]) + 4)
            if avoid.shape[0]:
                cand = cand[kernels.iou_matrix(cand, avoid).max(axis=1) < 0.3]
            out = np.concatenate([out, cand])
        return out[:n]

    def still(self, video_id: str, shift: float, occlusion_prob: float) -> tuple[RegionSet, np.ndarray]:
        c = self.c
        n_obj = max(1, int(self.rng.poisson(c.objects_per_image)))
        obj_boxes = self.clutter(n_obj, np.empty((0, 4)))
        occluded = self.rng.random(n_obj) < occlusion_prob
        feats = [self.object_mean(shift, o) for o in occluded]
        obj_feat = np.array(feats) + self.noise(n_obj, np.hypot(c.identity_noise, c.frame_noise))
        n_dis = int(self.rng.poisson(c.distractors_per_video)) if shift > 0 else 0
        dis_boxes = self.clutter(n_dis, obj_boxes)
        dis_feat = self.distractor_mean(shift) + self.noise(n_dis, np.hypot(c.identity_noise, c.frame_noise))
        n_gh = int(self.rng.poisson(c.drift_rate * c.objects_per_image)) if shift > 0 else 0
        gh_boxes = self.clutter(n_gh, np.concatenate([obj_boxes, dis_boxes]))
        gh_feat = self.ghost_mean(shift) + self.noise(n_gh, np.hypot(c.identity_noise, c.frame_noise))
        bg_boxes = self.clutter(c.clutter_per_image, np.concatenate([obj_boxes, dis_boxes, gh_boxes]))
        bg_feat = self.background_mean(shift) + self.noise(c.clutter_per_image, 1.0)
        boxes = np.concatenate([obj_boxes, dis_boxes, gh_boxes, bg_boxes])
        features = np.concatenate([obj_feat, dis_feat, gh_feat, bg_feat])
        is_object = np.zeros(boxes.shape[0], dtype=bool)
        is_object[:n_obj] = True
        return RegionSet(video_id, 0, boxes, features), is_object

    def video(self, video_id: str, shift: float):
        c = self.c
        T = c.frames_per_video
        n_obj = max(1, int(self.rng.poisson(c.objects_per_image)))
        spans = []
        for _ in range(n_obj):
            length = int(self.rng.integers(min(5, T), T + 1))
            start = int(self.rng.integers(0, T - length + 1))
            spans.append((start, start + length))
        start_boxes = self.clutter(n_obj, np.empty((0, 4)))
        velocity = self.rng.normal(0.0, 1.0, size=(n_obj, 2)) * start_boxes[:, 2:3] * 0.015
        identity = self.noise(n_obj, c.identity_noise)
        occluded = np.zeros((n_obj, T), dtype=bool)
        if c.occlusion_run_length > 0 and c.occlusion_rate > 0:
            for k in range(n_obj):
                t = spans[k][0]
                while t < spans[k][1]:
                    if self.rng.random() < c.occlusion_rate:
                        run = 1 + int(self.rng.poisson(c.occlusion_run_length - 1)) if c.occlusion_run_length >= 1 else 1
                        occluded[k, t:t + run] = True
                        t += run + 1
                    else:
                        t += 1
        n_dis = int(self.rng.poisson(c.distractors_per_video)) if shift > 0 else 0
        dis_boxes = self.clutter(n_dis, start_boxes)
        dis_identity = self.noise(n_dis, c.identity_noise)
        # a departing object may leave an object-like patch of background behind
        ghost_end = np.zeros(n_obj, dtype=np.int64)
        if shift > 0 and c.drift_rate > 0:
            for k in range(n_obj):
                if spans[k][1] < T and self.rng.random() < c.drift_rate:
                    run = 1 + int(self.rng.poisson(max(c.drift_length - 1.0, 0.0)))
                    ghost_end[k] = min(spans[k][1] + run, T)

        def box_at(k: int, t: int) -> np.ndarray:
            return np.r_[start_boxes[k, :2] + velocity[k] * t, start_boxes[k, 2:]]

        frames, objects, occl, kinds = [], [], [], []
        prev_fixed = np.empty((0, 4))
        for t in range(T):
            alive = [k for k in range(n_obj) if spans[k][0] <= t < spans[k][1]]
            ghosts = [k for k in range(n_obj) if spans[k][1] <= t < ghost_end[k]]
            obj_boxes = np.array([box_at(k, t) for k in alive]).reshape(-1, 4)
            obj_feat = np.array([self.object_mean(shift, occluded[k, t]) + identity[k] for k in alive]).reshape(-1, c.feature_dim)
            obj_feat = obj_feat + self.noise(len(alive), c.frame_noise)
            dis_feat = self.distractor_mean(shift) + dis_identity + self.noise(n_dis, c.frame_noise)
            gh_boxes = np.array([box_at(k, spans[k][1] - 1) for k in ghosts]).reshape(-1, 4)
            gh_feat = self.ghost_mean(shift) + self.noise(len(ghosts), np.hypot(c.identity_noise, c.frame_noise))
            fixed = np.concatenate([obj_boxes, dis_boxes, gh_boxes])
            # background also stays clear of where objects were a frame ago, so it
            # never continues a finished track
            bg_boxes = self.clutter(c.clutter_per_image, np.concatenate([fixed, prev_fixed]))
            prev_fixed = fixed
            bg_feat = self.background_mean(shift) + self.noise(c.clutter_per_image, 1.0)
            frames.append(RegionSet(video_id, t, np.concatenate([fixed, bg_boxes]),
                                    np.concatenate([obj_feat, dis_feat, gh_feat, bg_feat])))
            objects.append(np.arange(len(alive)))
            occl.append(np.array([occluded[k, t] for k in alive], dtype=bool))
            kinds.append(np.repeat(np.arange(4, dtype=np.int8), [len(alive), n_dis, len(ghosts), c.clutter_per_image]))
        return frames, objects, occl, kinds


def _stationary_occlusion(config: ScenarioConfig) -> float:
    if config.occlusion_run_length <= 0 or config.occlusion_rate <= 0:
        return 0.0
    L = max(config.occlusion_run_length, 1.0)
    return config.occlusion_rate * L / (1.0 + config.occlusion_rate * (L + 1.0))


def generate_scenario(config: ScenarioConfig = ScenarioConfig()) -> Scenario:
    """Deterministic function of ``config`` (including its seed)."""
    rng = np.random.default_rng(config.seed)
    world = _World(config, rng)
    occ = _stationary_occlusion(config)

    source = []
    for i in range(config.n_source_images):
        regions, is_obj = world.still(f"src{i:04d}", 0.0, 0.0)
        source.append(LabeledImage(regions, is_obj))

    videos, objects, occluded, kinds = [], [], [], []
    for v in range(config.n_target_videos):
        name, mult = config.subdomains[v % len(config.subdomains)]
        frames, objs, occl, kind = world.video(f"vid{v:03d}", config.shift * mult)
        videos.append(frames)
        objects.append(objs)
        occluded.append(occl)
        kinds.append(kind)

    test = []
    for i in range(config.n_test_images):
        name, mult = config.subdomains[i % len(config.subdomains)]
        regions, is_obj = world.still(f"test{i:04d}", config.shift * mult, occ)
        test.append(LabeledImage(regions, is_obj, (name,)))

    return Scenario(config, source, videos, test, objects, occluded, kinds)


# ------------------------------------------------------------------ detector


@dataclass(frozen=True, eq=False)
class ToyDetector:
    weights: np.ndarray
    bias: float
    history: tuple = ()

    def score(self, features) -> np.ndarray:
        return kernels.sigmoid(np.asarray(features, dtype=np.float64) @ self.weights + self.bias)


def _init_detector(dim: int, seed: int) -> ToyDetector:
    rng = np.random.default_rng(seed)
    return ToyDetector(rng.normal(0.0, 0.01, size=dim), 0.0)


def train_toy_detector(
    features,
    labels,
    epochs: int = 300,
    learning_rate: float = 0.5,
    seed: int = 0,
    sample_weights=None,
    init: Optional[ToyDetector] = None,
) -> ToyDetector:
    """Full-batch gradient descent on the mean distillation loss.

    ``history`` holds the loss before each epoch's update, plus the final loss.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("training needs at least one sample")
    det = init if init is not None else _init_detector(X.shape[1], seed)
    w, b = det.weights.copy(), det.bias
    history = []
    for _ in range(epochs):
        loss, gw, gb = mean_distillation_loss(w, b, X, y, sample_weights)
        history.append(loss)
        w -= learning_rate * gw
        b -= learning_rate * gb
    if epochs:
        history.append(mean_distillation_loss(w, b, X, y, sample_weights)[0])
    return ToyDetector(w, float(b), tuple(history))


def retrain_mixed(
    detector: ToyDetector,
    source_pool: Sequence[TrainingImage],
    target_pool: Sequence[TrainingImage],
    steps: int,
    learning_rate: float,
    seed: int,
    spec: BatchSpec = BatchSpec(),
) -> ToyDetector:
    """Joint re-training: each step takes one source and one target image."""
    rng = np.random.default_rng(seed)
    w, b = detector.weights.copy(), detector.bias
    for _ in range(steps):
        batch = compose_mixed_batch(source_pool, target_pool, spec, rng)
        _, gw, gb = mean_distillation_loss(w, b, batch.features, batch.labels, batch.weights)
        w -= learning_rate * gw
        b -= learning_rate * gb
    return ToyDetector(w, float(b))


def source_training_set(scenario: Scenario):
    X = np.concatenate([im.regions.features for im in scenario.source])
    y = np.concatenate([im.is_object.astype(np.float64) for im in scenario.source])
    return X, y


def train_baseline(scenario: Scenario, epochs: int = 300, learning_rate: float = 0.5) -> ToyDetector:
    X, y = source_training_set(scenario)
    return train_toy_detector(X, y, epochs, learning_rate, seed=scenario.config.seed)


# ------------------------------------------------------------------ pipeline


def detect_video(detector: ToyDetector, frames: Sequence[RegionSet], floor: float = RECALL_FLOOR) -> list[Detection]:
    out = []
    for fr in frames:
        scores = detector.score(fr.features)
        ref = FrameRef(fr.video_id, fr.frame_index)
        for box, s in zip(fr.boxes, scores):
            if s >= floor:
                out.append(Detection(ref, BoundingBox(*map(float, box)), float(s)))
    return out


def evaluate_ap(detector: ToyDetector, images: Sequence[LabeledImage]) -> float:
    codes, boxes, scores, gt_codes, gt_boxes = [], [], [], [], []
    for i, im in enumerate(images):
        s = detector.score(im.regions.features)
        codes.append(np.full(s.size, i))
        boxes.append(im.regions.boxes)
        scores.append(s)
        gt_codes.append(np.full(int(im.is_object.sum()), i))
        gt_boxes.append(im.regions.boxes[im.is_object])
    return ap50_arrays(
        np.concatenate(codes), np.concatenate(boxes), np.concatenate(scores),
        np.concatenate(gt_codes), np.concatenate(gt_boxes),
    )


@dataclass(frozen=True)
class ExperimentSettings:
    theta: float = 0.5
    link_iou: float = DEFAULT_LINK_IOU
    min_len: int = DEFAULT_MIN_LEN
    baseline_epochs: int = 300
    baseline_lr: float = 0.5
    retrain_steps: int = 2000
    retrain_lr: float = 0.3
    regions_per_image: int = 64


@dataclass
class ExperimentResult:
    scheme: str
    lam: Optional[float]
    per_seed_ap: dict
    mean: float
    std: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "lambda": self.lam,
            "per_seed_ap": {str(k): v for k, v in self.per_seed_ap.items()},
            "mean": self.mean,
            "std": self.std,
            "diagnostics": self.diagnostics,
        }


class Pipeline:
    """Baseline, target inference and tracklets for one scenario, computed once.

    The scheme-specific steps (labeling, re-training, scoring) reuse them.
    """

    def __init__(self, scenario: Scenario, settings: ExperimentSettings = ExperimentSettings()):
        self.scenario = scenario
        self.settings = settings
        self.baseline = train_baseline(scenario, settings.baseline_epochs, settings.baseline_lr)
        self.baseline_ap = evaluate_ap(self.baseline, scenario.test)
        self.detections = [detect_video(self.baseline, frames) for frames in scenario.target_videos]
        tracks = []
        for dets in self.detections:
            tracks.extend(link_tracklets(dets, settings.link_iou, settings.theta, start_id=len(tracks)))
        self.tracklets = prune_tracklets(tracks, settings.min_len)
        self.source_pool = [
            TrainingImage(SOURCE, im.regions.features[im.is_object], np.ones(int(im.is_object.sum())),
                          im.regions.features[~im.is_object])
            for im in scenario.source
        ]
        self._frame_index = {
            (fr.video_id, fr.frame_index): fr for frames in scenario.target_videos for fr in frames
        }

    def scheme_config(self, scheme: str, lam: Optional[float] = None) -> SchemeConfig:
        theta = self.settings.theta
        if scheme != "score-remap":
            return SchemeConfig(scheme, theta, lam if scheme == "label-smooth" else None)
        src_scores = np.concatenate([self.baseline.score(im.regions.features) for im in self.scenario.source])
        tgt_scores = np.array([d.score for dets in self.detections for d in dets])
        return SchemeConfig(
            scheme, theta,
            source_cdf=build_empirical_cdf(src_scores[src_scores >= theta], SOURCE),
            target_cdf=build_empirical_cdf(tgt_scores[tgt_scores >= theta], TARGET),
        )

    def target_pool(self, labels) -> list[TrainingImage]:
        by_frame: dict = {}
        for p in labels:
            by_frame.setdefault((p.frame.video_id, p.frame.frame_index), []).append(p)
        pool = []
        for key in sorted(by_frame):
            fr = self._frame_index[key]
            plist = by_frame[key]
            lab_boxes = np.array([p.box.as_list() for p in plist])
            iou = kernels.iou_matrix(lab_boxes, fr.boxes)
            pos = iou.argmax(axis=1)
            neg = iou.max(axis=0) < 0.5
            pool.append(TrainingImage(
                TARGET, fr.features[pos], np.array([p.soft_label for p in plist]), fr.features[neg]
            ))
        return pool

    def label_quality(self, labels) -> dict:
        """Pseudo-label precision and recall against the hidden target truth."""
        sc = self.scenario
        truth = {}
        n_true = 0
        n_hard = 0
        for frames, objs, occl in zip(sc.target_videos, sc._target_objects, sc._target_occluded):
            for fr, o, oc in zip(frames, objs, occl):
                truth[(fr.video_id, fr.frame_index)] = (fr.boxes[o], oc)
                n_true += o.size
                n_hard += int(oc.sum())
        hits = 0
        hard_hits = 0
        tracker = 0
        for p in labels:
            tracker += p.origin == TRACKER
            gt_boxes, oc = truth[(p.frame.video_id, p.frame.frame_index)]
            if gt_boxes.shape[0] == 0:
                continue
            iou = kernels.iou_matrix(np.array([p.box.as_list()]), gt_boxes)[0]
            k = int(iou.argmax())
            if iou[k] >= 0.5:
                hits += 1
                hard_hits += int(oc[k])
        n = len(labels)
        return {
            "labels": n,
            "tracker_only": int(tracker),
            "precision": hits / n if n else 0.0,
            "recall": hits / n_true if n_true else 0.0,
            "occluded_recall": hard_hits / n_hard if n_hard else 0.0,
        }

    def run_round(self, target_pool, seed: int) -> float:
        s = self.settings
        model = retrain_mixed(self.baseline, self.source_pool, target_pool, s.retrain_steps, s.retrain_lr,
                              seed, BatchSpec(s.regions_per_image))
        return evaluate_ap(model, self.scenario.test)

    def run(self, scheme: str, rounds: int = 5, seed: int = 0, lam: Optional[float] = None,
            threads: int = 1) -> ExperimentResult:
        if scheme not in SIM_SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}; choose from {', '.join(SIM_SCHEMES)}")
        if rounds < 1:
            raise ValueError("rounds must be >= 1")
        seeds = [seed + r for r in range(rounds)]
        if scheme == BASELINE:
            aps = {sd: self.baseline_ap for sd in seeds}
            diag = {}
        else:
            labels = apply_scheme(self.tracklets, self.scheme_config(scheme, lam))
            diag = self.label_quality(labels)
            pool = self.target_pool(labels)
            if not pool:
                raise ValueError(f"scheme {scheme} produced no pseudo-labels")
            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as ex:
                    aps = dict(zip(seeds, ex.map(lambda sd: self.run_round(pool, sd), seeds)))
            else:
                aps = {sd: self.run_round(pool, sd) for sd in seeds}
        values = np.array([aps[sd] for sd in seeds])
        return ExperimentResult(scheme, lam if scheme == "label-smooth" else None, aps,
                                float(values.mean()), float(values.std()), diag)


def run_experiment(
    scenario: Scenario,
    scheme: str,
    rounds: int = 5,
    seed: int = 0,
    lam: Optional[float] = None,
    settings: ExperimentSettings = ExperimentSettings(),
) -> ExperimentResult:
    return Pipeline(scenario, settings).run(scheme, rounds, seed, lam)
