"""Command-line entry point: one subcommand per pipeline stage.

Every subcommand prints a one-line JSON summary on stdout. Exit status is 0 on
success, 1 when inputs fail validation and 2 on usage errors. Set
``SELFADAPT_LOG`` (DEBUG, INFO, ...) for progress messages on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from typing import Optional, Sequence

from . import __version__, ingest
from .core import ValidationError
from .evaluate import average_precision_50
from .pseudolabel import SCHEMES, ConfigError, SchemeConfig, apply_scheme, apply_scheme_to_detections
from .remap import SOURCE, TARGET, auto_threshold, build_empirical_cdf, remap_table
from .tracklet import DEFAULT_LINK_IOU, DEFAULT_MIN_LEN, DETECTOR, link_videos, prune_tracklets

log = logging.getLogger("selfadapt")

DEFAULT_LAMBDA = 0.5
LOG_ENV = "SELFADAPT_LOG"


class UsageError(Exception):
    """Flag combination argparse cannot express; reported with exit status 2."""


# ------------------------------------------------------------------ helpers


def _read(path: str) -> list[str]:
    with open(path, encoding="utf-8") as f:
        return f.read().splitlines()


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _emit(summary: dict) -> None:
    sys.stdout.write(json.dumps(_json_safe(summary), sort_keys=True, allow_nan=False) + "\n")
    sys.stdout.flush()


def _unit_open(name: str):
    def parse(text: str) -> float:
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}") from None
        if not 0.0 < v < 1.0:
            raise argparse.ArgumentTypeError(f"{name} must lie strictly between 0 and 1, got {v}")
        return v

    return parse


def _unit_closed(name: str):
    def parse(text: str) -> float:
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}") from None
        if not 0.0 <= v <= 1.0:
            raise argparse.ArgumentTypeError(f"{name} must lie in [0, 1], got {v}")
        return v

    return parse


def _positive_int(name: str):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}") from None
        if v < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1, got {v}")
        return v

    return parse


# ------------------------------------------------------------------ subcommands


def cmd_track(args) -> dict:
    dets = ingest.parse_detections(_read(args.input))
    linked = link_videos(dets, args.link_iou, args.theta, threads=args.threads)
    kept = prune_tracklets(linked, args.min_len)
    _write_text(args.out, ingest.serialize_tracklets(kept))
    entries = [e for t in kept for e in t.entries]
    n_det = sum(e.origin == DETECTOR for e in entries)
    log.info("linked %d tracklets, kept %d", len(linked), len(kept))
    return {
        "command": "track",
        "detections": len(dets),
        "tracklets_linked": len(linked),
        "tracklets_kept": len(kept),
        "entries": len(entries),
        "detector_entries": n_det,
        "tracker_entries": len(entries) - n_det,
        "theta": args.theta,
        "link_iou": args.link_iou,
        "min_len": args.min_len,
        "out": args.out,
    }


def _pseudolabel_plan(args) -> Optional[float]:
    """Check flag combinations before touching any file; returns lambda."""
    if (args.input is None) == (args.dets is None):
        raise UsageError("give exactly one of --in (tracklets) or --dets (detections)")
    if args.dets is not None and not args.no_tracklet_filter:
        raise UsageError("--dets needs --no-tracklet-filter; use --in with a tracklet file otherwise")
    if args.no_tracklet_filter and args.scheme != "det":
        raise ConfigError("--no-tracklet-filter only applies to --scheme det")
    lam = args.lam
    if args.scheme == "label-smooth" and lam is None:
        lam = DEFAULT_LAMBDA
    if args.scheme != "label-smooth" and lam is not None:
        raise ConfigError(f"--lambda only applies to --scheme label-smooth, not {args.scheme}")
    if args.scheme == "score-remap":
        missing = [f for f, v in (("--source-scores", args.source_scores), ("--target-scores", args.target_scores)) if v is None]
        if missing:
            raise ConfigError(f"score-remap needs {' and '.join(missing)}")
    elif args.source_scores is not None or args.target_scores is not None:
        raise ConfigError(f"--source-scores/--target-scores only apply to --scheme score-remap, not {args.scheme}")
    return lam


def cmd_pseudolabel(args) -> dict:
    lam = _pseudolabel_plan(args)
    source_cdf = target_cdf = None
    if args.scheme == "score-remap":
        src = [s for s in ingest.parse_scores(_read(args.source_scores)) if s >= args.theta]
        tgt = [s for s in ingest.parse_scores(_read(args.target_scores)) if s >= args.theta]
        if not src or not tgt:
            which = "--source-scores" if not src else "--target-scores"
            raise ValidationError(f"{which} holds no score >= theta {args.theta}")
        source_cdf, target_cdf = build_empirical_cdf(src, SOURCE), build_empirical_cdf(tgt, TARGET)
    config = SchemeConfig(args.scheme, args.theta, lam, source_cdf, target_cdf)

    if args.dets is not None:
        labels = apply_scheme_to_detections(ingest.parse_detections(_read(args.dets)), config)
    else:
        labels = apply_scheme(ingest.parse_tracklets(_read(args.input)), config)
    _write_text(args.out, ingest.serialize_pseudolabels(labels))
    n_det = sum(p.origin == DETECTOR for p in labels)
    soft = [p.soft_label for p in labels]
    return {
        "command": "pseudolabel",
        "scheme": args.scheme,
        "theta": args.theta,
        "lambda": config.interpolation if args.scheme == "label-smooth" else None,
        "interpolation": config.interpolation,
        "tracklet_filter": args.dets is None,
        "labels": len(labels),
        "detector_labels": n_det,
        "tracker_labels": len(labels) - n_det,
        "mean_soft_label": sum(soft) / len(soft) if soft else None,
        "out": args.out,
    }


def cmd_remap(args) -> dict:
    src = [s for s in ingest.parse_scores(_read(args.source_scores)) if s >= args.min_score]
    tgt = [s for s in ingest.parse_scores(_read(args.target_scores)) if s >= args.min_score]
    if not src or not tgt:
        which = "--source-scores" if not src else "--target-scores"
        raise ValidationError(f"{which} holds no score >= {args.min_score}")
    table = remap_table(build_empirical_cdf(tgt, TARGET), build_empirical_cdf(src, SOURCE))
    _write_csv(args.out, ("x", "remapped"), ((f"{x:.2f}", repr(y)) for x, y in table))
    return {
        "command": "remap",
        "source_samples": len(src),
        "target_samples": len(tgt),
        "min_score": args.min_score,
        "points": len(table),
        "out": args.out,
    }


def cmd_auto_threshold(args) -> dict:
    src = ingest.parse_detections(_read(args.source_dets))
    gt = ingest.parse_ground_truth(_read(args.source_gt))
    tgt = ingest.parse_detections(_read(args.target_dets))
    if not src:
        raise ValidationError("--source-dets holds no detections")
    result = auto_threshold(src, gt, tgt, args.precision, args.iou, args.min_score)
    return {
        "command": "auto-threshold",
        "theta_source": result.theta_source,
        "theta_target": result.theta_target,
        "precision": result.precision,
        "achieved_precision": result.achieved_precision,
        "reachable": not math.isnan(result.achieved_precision),
    }


def cmd_eval(args) -> dict:
    dets = ingest.parse_detections(_read(args.dets))
    gt = ingest.parse_ground_truth(_read(args.gt))
    report = average_precision_50(dets, gt, group_by_tags=args.group_by_tags, iou_thresh=args.iou)
    if not report.groups:
        raise ValidationError("no ground truth to evaluate against")
    if args.csv:
        _write_csv(args.csv, ("group", "ap", "num_gt", "num_detections"),
                   ((g.group, repr(g.ap), g.num_gt, g.num_detections) for g in report.groups.values()))
    return {"command": "eval", "group_by_tags": args.group_by_tags, **report.to_dict()}


def cmd_sim(args) -> dict:
    from .sim import ExperimentSettings, Pipeline, ScenarioConfig, SIM_SCHEMES, generate_scenario

    if args.scheme not in SIM_SCHEMES:
        raise ConfigError(f"unknown scheme {args.scheme!r}; choose from {', '.join(SIM_SCHEMES)}")
    lam = args.lam
    if args.scheme == "label-smooth" and lam is None:
        lam = DEFAULT_LAMBDA
    if args.scheme != "label-smooth" and lam is not None:
        raise ConfigError(f"--lambda only applies to --scheme label-smooth, not {args.scheme}")
    settings = ExperimentSettings(theta=args.theta, link_iou=args.link_iou, min_len=args.min_len)
    config = ScenarioConfig.from_json(args.config) if args.config else ScenarioConfig()

    t0 = time.perf_counter()
    pipeline = Pipeline(generate_scenario(config), settings)
    result = pipeline.run(args.scheme, rounds=args.rounds, seed=args.seed, lam=lam, threads=args.threads)
    log.info("sim %s done in %.1fs", args.scheme, time.perf_counter() - t0)
    if args.csv:
        _write_csv(args.csv, ("seed", "ap"), ((s, repr(a)) for s, a in result.per_seed_ap.items()))
    out = {"command": "sim", "baseline_ap": pipeline.baseline_ap, **result.to_dict()}
    if args.out:
        _write_text(args.out, json.dumps(_json_safe(out), sort_keys=True, indent=2) + "\n")
    return out


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="selfadapt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    theta = dict(type=_unit_open("--theta"), default=0.5, help="detector confidence threshold (default 0.5)")
    threads = dict(type=_positive_int("--threads"), default=1, help="worker threads (default 1)")

    t = sub.add_parser("track", help="link detections into tracklets and prune short ones")
    t.add_argument("--in", dest="input", required=True, metavar="DETS", help="detections JSONL")
    t.add_argument("--out", required=True, help="tracklets JSONL to write")
    t.add_argument("--theta", **theta)
    t.add_argument("--link-iou", type=_unit_open("--link-iou"), default=DEFAULT_LINK_IOU)
    t.add_argument("--min-len", type=_positive_int("--min-len"), default=DEFAULT_MIN_LEN)
    t.add_argument("--threads", **threads)
    t.set_defaults(func=cmd_track)

    q = sub.add_parser("pseudolabel", help="turn tracklets (or raw detections) into pseudo-labels")
    q.add_argument("--in", dest="input", metavar="TRACKLETS", help="tracklets JSONL")
    q.add_argument("--dets", help="detections JSONL, only with --no-tracklet-filter")
    q.add_argument("--no-tracklet-filter", action="store_true",
                   help="det scheme over raw detections, keeping isolated boxes")
    q.add_argument("--scheme", required=True, choices=SCHEMES)
    q.add_argument("--theta", **theta)
    q.add_argument("--lambda", dest="lam", type=_unit_closed("--lambda"),
                   help=f"label-smooth interpolation weight (default {DEFAULT_LAMBDA})")
    q.add_argument("--source-scores", help="source detection scores, for score-remap")
    q.add_argument("--target-scores", help="target detection scores, for score-remap")
    q.add_argument("--out", required=True, help="pseudo-labels JSONL to write")
    q.set_defaults(func=cmd_pseudolabel)

    r = sub.add_parser("remap", help="write the 101-point target-to-source score mapping as CSV")
    r.add_argument("--source-scores", required=True)
    r.add_argument("--target-scores", required=True)
    r.add_argument("--min-score", type=_unit_closed("--min-score"), default=0.5,
                   help="only scores at or above this feed the distributions (default 0.5)")
    r.add_argument("--out", required=True, help="CSV to write")
    r.set_defaults(func=cmd_remap)

    a = sub.add_parser("auto-threshold", help="pick theta at a source precision and transfer it")
    a.add_argument("--source-dets", required=True)
    a.add_argument("--source-gt", required=True)
    a.add_argument("--target-dets", required=True)
    a.add_argument("--precision", type=_unit_closed("--precision"), default=0.95)
    a.add_argument("--iou", type=_unit_open("--iou"), default=0.5)
    a.add_argument("--min-score", type=_unit_closed("--min-score"), default=0.0,
                   help="only scores at or above this feed the distributions (default 0)")
    a.set_defaults(func=cmd_auto_threshold)

    e = sub.add_parser("eval", help="AP@0.5, overall or per tag")
    e.add_argument("--dets", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--group-by-tags", action="store_true")
    e.add_argument("--iou", type=_unit_open("--iou"), default=0.5)
    e.add_argument("--csv", help="also write the per-group table here")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sim", help="run one scheme end to end on the synthetic world")
    s.add_argument("--config", help="scenario JSON; defaults when omitted")
    s.add_argument("--scheme", required=True, help="baseline or a pseudo-label scheme")
    s.add_argument("--rounds", type=_positive_int("--rounds"), default=5)
    s.add_argument("--seed", type=int, default=0, help="seed of the first re-training round")
    s.add_argument("--lambda", dest="lam", type=_unit_closed("--lambda"))
    s.add_argument("--theta", **theta)
    s.add_argument("--link-iou", type=_unit_open("--link-iou"), default=DEFAULT_LINK_IOU)
    s.add_argument("--min-len", type=_positive_int("--min-len"), default=DEFAULT_MIN_LEN)
    s.add_argument("--threads", **threads)
    s.add_argument("--csv", help="per-round AP table to write")
    s.add_argument("--out", help="also write the result JSON here")
    s.set_defaults(func=cmd_sim)
    return p


def _configure_logging() -> None:
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _emit(args.func(args))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"selfadapt {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, ConfigError, ValueError, OSError) as exc:
        print(f"selfadapt {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
