"""Line-delimited JSON readers and writers with strict validation.

Every reader accepts a string, an open text file or any iterable of lines.
Blank lines are ignored; any other bad line raises :class:`ParseError`
carrying its 1-based line number. Floats are written with ``repr`` (shortest
round-trip form) so parse(serialize(x)) is bit-exact.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Iterator, Sequence, TextIO, Union

from .core import BoundingBox, Detection, FrameRef, GroundTruthBox, ValidationError
from .pseudolabel import PseudoLabel
from .tracklet import TrackEntry, Tracklet

Source = Union[str, TextIO, Iterable[str]]


class ParseError(ValidationError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _lines(source: Source) -> Iterator[tuple[int, str]]:
    if isinstance(source, str):
        # not splitlines(): that also breaks on \x85 and friends inside strings
        source = source.split("\n")
    for lineno, line in enumerate(source, start=1):
        if line.strip():
            yield lineno, line


def _objects(source: Source) -> Iterator[tuple[int, dict]]:
    for lineno, line in _lines(source):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"malformed JSON ({exc.msg})") from None
        if not isinstance(obj, dict):
            raise ParseError(lineno, "expected a JSON object")
        yield lineno, obj


def _require(obj: dict, key: str):
    if key not in obj:
        raise ValidationError(f"missing field {key!r}")
    return obj[key]


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{name} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite")
    return value


def _integer(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    return value


def _string(value, name: str) -> str:
    if not isinstance(value, str):
        raise ValidationError(f"{name} must be a string, got {value!r}")
    return value


def _box(value) -> BoundingBox:
    if not isinstance(value, list) or len(value) != 4:
        raise ValidationError(f"bbox must be [x, y, w, h], got {value!r}")
    return BoundingBox(*(_number(v, "bbox") for v in value))


def _frame(obj: dict) -> FrameRef:
    return FrameRef(_string(_require(obj, "video"), "video"), _integer(_require(obj, "frame"), "frame"))


def _score(value, name: str = "score") -> float:
    v = _number(value, name)
    if not 0.0 <= v <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1], got {v!r}")
    return v


def _wrap(lineno: int, build, obj):
    try:
        return build(obj)
    except ValidationError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(lineno, str(exc)) from None
    except TypeError as exc:
        raise ParseError(lineno, str(exc)) from None


def _detection(obj: dict) -> Detection:
    return Detection(_frame(obj), _box(_require(obj, "bbox")), _score(_require(obj, "score")))


def _ground_truth(obj: dict) -> GroundTruthBox:
    tags = obj.get("tags", [])
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise ValidationError("tags must be an array of strings")
    return GroundTruthBox(_frame(obj), _box(_require(obj, "bbox")), frozenset(tags))


def _pseudolabel(obj: dict) -> PseudoLabel:
    score = obj.get("score")
    return PseudoLabel(
        frame=_frame(obj),
        box=_box(_require(obj, "bbox")),
        origin=_string(_require(obj, "origin"), "origin"),
        detector_score=None if score is None else _score(score),
        tracklet_id=_integer(_require(obj, "tracklet_id"), "tracklet_id"),
        hard_label=_number(_require(obj, "hard_label"), "hard_label"),
        soft_score=_number(_require(obj, "soft_score"), "soft_score"),
        soft_label=_number(_require(obj, "soft_label"), "soft_label"),
    )


def _tracklet(obj: dict) -> Tracklet:
    video = _string(_require(obj, "video"), "video")
    entries = _require(obj, "entries")
    if not isinstance(entries, list):
        raise ValidationError("entries must be an array")
    out = []
    for e in entries:
        if not isinstance(e, dict):
            raise ValidationError("each entry must be an object")
        score = e.get("score")
        out.append(
            TrackEntry(
                _integer(_require(e, "frame"), "frame"),
                _box(_require(e, "bbox")),
                _string(_require(e, "origin"), "origin"),
                None if score is None else _score(score),
            )
        )
    return Tracklet(_integer(_require(obj, "id"), "id"), video, tuple(out))


def _frame_sort(records: list) -> list:
    return sorted(records, key=lambda r: (r.frame.video_id, r.frame.frame_index))


def iter_detections(source: Source) -> Iterator[Detection]:
    """Stream detections in file order."""
    for lineno, obj in _objects(source):
        yield _wrap(lineno, _detection, obj)


def parse_detections(source: Source) -> list[Detection]:
    """All detections, sorted by (video, frame, line order)."""
    return _frame_sort(list(iter_detections(source)))


def iter_ground_truth(source: Source) -> Iterator[GroundTruthBox]:
    for lineno, obj in _objects(source):
        yield _wrap(lineno, _ground_truth, obj)


def parse_ground_truth(source: Source) -> list[GroundTruthBox]:
    return _frame_sort(list(iter_ground_truth(source)))


def iter_pseudolabels(source: Source) -> Iterator[PseudoLabel]:
    for lineno, obj in _objects(source):
        yield _wrap(lineno, _pseudolabel, obj)


def parse_pseudolabels(source: Source) -> list[PseudoLabel]:
    return _frame_sort(list(iter_pseudolabels(source)))


def parse_tracklets(source: Source) -> list[Tracklet]:
    return [_wrap(lineno, _tracklet, obj) for lineno, obj in _objects(source)]


def parse_scores(source: Source) -> list[float]:
    """Scores from a detection-style file or a file of bare numbers, one per line."""
    out = []
    for lineno, line in _lines(source):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"malformed line ({exc.msg})") from None
        if isinstance(obj, dict):
            out.append(_wrap(lineno, lambda o: _score(_require(o, "score")), obj))
        else:
            out.append(_wrap(lineno, _score, obj))
    return out


def _dump(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def _frame_fields(frame: FrameRef, box: BoundingBox) -> dict:
    return {"video": frame.video_id, "frame": frame.frame_index, "bbox": box.as_list()}


def detection_line(d: Detection) -> str:
    return _dump({**_frame_fields(d.frame, d.box), "score": d.score})


def ground_truth_line(g: GroundTruthBox) -> str:
    return _dump({**_frame_fields(g.frame, g.box), "tags": sorted(g.tags)})


def pseudolabel_line(p: PseudoLabel) -> str:
    return _dump(
        {
            **_frame_fields(p.frame, p.box),
            "score": p.detector_score,
            "origin": p.origin,
            "tracklet_id": p.tracklet_id,
            "hard_label": p.hard_label,
            "soft_score": p.soft_score,
            "soft_label": p.soft_label,
        }
    )


def tracklet_line(t: Tracklet) -> str:
    entries = []
    for e in t.entries:
        entry = {"frame": e.frame_index, "bbox": e.box.as_list(), "origin": e.origin}
        if e.score is not None:
            entry["score"] = e.score
        entries.append(entry)
    return _dump({"id": t.id, "video": t.video_id, "entries": entries})


def _join(lines: Iterable[str]) -> str:
    return "".join(line + "\n" for line in lines)


def serialize_detections(detections: Sequence[Detection]) -> str:
    return _join(detection_line(d) for d in detections)


def serialize_ground_truth(truth: Sequence[GroundTruthBox]) -> str:
    return _join(ground_truth_line(g) for g in truth)


def serialize_pseudolabels(labels: Sequence[PseudoLabel]) -> str:
    return _join(pseudolabel_line(p) for p in labels)


def serialize_tracklets(tracklets: Sequence[Tracklet]) -> str:
    return _join(tracklet_line(t) for t in tracklets)
