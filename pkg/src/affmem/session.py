"""Immutable session model: validation, conversation segments, snippet lookup.

A session is a recorded social interaction: timestamped transcript sentences,
a stream of affective annotation frames, optional physiological frames, and
user annotations marking conversation boundaries. All timestamps are float
seconds from session start. Sessions are frozen after validation; every
operation here is a pure function.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .embeddings import tokenize
from .errors import DataError, DataWarning, EmptyTranscript

EMOTION_KEYS = ("happiness", "sadness", "fear", "disgust", "anger", "surprise", "neutral")

ANNOTATION_KINDS = ("conversation_start", "conversation_end", "note")

# Raw emotion vectors whose sum strays further than this from 1 are dropped.
EMOTION_SUM_TOLERANCE = 0.02

HR_RANGE = (20.0, 250.0)
RR_RANGE = (2.0, 60.0)


@dataclass(frozen=True)
class TranscriptSentence:
    index: int
    t_start: float
    t_end: float
    text: str
    non_lexical: bool = False

    @property
    def midpoint(self) -> float:
        return (self.t_start + self.t_end) / 2.0


@dataclass(frozen=True)
class AffectFrame:
    t: float
    emotions: Mapping[str, float]
    engagement: float | None = None
    eye_contact: float | None = None
    openness: float | None = None


@dataclass(frozen=True)
class PhysioFrame:
    t: float
    hr: float | None = None
    rr: float | None = None


@dataclass(frozen=True)
class Annotation:
    t: float
    kind: str
    text: str | None = None


@dataclass(frozen=True)
class Snippet:
    """Sentences around a moment: all midpoints within center_t +/- radius,
    or the single nearest sentence when none fall inside."""

    sentences: tuple[TranscriptSentence, ...]
    center_t: float
    radius: float

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)


@dataclass(frozen=True)
class Session:
    id: str
    duration: float
    label: str | None = None
    sentences: tuple[TranscriptSentence, ...] = ()
    affect: tuple[AffectFrame, ...] = ()
    physio: tuple[PhysioFrame, ...] | None = None
    annotations: tuple[Annotation, ...] = ()
    external_embeddings: tuple[tuple[float, ...], ...] | None = field(default=None)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DataError(msg)


def _number(value: Any, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DataError(f"{what}: expected a number, got {value!r}")
    f = float(value)
    if not math.isfinite(f):
        raise DataError(f"{what}: non-finite value {value!r}")
    return f


def _opt_unit(value: Any, what: str) -> float | None:
    if value is None:
        return None
    f = _number(value, what)
    _require(0.0 <= f <= 1.0, f"{what}: {f} outside [0, 1]")
    return f


def _in_session(t: float, duration: float, what: str) -> float:
    _require(0.0 <= t <= duration, f"{what}: timestamp {t} outside [0, {duration}]")
    return t


def _renormalize(emotions: dict[str, float]) -> dict[str, float]:
    """Scale an emotion vector so its float sum is exactly 1.0.

    After dividing by the raw sum the residual is folded into the largest
    coordinate, repeating in case rounding moves the sum off 1.0 again.
    """
    total = sum(emotions[k] for k in EMOTION_KEYS)
    out = {k: emotions[k] / total for k in EMOTION_KEYS}
    for _ in range(10):
        s = sum(out[k] for k in EMOTION_KEYS)
        if s == 1.0:
            break
        largest = max(EMOTION_KEYS, key=lambda k: out[k])
        out[largest] += 1.0 - s
    return out


def _validate_sentence(rec: Mapping[str, Any], pos: int, expect_index: int, duration: float) -> TranscriptSentence:
    what = f"sentence {pos}"
    for key in ("i", "t0", "t1", "text"):
        _require(key in rec, f"{what}: missing field {key!r}")
    idx = rec["i"]
    _require(isinstance(idx, int) and not isinstance(idx, bool), f"{what}: index must be an integer")
    _require(idx == expect_index, f"{what}: non-monotonic sentence indices (expected {expect_index}, got {idx})")
    t0 = _in_session(_number(rec["t0"], f"{what}.t0"), duration, f"{what}.t0")
    t1 = _in_session(_number(rec["t1"], f"{what}.t1"), duration, f"{what}.t1")
    _require(t0 <= t1, f"{what}: t_start {t0} > t_end {t1}")
    text = rec["text"]
    _require(isinstance(text, str) and text != "", f"{what}: text must be a non-empty string")
    return TranscriptSentence(
        index=idx, t_start=t0, t_end=t1, text=text, non_lexical=not tokenize(text)
    )


def _validate_affect(records: Sequence[Mapping[str, Any]], duration: float) -> tuple[AffectFrame, ...]:
    frames: list[AffectFrame] = []
    dropped = 0
    prev_t = None
    for pos, rec in enumerate(records):
        what = f"affect frame {pos}"
        _require("t" in rec and "emotions" in rec, f"{what}: missing field 't' or 'emotions'")
        t = _in_session(_number(rec["t"], f"{what}.t"), duration, f"{what}.t")
        _require(prev_t is None or t > prev_t, f"{what}: timestamps not strictly increasing")
        prev_t = t
        emotions = rec["emotions"]
        _require(isinstance(emotions, Mapping), f"{what}: emotions must be a mapping")
        _require(
            set(emotions.keys()) == set(EMOTION_KEYS),
            f"{what}: emotions must have exactly the keys {sorted(EMOTION_KEYS)}",
        )
        parsed = {}
        for k in EMOTION_KEYS:
            v = _number(emotions[k], f"{what}.emotions.{k}")
            _require(0.0 <= v <= 1.0, f"{what}.emotions.{k}: {v} outside [0, 1]")
            parsed[k] = v
        total = sum(parsed[k] for k in EMOTION_KEYS)
        if abs(total - 1.0) > EMOTION_SUM_TOLERANCE:
            warnings.warn(
                f"{what}: emotion sum {total:.4f} outside tolerance, frame dropped",
                DataWarning,
                stacklevel=3,
            )
            dropped += 1
            continue
        frames.append(
            AffectFrame(
                t=t,
                emotions=_renormalize(parsed),
                engagement=_opt_unit(rec.get("engagement"), f"{what}.engagement"),
                eye_contact=_opt_unit(rec.get("eye_contact"), f"{what}.eye_contact"),
                openness=_opt_unit(rec.get("openness"), f"{what}.openness"),
            )
        )
    if records and dropped * 2 > len(records):
        raise DataError(
            f"emotion sum outside tolerance on {dropped} of {len(records)} affect frames (more than 50%)"
        )
    return tuple(frames)


def _validate_physio(records: Sequence[Mapping[str, Any]], duration: float) -> tuple[PhysioFrame, ...]:
    frames: list[PhysioFrame] = []
    prev_t = None
    for pos, rec in enumerate(records):
        what = f"physio frame {pos}"
        _require("t" in rec, f"{what}: missing field 't'")
        t = _in_session(_number(rec["t"], f"{what}.t"), duration, f"{what}.t")
        _require(prev_t is None or t > prev_t, f"{what}: timestamps not strictly increasing")
        prev_t = t
        hr = rec.get("hr")
        rr = rec.get("rr")
        hr = None if hr is None else _number(hr, f"{what}.hr")
        rr = None if rr is None else _number(rr, f"{what}.rr")
        bad_hr = hr is not None and not (HR_RANGE[0] <= hr <= HR_RANGE[1])
        bad_rr = rr is not None and not (RR_RANGE[0] <= rr <= RR_RANGE[1])
        if bad_hr or bad_rr:
            warnings.warn(
                f"{what}: value outside physiological range, frame dropped", DataWarning, stacklevel=3
            )
            continue
        frames.append(PhysioFrame(t=t, hr=hr, rr=rr))
    return tuple(frames)


def _validate_annotations(records: Sequence[Mapping[str, Any]], duration: float) -> tuple[Annotation, ...]:
    anns: list[Annotation] = []
    for pos, rec in enumerate(records):
        what = f"annotation {pos}"
        _require("t" in rec and "kind" in rec, f"{what}: missing field 't' or 'kind'")
        t = _in_session(_number(rec["t"], f"{what}.t"), duration, f"{what}.t")
        kind = rec["kind"]
        _require(kind in ANNOTATION_KINDS, f"{what}: unknown kind {kind!r}")
        text = rec.get("text")
        _require(text is None or isinstance(text, str), f"{what}: text must be a string")
        anns.append(Annotation(t=t, kind=kind, text=text))
    # Stable by time; simultaneous annotations keep input order.
    anns.sort(key=lambda a: a.t)
    return tuple(anns)


def _validate_embeddings(records: Sequence[Mapping[str, Any]], n_sentences: int) -> tuple[tuple[float, ...], ...]:
    _require(
        len(records) == n_sentences,
        f"embeddings: {len(records)} vectors for {n_sentences} sentences",
    )
    vectors: list[tuple[float, ...]] = []
    dim = None
    for pos, rec in enumerate(records):
        what = f"embedding {pos}"
        _require("i" in rec and "v" in rec, f"{what}: missing field 'i' or 'v'")
        _require(rec["i"] == pos, f"{what}: indices must be 0..{n_sentences - 1} in order")
        v = rec["v"]
        _require(isinstance(v, Sequence) and not isinstance(v, (str, bytes)), f"{what}: v must be a list")
        vec = tuple(_number(x, f"{what}.v[{j}]") for j, x in enumerate(v))
        _require(len(vec) >= 1, f"{what}: empty vector")
        if dim is None:
            dim = len(vec)
        _require(len(vec) == dim, f"{what}: dimension {len(vec)} != {dim}")
        vectors.append(vec)
    return tuple(vectors)


def session_to_raw(session: Session) -> dict[str, Any]:
    """Rebuild the raw bundle mapping for a validated session."""
    raw: dict[str, Any] = {
        "id": session.id,
        "label": session.label,
        "duration": session.duration,
        "sentences": [
            {"i": s.index, "t0": s.t_start, "t1": s.t_end, "text": s.text} for s in session.sentences
        ],
        "affect": [
            {
                "t": f.t,
                "emotions": dict(f.emotions),
                **({"engagement": f.engagement} if f.engagement is not None else {}),
                **({"eye_contact": f.eye_contact} if f.eye_contact is not None else {}),
                **({"openness": f.openness} if f.openness is not None else {}),
            }
            for f in session.affect
        ],
        "annotations": [
            {"t": a.t, "kind": a.kind, **({"text": a.text} if a.text is not None else {})}
            for a in session.annotations
        ],
    }
    if session.physio is not None:
        raw["physio"] = [
            {
                "t": f.t,
                **({"hr": f.hr} if f.hr is not None else {}),
                **({"rr": f.rr} if f.rr is not None else {}),
            }
            for f in session.physio
        ]
    if session.external_embeddings is not None:
        raw["embeddings"] = [
            {"i": i, "v": list(v)} for i, v in enumerate(session.external_embeddings)
        ]
    return raw


def validate_session(raw: Mapping[str, Any] | Session) -> Session:
    """Validate a parsed bundle and freeze it into a Session.

    Emotion vectors with raw sum within 0.02 of 1 are renormalized to sum
    exactly 1; frames further out are dropped with a warning, and more than
    50% dropped is a DataError. Physio frames outside plausible hr/rr ranges
    are dropped with a warning. Idempotent: validating a valid Session gives
    an equal Session.
    """
    if isinstance(raw, Session):
        raw = session_to_raw(raw)

    _require("id" in raw and "duration" in raw, "session: missing field 'id' or 'duration'")
    sid = raw["id"]
    _require(isinstance(sid, str) and sid != "", "session: id must be a non-empty string")
    duration = _number(raw["duration"], "session.duration")
    _require(duration >= 0.0, f"session.duration: {duration} is negative")
    label = raw.get("label")
    _require(label is None or isinstance(label, str), "session.label: must be a string")

    sentence_recs = raw.get("sentences", [])
    sentences = tuple(
        _validate_sentence(rec, pos, pos, duration) for pos, rec in enumerate(sentence_recs)
    )
    for a, b in zip(sentences, sentences[1:]):
        _require(
            a.t_start <= b.t_start,
            f"sentence {b.index}: start time {b.t_start} before previous start {a.t_start}",
        )

    affect = _validate_affect(raw.get("affect", []), duration)
    physio_recs = raw.get("physio")
    physio = None if physio_recs is None else _validate_physio(physio_recs, duration)
    annotations = _validate_annotations(raw.get("annotations", []), duration)
    embedding_recs = raw.get("embeddings")
    external = None if embedding_recs is None else _validate_embeddings(embedding_recs, len(sentences))

    return Session(
        id=sid,
        duration=duration,
        label=label,
        sentences=sentences,
        affect=affect,
        physio=physio,
        annotations=annotations,
        external_embeddings=external,
    )


def conversation_segments(session: Session) -> list[tuple[float, float]]:
    """Pair conversation_start/_end markers into non-overlapping intervals.

    With no markers at all the whole session is one segment. An unmatched
    start closes at session end; an unmatched end opens at the start of the
    unsegmented region (session start, or the close of the previous segment).
    Redundant starts inside an open conversation are ignored. All degenerate
    inputs warn rather than error.
    """
    markers = [a for a in session.annotations if a.kind in ("conversation_start", "conversation_end")]
    if not markers:
        return [(0.0, session.duration)]

    segments: list[tuple[float, float]] = []
    open_t: float | None = None
    cursor = 0.0  # end of the last emitted segment
    for m in markers:
        if m.kind == "conversation_start":
            if open_t is None:
                open_t = max(m.t, cursor)
            else:
                warnings.warn(
                    f"conversation_start at {m.t} inside an open conversation ignored",
                    DataWarning,
                    stacklevel=2,
                )
        else:
            if open_t is not None:
                segments.append((open_t, max(m.t, open_t)))
                cursor = max(m.t, open_t)
                open_t = None
            else:
                warnings.warn(
                    f"unmatched conversation_end at {m.t} opens at {cursor}",
                    DataWarning,
                    stacklevel=2,
                )
                if m.t >= cursor:
                    segments.append((cursor, m.t))
                    cursor = m.t
    if open_t is not None:
        warnings.warn(
            f"unmatched conversation_start at {open_t} closes at session end",
            DataWarning,
            stacklevel=2,
        )
        segments.append((open_t, session.duration))
    return segments


def snippet_at(session: Session, t: float, radius: float) -> Snippet:
    """Sentences whose midpoint falls within t +/- radius, in index order.

    Falls back to the single sentence with the nearest midpoint (ties to the
    lower index) when the window is empty.
    """
    if not session.sentences:
        raise EmptyTranscript(f"session {session.id!r} has no sentences")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    inside = [s for s in session.sentences if t - radius <= s.midpoint <= t + radius]
    if not inside:
        nearest = min(session.sentences, key=lambda s: (abs(s.midpoint - t), s.index))
        inside = [nearest]
    return Snippet(sentences=tuple(inside), center_t=t, radius=radius)
