"""Score object model: notes, bars, instruments and the piece itself.

All objects are frozen dataclasses. Operations return new objects rather
than mutating, so scores can be shared freely between threads.

Bars are derived data. They are recomputed by :func:`group_notes_into_bars`,
excluded from equality and never serialized.
"""
import json
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from .errors import RangeError, SchemaError
from .rhythm import bar_length_ticks, quantize, ticks_to_seconds

__all__ = [
    "DEFAULT_TPQN",
    "DEFAULT_BPM",
    "TimeSignature",
    "TempoEvent",
    "Note",
    "Bar",
    "Instrument",
    "Score",
    "pitch_to_name",
    "bar_frames",
    "group_notes_into_bars",
    "retime",
    "quantize_score",
    "to_json",
    "from_json",
    "to_dict",
    "from_dict",
]

DEFAULT_TPQN = 96
DEFAULT_BPM = 120.0

NOTE_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")
VALID_DENOMINATORS = (1, 2, 4, 8, 16, 32)


def pitch_to_name(pitch):
    """Sharp spelling with octave number, middle C (60) being ``"C4"``.

    >>> pitch_to_name(61)
    'C#4'
    >>> pitch_to_name(0)
    'C-1'
    """
    if isinstance(pitch, bool) or not isinstance(pitch, int) or not 0 <= pitch <= 127:
        raise RangeError(f"pitch must be an integer in 0-127, got {pitch!r}")
    return f"{NOTE_NAMES[pitch % 12]}{pitch // 12 - 1}"


@dataclass(frozen=True)
class TimeSignature:
    numerator: int = 4
    denominator: int = 4

    def __post_init__(self):
        if self.numerator < 1:
            raise ValueError("time signature numerator must be >= 1")
        if self.denominator not in VALID_DENOMINATORS:
            raise ValueError(f"time signature denominator must be one of {VALID_DENOMINATORS}")

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"


@dataclass(frozen=True)
class TempoEvent:
    tick: int
    bpm: float

    def __post_init__(self):
        if self.tick < 0 or not self.bpm > 0:
            raise ValueError(f"invalid tempo event ({self.tick}, {self.bpm})")


@dataclass(frozen=True)
class Note:
    """A pitched event.

    ``pitch_name`` is filled in from ``pitch`` when left empty. The second
    fields are whatever the caller provides; use :func:`retime` to derive
    them from a score's tempo map.
    """

    pitch: int
    start_ticks: int
    end_ticks: int
    velocity: int = 100
    start_sec: float = 0.0
    end_sec: float = 0.0
    pitch_name: str = ""
    is_drum: bool = False

    def __post_init__(self):
        name = pitch_to_name(self.pitch)
        if not self.pitch_name:
            object.__setattr__(self, "pitch_name", name)
        elif self.pitch_name != name:
            raise ValueError(f"pitch_name {self.pitch_name!r} does not match pitch {self.pitch}")
        if self.start_ticks < 0 or self.end_ticks <= self.start_ticks:
            raise ValueError(f"note needs 0 <= start < end, got [{self.start_ticks}, {self.end_ticks})")
        if not 0 <= self.velocity <= 127:
            raise ValueError(f"velocity must be in 0-127, got {self.velocity}")

    @property
    def duration_ticks(self):
        return self.end_ticks - self.start_ticks


def _note_order(note):
    return (note.start_ticks, note.pitch, note.end_ticks, note.velocity)


@dataclass(frozen=True)
class Bar:
    index: int
    time_sig: TimeSignature
    start_ticks: int
    end_ticks: int
    note_refs: Tuple[int, ...] = ()


@dataclass(frozen=True)
class Instrument:
    """Notes of one part, kept in (onset, pitch) order."""

    program: int = 0
    name: str = ""
    is_drum: bool = False
    notes: Tuple[Note, ...] = ()
    bars: Tuple[Bar, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not 0 <= self.program <= 127:
            raise ValueError(f"program must be in 0-127, got {self.program}")
        object.__setattr__(self, "notes", tuple(sorted(self.notes, key=_note_order)))
        object.__setattr__(self, "bars", tuple(self.bars))


@dataclass(frozen=True)
class Score:
    """In-memory form of a piece: resolution, tempo and meter maps, parts.

    ``time_sig_map`` holds ``(tick, TimeSignature)`` pairs.
    """

    tpqn: int = DEFAULT_TPQN
    tempo_map: Tuple[TempoEvent, ...] = (TempoEvent(0, DEFAULT_BPM),)
    time_sig_map: Tuple[Tuple[int, TimeSignature], ...] = ((0, TimeSignature(4, 4)),)
    instruments: Tuple[Instrument, ...] = ()

    def __post_init__(self):
        if self.tpqn <= 0:
            raise ValueError("tpqn must be positive")
        tempo = tuple(sorted(self.tempo_map, key=lambda e: e.tick))
        if not tempo or tempo[0].tick != 0:
            raise ValueError("tempo map must start at tick 0")
        if len({e.tick for e in tempo}) != len(tempo):
            raise ValueError("tempo map ticks must be unique")
        sigs = tuple(sorted(((int(t), ts) for t, ts in self.time_sig_map), key=lambda p: p[0]))
        if not sigs or sigs[0][0] != 0:
            raise ValueError("time signature map must start at tick 0")
        object.__setattr__(self, "tempo_map", tempo)
        object.__setattr__(self, "time_sig_map", sigs)
        object.__setattr__(self, "instruments", tuple(self.instruments))

    @property
    def end_ticks(self):
        """Largest note end over all instruments (0 when there are no notes)."""
        return max((n.end_ticks for inst in self.instruments for n in inst.notes), default=0)

    def notes(self, include_drums=False):
        """All notes of the score in (onset, pitch) order."""
        pool = [n for inst in self.instruments if include_drums or not inst.is_drum for n in inst.notes]
        return sorted(pool, key=_note_order)

    def seconds(self, tick):
        return ticks_to_seconds(tick, self.tempo_map, self.tpqn)


def bar_frames(time_sig_map, tpqn, end_tick, min_bars=0):
    """Tile the timeline into bars.

    Returns ``(start, end, TimeSignature)`` triples covering ``[0, end_tick)``
    with at least ``min_bars`` entries. A time signature change restarts the
    tiling at its tick, cutting short a bar that was still running.
    """
    frames = []
    changes = list(time_sig_map)
    for i, (tick, ts) in enumerate(changes):
        limit = changes[i + 1][0] if i + 1 < len(changes) else None
        length = bar_length_ticks(ts, tpqn)
        start = tick
        while limit is None or start < limit:
            if start >= end_tick and len(frames) >= min_bars:
                return frames
            end = start + length if limit is None else min(start + length, limit)
            frames.append((start, end, ts))
            start = end
    return frames


def _group_instrument(inst, frames):
    refs = [[] for _ in frames]
    starts = [f[0] for f in frames]
    j = 0
    for i, note in enumerate(inst.notes):
        # notes are onset-sorted, so the frame pointer only moves forward
        while j + 1 < len(starts) and starts[j + 1] <= note.start_ticks:
            j += 1
        refs[j].append(i)
    return tuple(
        Bar(index=k, time_sig=ts, start_ticks=s, end_ticks=e, note_refs=tuple(r))
        for k, ((s, e, ts), r) in enumerate(zip(frames, refs))
    )


def group_notes_into_bars(score):
    """Return a copy of ``score`` whose instruments carry their bars.

    Each instrument is tiled up to its own last note end; a note belongs to
    the bar holding its onset, even if it sounds past the barline.
    """
    instruments = []
    for inst in score.instruments:
        if not inst.notes:
            instruments.append(replace(inst, bars=()))
            continue
        end = max(n.end_ticks for n in inst.notes)
        frames = bar_frames(score.time_sig_map, score.tpqn, end)
        instruments.append(replace(inst, bars=_group_instrument(inst, frames)))
    return replace(score, instruments=tuple(instruments))


def retime(score):
    """Recompute every note's second fields from the tempo map."""
    instruments = []
    for inst in score.instruments:
        notes = tuple(
            replace(n, start_sec=score.seconds(n.start_ticks), end_sec=score.seconds(n.end_ticks))
            for n in inst.notes
        )
        instruments.append(replace(inst, notes=notes))
    return replace(score, instruments=tuple(instruments))


# JSON ----------------------------------------------------------------------

def to_dict(score):
    """Plain-dict form of a score with keys in schema order."""
    return {
        "tpqn": score.tpqn,
        "tempo_map": [{"tick": e.tick, "bpm": float(e.bpm)} for e in score.tempo_map],
        "time_sig_map": [
            {"tick": t, "numerator": ts.numerator, "denominator": ts.denominator}
            for t, ts in score.time_sig_map
        ],
        "instruments": [
            {
                "program": inst.program,
                "name": inst.name,
                "is_drum": inst.is_drum,
                "notes": [
                    {
                        "pitch": n.pitch,
                        "start_ticks": n.start_ticks,
                        "end_ticks": n.end_ticks,
                        "start_sec": float(n.start_sec),
                        "end_sec": float(n.end_sec),
                        "velocity": n.velocity,
                        "pitch_name": n.pitch_name,
                    }
                    for n in inst.notes
                ],
            }
            for inst in score.instruments
        ],
    }


def to_json(score, indent: Optional[int] = None):
    """Serialize a score to a deterministic JSON document."""
    separators = (",", ":") if indent is None else (",", ": ")
    return json.dumps(to_dict(score), indent=indent, separators=separators, ensure_ascii=False)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _get(obj, key, path, check, what):
    if key not in obj:
        raise SchemaError(f"{path}/{key}", "missing")
    value = obj[key]
    if not check(value):
        raise SchemaError(f"{path}/{key}", f"expected {what}")
    return value


def _get_list(obj, key, path):
    return _get(obj, key, path, lambda v: isinstance(v, list), "array")


def _require(cond, path, message):
    if not cond:
        raise SchemaError(path, message)


def from_dict(doc):
    """Validate a plain-dict score document and build the :class:`Score`."""
    _require(isinstance(doc, dict), "", "expected object")
    tpqn = _get(doc, "tpqn", "", _is_int, "integer")
    _require(tpqn > 0, "/tpqn", "must be positive")

    tempo = []
    for i, ev in enumerate(_get_list(doc, "tempo_map", "")):
        p = f"/tempo_map/{i}"
        _require(isinstance(ev, dict), p, "expected object")
        tick = _get(ev, "tick", p, _is_int, "integer")
        bpm = _get(ev, "bpm", p, _is_number, "number")
        _require(tick >= 0, f"{p}/tick", "must be >= 0")
        _require(bpm > 0, f"{p}/bpm", "must be positive")
        if tempo:
            _require(tick > tempo[-1].tick, f"{p}/tick", "ticks must be strictly increasing")
        tempo.append(TempoEvent(tick, float(bpm)))
    _require(tempo, "/tempo_map", "must not be empty")
    _require(tempo[0].tick == 0, "/tempo_map/0/tick", "first tempo event must be at tick 0")

    sigs = []
    for i, ev in enumerate(_get_list(doc, "time_sig_map", "")):
        p = f"/time_sig_map/{i}"
        _require(isinstance(ev, dict), p, "expected object")
        tick = _get(ev, "tick", p, _is_int, "integer")
        num = _get(ev, "numerator", p, _is_int, "integer")
        den = _get(ev, "denominator", p, _is_int, "integer")
        _require(num >= 1, f"{p}/numerator", "must be >= 1")
        _require(den in VALID_DENOMINATORS, f"{p}/denominator", "must be a power of two up to 32")
        if sigs:
            _require(tick > sigs[-1][0], f"{p}/tick", "ticks must be strictly increasing")
        sigs.append((tick, TimeSignature(num, den)))
    _require(sigs, "/time_sig_map", "must not be empty")
    _require(sigs[0][0] == 0, "/time_sig_map/0/tick", "first time signature must be at tick 0")

    instruments = []
    for i, inst in enumerate(_get_list(doc, "instruments", "")):
        p = f"/instruments/{i}"
        _require(isinstance(inst, dict), p, "expected object")
        program = _get(inst, "program", p, _is_int, "integer")
        _require(0 <= program <= 127, f"{p}/program", "must be in 0-127")
        name = _get(inst, "name", p, lambda v: isinstance(v, str), "string")
        is_drum = _get(inst, "is_drum", p, lambda v: isinstance(v, bool), "boolean")
        notes = []
        for j, n in enumerate(_get_list(inst, "notes", p)):
            q = f"{p}/notes/{j}"
            _require(isinstance(n, dict), q, "expected object")
            pitch = _get(n, "pitch", q, _is_int, "integer")
            _require(0 <= pitch <= 127, f"{q}/pitch", "must be in 0-127")
            start = _get(n, "start_ticks", q, _is_int, "integer")
            end = _get(n, "end_ticks", q, _is_int, "integer")
            _require(start >= 0, f"{q}/start_ticks", "must be >= 0")
            _require(end > start, f"{q}/end_ticks", "must be greater than start_ticks")
            start_sec = _get(n, "start_sec", q, _is_number, "number")
            end_sec = _get(n, "end_sec", q, _is_number, "number")
            _require(start_sec >= 0, f"{q}/start_sec", "must be >= 0")
            _require(end_sec >= 0, f"{q}/end_sec", "must be >= 0")
            velocity = _get(n, "velocity", q, _is_int, "integer")
            _require(0 <= velocity <= 127, f"{q}/velocity", "must be in 0-127")
            pname = _get(n, "pitch_name", q, lambda v: isinstance(v, str), "string")
            _require(pname == pitch_to_name(pitch), f"{q}/pitch_name", "does not match pitch")
            notes.append(Note(pitch, start, end, velocity, float(start_sec), float(end_sec), pname, is_drum))
        instruments.append(Instrument(program, name, is_drum, tuple(notes)))

    score = Score(tpqn, tuple(tempo), tuple(sigs), tuple(instruments))
    return group_notes_into_bars(score)


def from_json(text):
    """Parse a JSON score document.

    Raises
    ------
    SchemaError
        On invalid JSON or the first schema violation, naming its path.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from None
    return from_dict(doc)


def quantize_score(score, subdivision):
    """Snap every note of the score to a subdivision grid, keeping seconds consistent."""
    instruments = tuple(
        replace(inst, notes=tuple(quantize(inst.notes, subdivision, score.tpqn, score.tempo_map)))
        for inst in score.instruments
    )
    return group_notes_into_bars(replace(score, instruments=instruments))
