"""MMM-style token encoding of scores.

Grammar (one sample per line, tokens separated by single spaces)::

    piece := "PIECE_START" track+
    track := "TRACK_START" inst bar+ "TRACK_END"
    inst  := "INST=" int | "DRUMS"
    bar   := "BAR_START" event* "BAR_END"
    event := "NOTE_ON=" int | "NOTE_OFF=" int | "TIME_DELTA=" int

Within a bar, events at the same time put note-offs before note-ons, each
group ordered by pitch. A note-off that falls exactly on a barline closes
the bar it ends; the TIME_DELTA values of a bar always sum to its length.
Notes may sound across barlines, their NOTE_OFF then appears in a later
bar of the same track. Velocity and tempo are not encoded.
"""
from collections import deque
from dataclasses import dataclass, field
from typing import List, Tuple

from .errors import DanglingNoteError, EmptyScore, GrammarError, UnknownToken
from .rhythm import bar_length_ticks
from .score import (
    Instrument,
    Note,
    Score,
    TimeSignature,
    bar_frames,
    group_notes_into_bars,
    retime,
)

__all__ = [
    "STRUCTURAL_TOKENS",
    "DETOKENIZE_VELOCITY",
    "TokenizerConfig",
    "TokenSeq",
    "resample_tick",
    "vocabulary",
    "tokenize",
    "detokenize",
    "tokens_to_txt",
    "txt_to_tokens",
]

STRUCTURAL_TOKENS = ("PIECE_START", "TRACK_START", "TRACK_END", "BAR_START", "BAR_END")
DETOKENIZE_VELOCITY = 96


@dataclass(frozen=True)
class TokenizerConfig:
    time_unit_per_quarter: int = 24
    max_time_delta: int = 96
    program_range: Tuple[int, int] = (0, 127)
    drum_flag: bool = True

    def __post_init__(self):
        if self.time_unit_per_quarter < 1:
            raise ValueError("time_unit_per_quarter must be >= 1")
        if self.max_time_delta < self.time_unit_per_quarter:
            raise ValueError("max_time_delta must be at least one quarter note")
        lo, hi = self.program_range
        if not 0 <= lo <= hi <= 127:
            raise ValueError(f"invalid program range {self.program_range}")


@dataclass(frozen=True)
class TokenSeq:
    tokens: Tuple[str, ...]
    config: TokenizerConfig = field(default_factory=TokenizerConfig)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def vocabulary(config=TokenizerConfig()):
    """Every token the configuration can emit, in canonical order."""
    lo, hi = config.program_range
    vocab = list(STRUCTURAL_TOKENS)
    vocab += [f"INST={p}" for p in range(lo, hi + 1)]
    if config.drum_flag:
        vocab.append("DRUMS")
    vocab += [f"NOTE_ON={p}" for p in range(128)]
    vocab += [f"NOTE_OFF={p}" for p in range(128)]
    vocab += [f"TIME_DELTA={d}" for d in range(1, config.max_time_delta + 1)]
    return vocab


def resample_tick(tick, tpqn, unit):
    """Nearest tick on a grid of ``unit`` steps per quarter, ties to the earlier one."""
    q, r = divmod(tick * unit, tpqn)
    return q + 1 if 2 * r > tpqn else q


def _deltas(gap, limit):
    out = []
    while gap > 0:
        step = min(gap, limit)
        out.append(f"TIME_DELTA={step}")
        gap -= step
    return out


def _inst_token(inst, config):
    if inst.is_drum and config.drum_flag:
        return "DRUMS"
    lo, hi = config.program_range
    return f"INST={min(max(inst.program, lo), hi)}"


def tokenize(score, config=TokenizerConfig()):
    """Encode a score as an MMM token sequence.

    Timings are resampled to ``config.time_unit_per_quarter`` steps per
    quarter; a note shorter than one step after resampling lasts one step.
    Every track gets the same number of bars, enough to hold the latest
    note end of the piece (at least one).

    Raises
    ------
    EmptyScore
        If the score has no instruments.
    """
    if not score.instruments:
        raise EmptyScore("cannot tokenize a score without instruments")
    unit = config.time_unit_per_quarter
    res = lambda t: resample_tick(t, score.tpqn, unit)  # noqa: E731

    tracks = []
    for inst in score.instruments:
        notes = []
        for n in inst.notes:
            s = res(n.start_ticks)
            notes.append((n.pitch, s, max(res(n.end_ticks), s + 1)))
        tracks.append(notes)

    sig_map = []
    for tick, ts in score.time_sig_map:
        t = res(tick)
        if sig_map and sig_map[-1][0] == t:
            sig_map[-1] = (t, ts)
        else:
            sig_map.append((t, ts))
    end = max((e for notes in tracks for _, _, e in notes), default=0)
    frames = bar_frames(sig_map, unit, end, min_bars=1)

    tokens = ["PIECE_START"]
    for inst, notes in zip(score.instruments, tracks):
        tokens += ["TRACK_START", _inst_token(inst, config)]
        ons = sorted((s, p) for p, s, _ in notes)
        offs = sorted((e, p) for p, _, e in notes)
        i_on = i_off = 0
        for start, stop, _ in frames:
            tokens.append("BAR_START")
            cursor = start
            while True:
                next_off = offs[i_off][0] if i_off < len(offs) and offs[i_off][0] <= stop else None
                next_on = ons[i_on][0] if i_on < len(ons) and ons[i_on][0] < stop else None
                if next_off is None and next_on is None:
                    break
                if next_on is None or (next_off is not None and next_off <= next_on):
                    t, pitch = offs[i_off]
                    i_off += 1
                    kind = "NOTE_OFF"
                else:
                    t, pitch = ons[i_on]
                    i_on += 1
                    kind = "NOTE_ON"
                tokens += _deltas(t - cursor, config.max_time_delta)
                cursor = t
                tokens.append(f"{kind}={pitch}")
            tokens += _deltas(stop - cursor, config.max_time_delta)
            tokens.append("BAR_END")
        tokens.append("TRACK_END")
    return TokenSeq(tuple(tokens), config)


def _split(token):
    head, sep, tail = token.partition("=")
    if not sep:
        return head, None
    if not tail.isdigit():
        return None, None
    return head, int(tail)


def _time_signature_for(length, unit):
    """Smallest-denominator power-of-two signature spanning ``length`` units."""
    for den in (4, 8, 16, 32, 2, 1):
        ts = TimeSignature(1, den)
        step = bar_length_ticks(ts, unit)
        if step and length % step == 0 and (unit * 4) % den == 0:
            return TimeSignature(length // step, den)
    return None


def detokenize(seq):
    """Decode a token sequence back into a score.

    The result uses ``tpqn = time_unit_per_quarter``, 120 bpm and velocity
    96 for every note. Bar lengths of the first track become the time
    signature map where they can be expressed as one.

    Raises
    ------
    GrammarError
        At the index of the first token that breaks the grammar.
    DanglingNoteError
        When a track closes with a note still sounding.
    """
    config = seq.config if isinstance(seq, TokenSeq) else TokenizerConfig()
    tokens = list(seq)
    unit = config.time_unit_per_quarter
    if not tokens or tokens[0] != "PIECE_START":
        raise GrammarError(0, "sequence must begin with PIECE_START")

    instruments = []
    first_bar_lengths: List[int] = []
    state = "piece"
    for i, tok in enumerate(tokens[1:], start=1):
        head, value = _split(tok)
        if state == "piece":
            if tok != "TRACK_START":
                raise GrammarError(i, f"expected TRACK_START, got {tok!r}")
            state = "inst"
        elif state == "inst":
            if tok == "DRUMS":
                program, is_drum = 0, True
            elif head == "INST" and value is not None and value <= 127:
                program, is_drum = value, False
            else:
                raise GrammarError(i, f"expected INST=<program> or DRUMS, got {tok!r}")
            notes, open_notes, bar_lengths = [], {}, []
            now = 0
            state = "track"
        elif state == "track":
            if tok == "BAR_START":
                bar_start = now
                state = "bar"
            elif tok == "TRACK_END":
                if not bar_lengths:
                    raise GrammarError(i, "a track needs at least one bar")
                if any(open_notes.values()):
                    pitch = min(p for p, q in open_notes.items() if q)
                    raise DanglingNoteError(i, f"NOTE_ON={pitch} has no NOTE_OFF in its track")
                instruments.append(Instrument(
                    program, "", is_drum,
                    tuple(Note(p, s, e, DETOKENIZE_VELOCITY, is_drum=is_drum) for p, s, e in notes),
                ))
                if len(instruments) == 1:
                    first_bar_lengths = bar_lengths
                state = "piece"
            else:
                raise GrammarError(i, f"expected BAR_START or TRACK_END, got {tok!r}")
        elif state == "bar":
            if tok == "BAR_END":
                if now == bar_start:
                    raise GrammarError(i, "bar has zero length")
                bar_lengths.append(now - bar_start)
                state = "track"
            elif head == "TIME_DELTA" and value is not None and 1 <= value <= config.max_time_delta:
                now += value
            elif head == "NOTE_ON" and value is not None and value <= 127:
                open_notes.setdefault(value, deque()).append(now)
            elif head == "NOTE_OFF" and value is not None and value <= 127:
                pending = open_notes.get(value)
                if not pending:
                    raise GrammarError(i, f"NOTE_OFF={value} without a matching NOTE_ON")
                start = pending.popleft()
                if now == start:
                    raise GrammarError(i, f"NOTE_OFF={value} closes a zero-length note")
                notes.append((value, start, now))
            else:
                raise GrammarError(i, f"unexpected token {tok!r} inside a bar")
    if state != "piece":
        raise GrammarError(len(tokens), "sequence ended inside a track")

    sig_map = [(0, TimeSignature(4, 4))]
    tick = 0
    for k, length in enumerate(first_bar_lengths):
        ts = _time_signature_for(length, unit)
        if ts is None:
            break
        if k == 0:
            sig_map = [(0, ts)]
        elif ts != sig_map[-1][1]:
            sig_map.append((tick, ts))
        tick += length
    score = Score(tpqn=unit, time_sig_map=tuple(sig_map), instruments=tuple(instruments))
    return group_notes_into_bars(retime(score))


def tokens_to_txt(seq):
    """Single line of space-separated tokens."""
    return " ".join(seq)


def txt_to_tokens(text, config=TokenizerConfig()):
    """Parse a line produced by :func:`tokens_to_txt`.

    Raises :class:`UnknownToken` for text outside the vocabulary.
    """
    known = set(vocabulary(config))
    tokens = text.split()
    for tok in tokens:
        if tok not in known:
            raise UnknownToken(tok)
    return TokenSeq(tuple(tokens), config)
