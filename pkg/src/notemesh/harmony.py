"""Intervals, chords, keys and scales, key detection and degree transposition."""
import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyScore, KeyMismatch, UnsupportedMode
from .score import bar_frames, group_notes_into_bars

__all__ = [
    "Interval",
    "ChordQuality",
    "Key",
    "MODES",
    "KK_MAJOR",
    "KK_MINOR",
    "interval_between",
    "chord_pitch_classes",
    "identify_chord",
    "scale_pitch_classes",
    "key_signature",
    "parse_key",
    "pitch_class_distribution",
    "key_correlations",
    "detect_key",
    "transpose_by_degrees",
]

INTERVAL_NAMES = (
    "unison", "minor second", "major second", "minor third", "major third",
    "perfect fourth", "tritone", "perfect fifth", "minor sixth", "major sixth",
    "minor seventh", "major seventh", "octave",
    "minor ninth", "major ninth", "minor tenth", "major tenth",
    "perfect eleventh", "augmented eleventh", "perfect twelfth",
    "minor thirteenth", "major thirteenth", "minor fourteenth", "major fourteenth",
    "double octave",
)


@dataclass(frozen=True)
class Interval:
    semitones: int
    quality_name: str


def interval_between(pitch_a, pitch_b):
    """Unordered interval between two MIDI pitches.

    Spans up to two octaves get their compound name; wider spans are named
    after their remainder modulo 12 (an exact multiple counts as an octave).
    """
    semitones = abs(pitch_b - pitch_a)
    if semitones < len(INTERVAL_NAMES):
        name = INTERVAL_NAMES[semitones]
    else:
        name = INTERVAL_NAMES[semitones % 12 or 12]
    return Interval(semitones, name)


class ChordQuality(Enum):
    """Chord qualities with semitone offsets from the root, in table order."""

    major_triad = (0, 4, 7)
    minor_triad = (0, 3, 7)
    diminished_triad = (0, 3, 6)
    augmented_triad = (0, 4, 8)
    major_seventh = (0, 4, 7, 11)
    minor_seventh = (0, 3, 7, 10)
    dominant_seventh = (0, 4, 7, 10)
    half_diminished_seventh = (0, 3, 6, 10)
    diminished_seventh = (0, 3, 6, 9)

    @property
    def intervals(self):
        return self.value


def chord_pitch_classes(root_pc, quality):
    """Pitch-class set of a chord, e.g. ``(7, dominant_seventh) -> {7, 11, 2, 5}``."""
    if isinstance(quality, str):
        quality = ChordQuality[quality]
    return frozenset((root_pc + o) % 12 for o in quality.intervals)


def identify_chord(pitch_classes):
    """All ``(root_pc, ChordQuality)`` readings that spell exactly this set.

    Ordered by root, then by quality table order. Empty if nothing matches.
    """
    target = frozenset(pc % 12 for pc in pitch_classes)
    return [
        (root, quality)
        for root in range(12)
        for quality in ChordQuality
        if chord_pitch_classes(root, quality) == target
    ]


# Offsets of each mode within the major scale, and its position on the
# circle of fifths relative to the major key on the same tonic.
MODES = {
    "major": (0, 0),
    "dorian": (1, -2),
    "phrygian": (2, -4),
    "lydian": (3, 1),
    "mixolydian": (4, -1),
    "minor": (5, -3),
    "locrian": (6, -5),
}
MAJOR_STEPS = (0, 2, 4, 5, 7, 9, 11)

_LETTER_PC = {"c": 0, "d": 2, "e": 4, "f": 5, "g": 7, "a": 9, "b": 11}
_LETTER_FIFTHS = {"f": -1, "c": 0, "g": 1, "d": 2, "a": 3, "e": 4, "b": 5}
_SHARP_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")
_FLAT_NAMES = ("C", "Db", "D", "Eb", "E", "F", "Gb", "G", "Ab", "A", "Bb", "B")


def _spelling_fifths(name):
    letter, acc = name[0].lower(), name[1:]
    return _LETTER_FIFTHS[letter] + 7 * (acc.count("#") - acc.count("b"))


@dataclass(frozen=True)
class Key:
    """A tonic pitch class plus mode.

    ``tonic_name`` is the spelled tonic (``"Eb"``, ``"F#"``). It decides the
    accidental count for enharmonic tonics; when omitted, the spelling with
    fewer accidentals is chosen, sharps on a tie.
    """

    tonic_pc: int
    mode: str = "major"
    tonic_name: Optional[str] = None

    def __post_init__(self):
        if not 0 <= self.tonic_pc <= 11:
            raise ValueError(f"tonic pitch class must be in 0-11, got {self.tonic_pc}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.tonic_name is None:
            offset = MODES[self.mode][1]
            sharp = _SHARP_NAMES[self.tonic_pc]
            flat = _FLAT_NAMES[self.tonic_pc]
            by_sharp = abs(_spelling_fifths(sharp) + offset)
            by_flat = abs(_spelling_fifths(flat) + offset)
            object.__setattr__(self, "tonic_name", flat if by_flat < by_sharp else sharp)
        elif (_LETTER_PC[self.tonic_name[0].lower()] + self.tonic_name.count("#")
              - self.tonic_name.count("b")) % 12 != self.tonic_pc:
            raise ValueError(f"tonic name {self.tonic_name!r} does not match pitch class {self.tonic_pc}")

    @property
    def fifths(self):
        """Signed position on the circle of fifths (sharps positive)."""
        return _spelling_fifths(self.tonic_name) + MODES[self.mode][1]

    @property
    def accidentals(self):
        """``(count, kind)`` with kind ``"sharp"``, ``"flat"`` or ``"none"``."""
        f = self.fifths
        return (abs(f), "sharp" if f > 0 else "flat" if f < 0 else "none")

    def __str__(self):
        return f"{self.tonic_name} {self.mode}"

    @property
    def code(self):
        """Command-line form, e.g. ``"eb_major"``."""
        return f"{self.tonic_name.lower()}_{self.mode}"


_KEY_RE = re.compile(r"^([a-g])(#|s|b)?_([a-z]+)$")


def parse_key(text):
    """Parse ``"<tonic><accidental?>_<mode>"`` such as ``"c_major"`` or ``"f#_minor"``.

    ``s`` is accepted as a sharp sign (``"fs_minor"``). Raises ``ValueError``
    on anything else.
    """
    m = _KEY_RE.match(text.strip().lower())
    if not m or m.group(3) not in MODES:
        raise ValueError(f"malformed key {text!r}; expected e.g. c_major, eb_major, f#_minor")
    letter, acc, mode = m.groups()
    acc = {"s": "#", None: ""}.get(acc, acc)
    pc = (_LETTER_PC[letter] + (1 if acc == "#" else -1 if acc == "b" else 0)) % 12
    return Key(pc, mode, letter.upper() + acc)


def scale_pitch_classes(key):
    """Pitch classes of degrees I to VII. Minor means natural minor."""
    rot = MODES[key.mode][0]
    base = MAJOR_STEPS[rot]
    return [(key.tonic_pc + MAJOR_STEPS[(rot + i) % 7] - base) % 12 for i in range(7)]


def key_signature(key):
    """Key signature of a major or minor key as ``(count, kind)``."""
    if key.mode not in ("major", "minor"):
        raise UnsupportedMode(f"key signatures are defined for major and minor, not {key.mode}")
    return key.accidentals


# Krumhansl-Kessler probe-tone profiles, tonic first.
KK_MAJOR = np.array([6.35, 2.23, 3.48, 2.33, 4.38, 4.09, 2.52, 5.19, 2.39, 3.66, 2.29, 2.88])
KK_MINOR = np.array([6.33, 2.68, 3.52, 5.38, 2.60, 3.53, 2.54, 4.75, 3.98, 2.69, 3.34, 3.17])


def pitch_class_distribution(notes):
    """Duration-weighted (in ticks) pitch-class totals."""
    dist = np.zeros(12)
    for n in notes:
        dist[n.pitch % 12] += n.end_ticks - n.start_ticks
    return dist


def _pearson(x, y):
    xc, yc = x - x.mean(), y - y.mean()
    denom = np.sqrt((xc * xc).sum() * (yc * yc).sum())
    return float((xc * yc).sum() / denom) if denom > 0 else 0.0


def key_correlations(distribution):
    """Correlation of a pitch-class distribution with all 24 rotated profiles.

    Returns a list of ``(Key, r)`` in tonic order, major before minor.
    """
    dist = np.asarray(distribution, dtype=float)
    out = []
    for tonic in range(12):
        for mode, profile in (("major", KK_MAJOR), ("minor", KK_MINOR)):
            out.append((Key(tonic, mode), _pearson(dist, np.roll(profile, tonic))))
    return out


def detect_key(score):
    """Global key by profile correlation over the non-drum notes.

    Ties go to the lower tonic, then to major.
    """
    notes = score.notes(include_drums=False)
    if not notes:
        raise EmptyScore("key detection needs at least one non-drum note")
    best_key, best_r = None, -np.inf
    for key, r in key_correlations(pitch_class_distribution(notes)):
        if r > best_r:
            best_key, best_r = key, r
    return best_key


def _degree_of(pc, scale):
    """Scale degree at or below ``pc`` and the chromatic distance above it."""
    for up in range(12):
        cand = (pc - up) % 12
        if cand in scale:
            return scale.index(cand), up
    raise ValueError("empty scale")  # pragma: no cover


def _nearest_octave(pc, reference):
    below = reference - ((reference - pc) % 12)
    above = below + 12
    choice = below if reference - below <= above - reference else above
    if choice < 0:
        choice += 12
    if choice > 127:
        choice -= 12
    return choice


def transpose_by_degrees(score, source_key, target_key, degree_map: Sequence[int] = ()):
    """Move every non-drum note by a per-bar number of scale degrees.

    A note's degree in ``source_key`` is shifted by its bar's entry in
    ``degree_map`` and realized in ``target_key`` at the octave nearest the
    original pitch. Non-diatonic notes keep their chromatic distance above
    the nearest lower diatonic degree. ``degree_map`` entries past its end
    repeat the last value; an empty map means no shift.

    Raises
    ------
    KeyMismatch
        If more than half of the notes are non-diatonic to ``source_key``.
    """
    src = scale_pitch_classes(source_key)
    dst = scale_pitch_classes(target_key)
    melodic = score.notes(include_drums=False)
    outside = sum(1 for n in melodic if n.pitch % 12 not in src)
    if melodic and outside * 2 > len(melodic):
        raise KeyMismatch(
            f"{outside} of {len(melodic)} notes are outside {source_key}; is the source key right?"
        )
    frames = bar_frames(score.time_sig_map, score.tpqn, score.end_ticks)
    starts = [f[0] for f in frames]
    offsets = list(degree_map) or [0]

    def shift_for(tick):
        idx = max(0, np.searchsorted(starts, tick, side="right") - 1) if starts else 0
        return offsets[min(idx, len(offsets) - 1)]

    instruments = []
    for inst in score.instruments:
        if inst.is_drum:
            instruments.append(inst)
            continue
        notes = []
        for n in inst.notes:
            degree, chroma = _degree_of(n.pitch % 12, src)
            new_pc = (dst[(degree + shift_for(n.start_ticks)) % 7] + chroma) % 12
            notes.append(replace(n, pitch=_nearest_octave(new_pc, n.pitch), pitch_name=""))
        instruments.append(replace(inst, notes=tuple(notes)))
    return group_notes_into_bars(replace(score, instruments=tuple(instruments)))
