"""Pitch and rhythm features of a single sample, meter estimation and
self-similarity matrices.

Feature codes follow the usual objective-evaluation set:

====== ================================== ======
code   feature                            shape
====== ================================== ======
PC     number of distinct pitches         scalar
PCH    pitch-class histogram              12
PCTM   pitch-class transition matrix      12x12
PR     pitch range                        scalar
PI     mean absolute pitch interval       scalar
NC     note count                         scalar
IOI    mean inter-onset interval (s)      scalar
NLH    note-length histogram              12
NLTM   note-length transition matrix      12x12
====== ================================== ======

Histograms count notes, they are not weighted by duration.
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import InsufficientData
from .score import bar_frames

__all__ = [
    "FeatureKind",
    "FeatureValue",
    "NOTE_LENGTH_CLASSES",
    "note_length_class",
    "pitch_scalar",
    "pitch_histograms",
    "rhythm_scalar",
    "rhythm_histograms",
    "feature_of_notes",
    "extract_feature",
    "extract_features",
    "estimate_ts_numerator",
    "bar_notes",
    "self_similarity",
]


class FeatureKind(Enum):
    PC = "pc"
    PCH = "pch"
    PCTM = "pctm"
    PR = "pr"
    PI = "pi"
    NC = "nc"
    IOI = "ioi"
    NLH = "nlh"
    NLTM = "nltm"

    @property
    def shape(self):
        return _SHAPES[self]

    @property
    def is_scalar(self):
        return self.shape == ()

    @classmethod
    def from_code(cls, code):
        """Look up a kind by its lowercase code (``"pch"``) or name."""
        try:
            return cls(code.lower())
        except ValueError:
            raise ValueError(
                f"unknown feature {code!r}; choose from {', '.join(k.value for k in cls)}"
            ) from None


_SHAPES = {
    FeatureKind.PC: (),
    FeatureKind.PR: (),
    FeatureKind.PI: (),
    FeatureKind.NC: (),
    FeatureKind.IOI: (),
    FeatureKind.PCH: (12,),
    FeatureKind.NLH: (12,),
    FeatureKind.PCTM: (12, 12),
    FeatureKind.NLTM: (12, 12),
}


@dataclass(frozen=True, eq=False)
class FeatureValue:
    """One feature of one sample. ``data`` is a float or an ndarray."""

    kind: FeatureKind
    data: Union[float, np.ndarray]

    def __post_init__(self):
        if np.shape(self.data) != self.kind.shape:
            raise ValueError(f"{self.kind.name} needs shape {self.kind.shape}, got {np.shape(self.data)}")

    def as_array(self):
        return np.atleast_1d(np.asarray(self.data, dtype=float)).ravel()

    def __eq__(self, other):
        if not isinstance(other, FeatureValue):
            return NotImplemented
        return self.kind is other.kind and np.array_equal(self.as_array(), other.as_array())

    def __hash__(self):
        return hash((self.kind, self.as_array().tobytes()))


# Duration classes in quarter notes, longest first: whole down to sixty-fourth
# notes, plus dotted half down to dotted thirty-second.
NOTE_LENGTH_CLASSES = tuple(sorted(
    [Fraction(4), Fraction(2), Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8),
     Fraction(1, 16), Fraction(3), Fraction(3, 2), Fraction(3, 4), Fraction(3, 8),
     Fraction(3, 16)],
    reverse=True,
))
_LOG_CLASSES = np.log([float(c) for c in NOTE_LENGTH_CLASSES])


def note_length_class(duration_ticks, tpqn):
    """Index into :data:`NOTE_LENGTH_CLASSES` nearest in log-duration.

    Exact ties go to the longer class.
    """
    if duration_ticks <= 0:
        raise ValueError("durations must be positive")
    return int(np.argmin(np.abs(_LOG_CLASSES - np.log(duration_ticks / tpqn))))


def _kind(kind):
    return kind if isinstance(kind, FeatureKind) else FeatureKind.from_code(kind)


def _sorted(notes):
    return sorted(notes, key=lambda n: (n.start_ticks, n.pitch, n.end_ticks))


def _normalized(counts):
    total = counts.sum()
    return counts / total if total > 0 else counts


def _transitions(labels, size=12):
    mat = np.zeros((size, size))
    for a, b in zip(labels, labels[1:]):
        mat[a, b] += 1
    return _normalized(mat)


def pitch_scalar(notes, kind):
    """PC, PR or PI of a note collection (0 for empty input)."""
    kind = _kind(kind)
    notes = _sorted(notes)
    pitches = [n.pitch for n in notes]
    if kind is FeatureKind.PC:
        return float(len(set(pitches)))
    if kind is FeatureKind.PR:
        return float(max(pitches) - min(pitches)) if pitches else 0.0
    if kind is FeatureKind.PI:
        if len(pitches) < 2:
            return 0.0
        return float(np.mean(np.abs(np.diff(pitches))))
    raise ValueError(f"{kind.name} is not a scalar pitch feature")


def pitch_histograms(notes, kind):
    """PCH or PCTM as a :class:`FeatureValue`."""
    kind = _kind(kind)
    pcs = [n.pitch % 12 for n in _sorted(notes)]
    if kind is FeatureKind.PCH:
        return FeatureValue(kind, _normalized(np.bincount(pcs, minlength=12).astype(float)))
    if kind is FeatureKind.PCTM:
        return FeatureValue(kind, _transitions(pcs))
    raise ValueError(f"{kind.name} is not a pitch histogram feature")


def rhythm_scalar(notes, kind):
    """NC, or IOI in seconds over distinct onsets (0 with fewer than two)."""
    kind = _kind(kind)
    if kind is FeatureKind.NC:
        return float(len(notes))
    if kind is FeatureKind.IOI:
        onsets = sorted({n.start_sec for n in notes})
        if len(onsets) < 2:
            return 0.0
        return float(np.mean(np.diff(onsets)))
    raise ValueError(f"{kind.name} is not a scalar rhythm feature")


def rhythm_histograms(notes, kind, tpqn):
    """NLH or NLTM as a :class:`FeatureValue`."""
    kind = _kind(kind)
    classes = [note_length_class(n.end_ticks - n.start_ticks, tpqn) for n in _sorted(notes)]
    if kind is FeatureKind.NLH:
        return FeatureValue(kind, _normalized(np.bincount(classes, minlength=12).astype(float)))
    if kind is FeatureKind.NLTM:
        return FeatureValue(kind, _transitions(classes))
    raise ValueError(f"{kind.name} is not a note-length histogram feature")


def feature_of_notes(notes, kind, tpqn):
    """Feature of an arbitrary note collection, e.g. the notes of one bar."""
    kind = _kind(kind)
    if kind in (FeatureKind.PC, FeatureKind.PR, FeatureKind.PI):
        return FeatureValue(kind, pitch_scalar(notes, kind))
    if kind in (FeatureKind.PCH, FeatureKind.PCTM):
        return pitch_histograms(notes, kind)
    if kind in (FeatureKind.NC, FeatureKind.IOI):
        return FeatureValue(kind, rhythm_scalar(notes, kind))
    return rhythm_histograms(notes, kind, tpqn)


def extract_feature(score, kind):
    """One feature over all non-drum notes of a score."""
    kind = _kind(kind)
    return feature_of_notes(score.notes(include_drums=False), kind, score.tpqn)


def extract_features(score, kinds=tuple(FeatureKind)):
    """Mapping of kind to :class:`FeatureValue` for each requested kind."""
    notes = score.notes(include_drums=False)
    out = {}
    for kind in kinds:
        kind = _kind(kind)
        out[kind] = feature_of_notes(notes, kind, score.tpqn)
    return out


METER_LAGS = (2, 3, 4, 6)


def estimate_ts_numerator(notes, tpqn):
    """Guess the time-signature numerator from onset periodicity.

    Onsets are binned per quarter note with strength equal to the summed
    velocity in each bin. The mean lagged product ``s[t] * s[t + lag]`` is
    compared for lags of 2, 3, 4 and 6 quarters in exact arithmetic; the
    strongest lag wins, ties going to the smaller lag.

    Raises
    ------
    InsufficientData
        For fewer than four notes.
    """
    if len(notes) < 4:
        raise InsufficientData("numerator estimation needs at least 4 notes")
    length = max(n.start_ticks for n in notes) // tpqn + 1
    strength = [0] * length
    for n in notes:
        strength[n.start_ticks // tpqn] += n.velocity
    best_lag, best = None, None
    for lag in METER_LAGS:
        terms = length - lag
        if terms <= 0:
            value = Fraction(0)
        else:
            value = Fraction(sum(strength[t] * strength[t + lag] for t in range(terms)), terms)
        if best is None or value > best:
            best_lag, best = lag, value
    return best_lag


def bar_notes(score):
    """Non-drum notes of every bar of the score, bars spanning all parts."""
    frames = bar_frames(score.time_sig_map, score.tpqn, score.end_ticks)
    starts = np.array([f[0] for f in frames])
    buckets = [[] for _ in frames]
    for n in score.notes(include_drums=False):
        buckets[int(np.searchsorted(starts, n.start_ticks, side="right")) - 1].append(n)
    return frames, buckets


def _cosine_matrix(vectors):
    n = len(vectors)
    norms = [float(np.linalg.norm(v)) for v in vectors]
    S = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            if i == j:
                value = 1.0
            elif norms[i] == 0 or norms[j] == 0:
                value = 1.0 if norms[i] == norms[j] == 0 else 0.0
            else:
                value = float(np.dot(vectors[i], vectors[j]) / (norms[i] * norms[j]))
                value = min(max(value, 0.0), 1.0)
            S[i, j] = S[j, i] = value
    return S


def self_similarity(score, per_bar_feature="pch"):
    """Bar-by-bar cosine similarity of PCH or NLH vectors.

    An empty bar scores 0 against any non-empty bar and 1 against another
    empty bar.
    """
    kind = _kind(per_bar_feature)
    if kind not in (FeatureKind.PCH, FeatureKind.NLH):
        raise ValueError("self-similarity is defined for PCH and NLH")
    _, buckets = bar_notes(score)
    vectors = [feature_of_notes(b, kind, score.tpqn).as_array() for b in buckets]
    return _cosine_matrix(vectors)
