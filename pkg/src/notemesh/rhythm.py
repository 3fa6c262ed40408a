"""Tick/second conversion, bar lengths, subdivision grids and quantization.

Functions here only rely on attribute access (``tick``/``bpm`` on tempo
events, ``numerator``/``denominator`` on time signatures, tick fields on
notes), so they can be used without importing the score model.
"""
from dataclasses import replace
from fractions import Fraction
from typing import Sequence

__all__ = [
    "SUBDIVISIONS",
    "ticks_to_seconds",
    "seconds_to_ticks",
    "bar_length_ticks",
    "grid_ticks",
    "snap",
    "quantize",
]

# Length of each subdivision in quarter notes. Triplets are not supported.
SUBDIVISIONS = {
    "whole": Fraction(4),
    "half": Fraction(2),
    "quarter": Fraction(1),
    "eighth": Fraction(1, 2),
    "sixteenth": Fraction(1, 4),
    "thirty_second": Fraction(1, 8),
}


def _segments(tempo_map):
    events = [(int(e.tick), float(e.bpm)) if hasattr(e, "tick") else (int(e[0]), float(e[1]))
              for e in tempo_map]
    if not events or events[0][0] != 0:
        raise ValueError("tempo map must be non-empty and start at tick 0")
    return events


def ticks_to_seconds(tick, tempo_map, tpqn):
    """Convert an absolute tick position to seconds.

    Parameters
    ----------
    tick : int
        Absolute tick position (>= 0).
    tempo_map : sequence
        Tempo events sorted by tick; the first one must sit at tick 0.
    tpqn : int
        Ticks per quarter note.

    Returns
    -------
    float
    """
    seconds = 0.0
    events = _segments(tempo_map)
    for i, (start, bpm) in enumerate(events):
        end = events[i + 1][0] if i + 1 < len(events) else None
        if end is None or tick <= end:
            return seconds + (tick - start) * 60.0 / (bpm * tpqn)
        seconds += (end - start) * 60.0 / (bpm * tpqn)
    return seconds  # pragma: no cover


def seconds_to_ticks(sec, tempo_map, tpqn):
    """Inverse of :func:`ticks_to_seconds`, rounded to the nearest tick."""
    if sec < 0:
        raise ValueError("seconds must be >= 0")
    events = _segments(tempo_map)
    elapsed = 0.0
    for i, (start, bpm) in enumerate(events):
        per_tick = 60.0 / (bpm * tpqn)
        if i + 1 < len(events):
            seg = (events[i + 1][0] - start) * per_tick
            if sec > elapsed + seg:
                elapsed += seg
                continue
        exact = start + (sec - elapsed) / per_tick
        return int(exact + 0.5)
    return 0  # pragma: no cover


def bar_length_ticks(ts, tpqn):
    """Ticks in one bar of time signature ``ts``.

    >>> from collections import namedtuple
    >>> TS = namedtuple("TS", "numerator denominator")
    >>> bar_length_ticks(TS(6, 8), 96)
    288
    """
    return ts.numerator * (tpqn * 4 // ts.denominator)


def grid_ticks(subdivision, tpqn):
    """Tick spacing of a subdivision grid.

    Raises ``ValueError`` for unknown names or when the grid does not fall on
    whole ticks at this resolution.
    """
    try:
        quarters = SUBDIVISIONS[subdivision]
    except KeyError:
        raise ValueError(
            f"unknown subdivision {subdivision!r}; expected one of {', '.join(SUBDIVISIONS)}"
        ) from None
    g = quarters * tpqn
    if g.denominator != 1 or g < 1:
        raise ValueError(f"{subdivision} grid is not a whole number of ticks at tpqn={tpqn}")
    return int(g)


def snap(tick, g):
    """Nearest multiple of ``g``; exact halves go to the earlier grid point."""
    base, rem = divmod(tick, g)
    return (base + 1) * g if 2 * rem > g else base * g


def quantize(notes: Sequence, subdivision, tpqn, tempo_map=None):
    """Snap note onsets and ends to a subdivision grid.

    The onset is snapped, the original duration is added back, and the
    resulting end is snapped the same way; durations shorter than one grid
    step are stretched to one step. Notes are never merged.

    If ``tempo_map`` is given the second-valued fields are recomputed,
    otherwise they are left untouched.
    """
    g = grid_ticks(subdivision, tpqn)
    out = []
    for note in notes:
        start = snap(note.start_ticks, g)
        end = snap(start + (note.end_ticks - note.start_ticks), g)
        if end - start < g:
            end = start + g
        changes = {"start_ticks": start, "end_ticks": end}
        if tempo_map is not None:
            changes["start_sec"] = ticks_to_seconds(start, tempo_map, tpqn)
            changes["end_sec"] = ticks_to_seconds(end, tempo_map, tpqn)
        out.append(replace(note, **changes))
    return out
