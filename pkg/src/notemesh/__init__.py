"""notemesh: symbolic music parsing, tokenization, features, evaluation and plotting."""

__version__ = "0.1.0"

from .midi_io import load, parse_midi, save, write_midi
from .score import (
    Bar,
    Instrument,
    Note,
    Score,
    TempoEvent,
    TimeSignature,
    from_json,
    group_notes_into_bars,
    pitch_to_name,
    to_json,
)

__all__ = [
    "Bar",
    "Instrument",
    "Note",
    "Score",
    "TempoEvent",
    "TimeSignature",
    "from_json",
    "group_notes_into_bars",
    "load",
    "parse_midi",
    "pitch_to_name",
    "save",
    "to_json",
    "write_midi",
]
