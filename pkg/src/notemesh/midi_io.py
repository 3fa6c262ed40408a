"""Standard MIDI File reading and writing (formats 0 and 1).

Only metrical time division is supported. Each (track, channel) pair that
carries channel-voice messages becomes one :class:`~notemesh.score.Instrument`;
channel 10 (index 9) is the drum channel.
"""
import struct
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import List

from .errors import FormatError
from .score import (
    DEFAULT_BPM,
    Instrument,
    Note,
    Score,
    TempoEvent,
    TimeSignature,
    group_notes_into_bars,
    retime,
)

__all__ = [
    "RawEvent",
    "read_vlq",
    "encode_vlq",
    "read_track",
    "parse_midi",
    "write_midi",
    "load",
    "save",
]

DRUM_CHANNEL = 9
MICROSECONDS_PER_MINUTE = 60_000_000

META_TRACK_NAME = 0x03
META_END_OF_TRACK = 0x2F
META_TEMPO = 0x51
META_TIME_SIGNATURE = 0x58

# data bytes following each channel-voice status nibble
_DATA_LENGTH = {0x8: 2, 0x9: 2, 0xA: 2, 0xB: 2, 0xC: 1, 0xD: 1, 0xE: 2}


@dataclass(frozen=True)
class RawEvent:
    """A decoded track event prior to note matching.

    ``kind`` is one of ``note_on``, ``note_off``, ``tempo``,
    ``time_signature``, ``program_change``, ``track_name`` or ``other``.
    Channel events carry the channel in ``channel``.
    """

    delta_ticks: int
    kind: str
    payload: bytes = b""
    channel: int = -1


def read_vlq(data, pos):
    """Decode a variable-length quantity starting at ``pos``.

    Returns ``(value, next_pos)``. Raises :class:`FormatError` if the
    quantity runs past the buffer or exceeds four bytes.
    """
    value = 0
    for i in range(4):
        if pos >= len(data):
            raise FormatError("truncated variable-length quantity")
        byte = data[pos]
        pos += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, pos
    raise FormatError("variable-length quantity longer than 4 bytes")


def encode_vlq(value):
    """Minimal-length variable-length quantity encoding."""
    if not 0 <= value <= 0x0FFFFFFF:
        raise ValueError(f"value {value} cannot be encoded as a 4-byte VLQ")
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def read_track(data):
    """Decode the body of one ``MTrk`` chunk into :class:`RawEvent` objects."""
    events: List[RawEvent] = []
    pos = 0
    status = None
    while pos < len(data):
        delta, pos = read_vlq(data, pos)
        if pos >= len(data):
            raise FormatError("truncated event")
        byte = data[pos]
        if byte == 0xFF:
            if pos + 1 >= len(data):
                raise FormatError("truncated meta event")
            meta_type = data[pos + 1]
            length, pos = read_vlq(data, pos + 2)
            payload = bytes(data[pos:pos + length])
            if len(payload) != length:
                raise FormatError("truncated meta event")
            pos += length
            if meta_type == META_TEMPO:
                if length != 3:
                    raise FormatError("tempo meta event must have 3 data bytes")
                events.append(RawEvent(delta, "tempo", payload))
            elif meta_type == META_TIME_SIGNATURE:
                if length < 2:
                    raise FormatError("time signature meta event too short")
                events.append(RawEvent(delta, "time_signature", payload))
            elif meta_type == META_TRACK_NAME:
                events.append(RawEvent(delta, "track_name", payload))
            elif meta_type == META_END_OF_TRACK:
                events.append(RawEvent(delta, "other", b"end_of_track"))
                break
            else:
                events.append(RawEvent(delta, "other"))
            # meta and sysex events cancel running status
            status = None
            continue
        if byte in (0xF0, 0xF7):
            length, pos = read_vlq(data, pos + 1)
            if pos + length > len(data):
                raise FormatError("truncated sysex event")
            pos += length
            events.append(RawEvent(delta, "other"))
            status = None
            continue
        if byte & 0x80:
            if byte >= 0xF0:
                raise FormatError(f"unexpected status byte 0x{byte:02X} in track data")
            status = byte
            pos += 1
        elif status is None:
            raise FormatError("running status used before any status byte")
        n = _DATA_LENGTH[status >> 4]
        body = data[pos:pos + n]
        if len(body) != n:
            raise FormatError("truncated channel event")
        if any(b & 0x80 for b in body):
            raise FormatError("channel event data byte out of range")
        pos += n
        kind_nibble, channel = status >> 4, status & 0x0F
        if kind_nibble == 0x9 and body[1] > 0:
            kind = "note_on"
        elif kind_nibble in (0x8, 0x9):
            kind = "note_off"
        elif kind_nibble == 0xC:
            kind = "program_change"
        else:
            kind = "other"
        events.append(RawEvent(delta, kind, bytes(body), channel))
    return events


def _chunks(data):
    pos = 0
    while pos < len(data):
        if pos + 8 > len(data):
            raise FormatError("truncated chunk header")
        kind = bytes(data[pos:pos + 4])
        (length,) = struct.unpack(">I", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + length]
        if len(body) != length:
            raise FormatError(f"truncated {kind!r} chunk")
        yield kind, body
        pos += 8 + length


class _Voice:
    """Note matching state for one (track, channel) pair."""

    def __init__(self):
        self.program = None
        self.open = {}
        self.notes = []  # (pitch, start, end, velocity)

    def close(self, pitch, tick):
        start, velocity = self.open.pop(pitch)
        if tick > start:
            self.notes.append((pitch, start, tick, velocity))


def parse_midi(data):
    """Parse a Standard MIDI File into a :class:`Score`.

    Parameters
    ----------
    data : bytes
        Complete file contents.

    Returns
    -------
    Score
        Bars are grouped and second fields follow the file's tempo map.

    Raises
    ------
    FormatError
        Bad magic, truncated chunks, invalid variable-length quantities,
        SMPTE time division or an unsupported file format.
    """
    data = bytes(data)
    if data[:4] != b"MThd":
        raise FormatError("missing MThd header")
    chunks = _chunks(data)
    _, header = next(chunks)
    if len(header) < 6:
        raise FormatError("MThd chunk shorter than 6 bytes")
    fmt, ntracks, division = struct.unpack(">HHH", header[:6])
    if fmt not in (0, 1):
        raise FormatError(f"unsupported SMF format {fmt}")
    if division & 0x8000:
        raise FormatError("SMPTE time division is not supported; only ticks per quarter note")
    if division == 0:
        raise FormatError("time division of 0 ticks per quarter note")

    tempos = {}
    sigs = {}
    instruments = []
    n_tracks = 0
    for kind, body in chunks:
        if kind != b"MTrk":
            continue
        n_tracks += 1
        tick = 0
        name = ""
        voices = defaultdict(_Voice)
        for ev in read_track(body):
            tick += ev.delta_ticks
            if ev.kind == "tempo":
                uspq = int.from_bytes(ev.payload, "big")
                if uspq == 0:
                    raise FormatError("tempo of 0 microseconds per quarter")
                tempos[tick] = MICROSECONDS_PER_MINUTE / uspq
            elif ev.kind == "time_signature":
                num, exp = ev.payload[0], ev.payload[1]
                if num < 1 or exp > 5:
                    raise FormatError(f"unsupported time signature {num}/2^{exp}")
                sigs[tick] = TimeSignature(num, 2 ** exp)
            elif ev.kind == "track_name":
                name = ev.payload.decode("latin-1")
            elif ev.kind == "program_change":
                voice = voices[ev.channel]
                if voice.program is None:
                    voice.program = ev.payload[0]
            elif ev.kind == "note_on":
                voice = voices[ev.channel]
                pitch, velocity = ev.payload
                if pitch in voice.open:
                    voice.close(pitch, tick)
                voice.open[pitch] = (tick, velocity)
            elif ev.kind == "note_off":
                voice = voices[ev.channel]
                pitch = ev.payload[0]
                if pitch in voice.open:
                    voice.close(pitch, tick)
        for channel in sorted(voices):
            voice = voices[channel]
            for pitch in sorted(voice.open):
                voice.close(pitch, tick)
            is_drum = channel == DRUM_CHANNEL
            notes = tuple(Note(p, s, e, v, is_drum=is_drum) for p, s, e, v in voice.notes)
            instruments.append(Instrument(voice.program or 0, name, is_drum, notes))
    if n_tracks == 0 and ntracks > 0:
        raise FormatError("no MTrk chunk found")
    if fmt == 0 and not instruments and n_tracks:
        instruments.append(Instrument())

    tempo_map = [TempoEvent(t, bpm) for t, bpm in sorted(tempos.items())]
    if not tempo_map or tempo_map[0].tick != 0:
        tempo_map.insert(0, TempoEvent(0, DEFAULT_BPM))
    sig_map = sorted(sigs.items())
    if not sig_map or sig_map[0][0] != 0:
        sig_map.insert(0, (0, TimeSignature(4, 4)))
    score = Score(division, tuple(tempo_map), tuple(sig_map), tuple(instruments))
    return group_notes_into_bars(retime(score))


def _track_chunk(events):
    """Serialize ``(tick, order, message_bytes)`` events into an MTrk chunk."""
    out = bytearray()
    last_tick = 0
    running = None
    for tick, _, msg in sorted(events, key=lambda e: (e[0], e[1])):
        out += encode_vlq(tick - last_tick)
        last_tick = tick
        if msg[0] < 0xF0 and msg[0] == running:
            out += msg[1:]
        else:
            out += msg
            running = msg[0] if msg[0] < 0xF0 else None
    out += encode_vlq(0) + b"\xFF\x2F\x00"
    return b"MTrk" + struct.pack(">I", len(out)) + bytes(out)


def _meta(meta_type, payload):
    return bytes([0xFF, meta_type]) + encode_vlq(len(payload)) + payload


def _channels(instruments):
    """Assign channels: drums on 9, melodic parts cycle over the others."""
    melodic = [c for c in range(16) if c != DRUM_CHANNEL]
    out, k = [], 0
    for inst in instruments:
        if inst.is_drum:
            out.append(DRUM_CHANNEL)
        else:
            out.append(melodic[k % len(melodic)])
            k += 1
    return out


def write_midi(score):
    """Serialize a score as a format-1 Standard MIDI File.

    Track 0 holds tempo and time signature events; each instrument gets its
    own track with a name, a program change and its notes. Note-offs sort
    before note-ons at the same tick.
    """
    if not 0 < score.tpqn < 0x8000:
        raise ValueError(f"tpqn {score.tpqn} cannot be stored in an SMF header")
    conductor = []
    for ev in score.tempo_map:
        uspq = round(MICROSECONDS_PER_MINUTE / ev.bpm)
        conductor.append((ev.tick, 0, _meta(META_TEMPO, uspq.to_bytes(3, "big"))))
    for tick, ts in score.time_sig_map:
        exp = ts.denominator.bit_length() - 1
        conductor.append((tick, 1, _meta(META_TIME_SIGNATURE, bytes([ts.numerator, exp, 24, 8]))))
    tracks = [_track_chunk(conductor)]

    for inst, channel in zip(score.instruments, _channels(score.instruments)):
        events = []
        if inst.name:
            events.append((0, 0, _meta(META_TRACK_NAME, inst.name.encode("latin-1", "replace"))))
        events.append((0, 1, bytes([0xC0 | channel, inst.program])))
        for n in inst.notes:
            events.append((n.end_ticks, 2, bytes([0x80 | channel, n.pitch, 0])))
            events.append((n.start_ticks, 3, bytes([0x90 | channel, n.pitch, max(n.velocity, 1)])))
        tracks.append(_track_chunk(events))

    header = b"MThd" + struct.pack(">IHHH", 6, 1, len(tracks), score.tpqn)
    return header + b"".join(tracks)


def load(path):
    """Read and parse a MIDI file from disk."""
    return parse_midi(Path(path).read_bytes())


def save(score, path):
    """Write ``score`` to ``path`` as a format-1 MIDI file."""
    Path(path).write_bytes(write_midi(score))
