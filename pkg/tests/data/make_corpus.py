"""Regenerate the bundled fixture corpus.

    python tests/data/make_corpus.py

Writes 15 valid files split over ``corpus/set_a`` and ``corpus/set_b`` and
5 deliberately broken files into ``corpus/corrupt``. Output is deterministic.
"""
import shutil
import struct
import sys
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

from generators import (  # noqa: E402
    END_OF_TRACK,
    melody_score,
    random_score,
    scale_fixture,
    smf,
    tempo_event,
    time_sig_event,
)
from notemesh.midi_io import write_midi  # noqa: E402

CORPUS = HERE / "corpus"


def format0_multichannel():
    """Single track, two channels, running status and velocity-0 note-offs."""
    ev = [
        (0, tempo_event(100)),
        (0, time_sig_event(3, 4)),
        (0, b"\xFF\x03\x05duet!"),
        (0, b"\xC0\x28"),          # channel 0 -> violin
        (0, b"\xC1\x2A"),          # channel 1 -> cello
        (0, b"\x90\x4C\x50"),
        (0, b"\x30\x50"),          # running status: note on 48
        (0, b"\x91\x30\x46"),
        (96, b"\x90\x4C\x00"),     # velocity 0 = note off
        (0, b"\x4F\x50"),
        (0, b"\x81\x30\x40"),
        (0, b"\x91\x34\x46"),
        (96, b"\x80\x4F\x40"),
        (0, b"\x90\x30\x00"),
        (0, b"\x91\x34\x00"),
        (0, b"\x90\x48\x60"),
        (192, b"\x90\x48\x00"),
        (0, END_OF_TRACK),
    ]
    return smf([ev], fmt=0, division=96)


def no_tempo_with_drums():
    """Format 1 without tempo meta events, a melody and a drum track."""
    melody = [(0, b"\xC0\x00")]
    for i, p in enumerate([60, 62, 64, 65, 67, 65, 64, 62]):
        melody += [(0 if i == 0 else 0, bytes([0x90, p, 90])), (240, bytes([0x80, p, 0]))]
    melody.append((0, END_OF_TRACK))
    drums = []
    for i in range(8):
        drums += [(0, b"\x99\x24\x64"), (120, b"\x89\x24\x00"), (0, b"\x99\x2A\x50"), (120, b"\x89\x2A\x00")]
    drums.append((0, END_OF_TRACK))
    return smf([[(0, END_OF_TRACK)], melody, drums], fmt=1, division=240)


def unterminated_notes():
    """Notes left open at end of track, plus an unknown chunk and a sysex."""
    ev = [
        (0, b"\xF0\x03\x7E\x7F\xF7"),
        (0, b"\x90\x3C\x64"),
        (0, b"\x90\x40\x64"),
        (48, b"\x90\x3C\x64"),     # retrigger closes the first C
        (48, b"\xFF\x01\x04text"),
        (96, END_OF_TRACK),
    ]
    data = smf([ev], fmt=0, division=96)
    return data + b"XFIH" + (4).to_bytes(4, "big") + b"\x00\x01\x02\x03"


def empty_format0():
    return smf([[(0, tempo_event(120)), (0, END_OF_TRACK)]], fmt=0, division=96)


def raw_track(body):
    """Format-0 file around an arbitrary, possibly malformed, track body."""
    return (b"MThd" + struct.pack(">IHHH", 6, 0, 1, 96)
            + b"MTrk" + struct.pack(">I", len(body)) + body)


def corrupt_files():
    good = smf([[(0, b"\x90\x3C\x64"), (96, b"\x80\x3C\x00"), (0, END_OF_TRACK)]], fmt=0)
    return {
        "bad_magic.mid": b"MThx" + good[4:],
        "truncated_chunk.mid": good[:-5],
        "invalid_vlq.mid": raw_track(b"\x81\x81\x81\x81\x01\x90\x3C\x64\x00" + END_OF_TRACK),
        "smpte_division.mid": smf([[(0, END_OF_TRACK)]], fmt=0, division=0xE728),
        "running_status_first.mid": smf([[(0, b"\x3C\x64"), (0, END_OF_TRACK)]], fmt=0),
    }


def main():
    if CORPUS.exists():
        shutil.rmtree(CORPUS)
    set_a, set_b, bad = CORPUS / "set_a", CORPUS / "set_b", CORPUS / "corrupt"
    for d in (set_a, set_b / "chorales", bad):
        d.mkdir(parents=True)

    rng = np.random.default_rng(20240917)
    for i in range(4):
        score = random_score(rng, max_instruments=3, max_notes=48)
        (set_a / f"random_{i:02d}.mid").write_bytes(write_midi(score))
    (set_a / "duet_format0.mid").write_bytes(format0_multichannel())
    (set_a / "no_tempo_drums.mid").write_bytes(no_tempo_with_drums())
    (set_a / "open_notes.mid").write_bytes(unterminated_notes())
    (set_a / "empty_format0.mid").write_bytes(empty_format0())

    (set_b / "c_major_scale.mid").write_bytes(write_midi(scale_fixture(0, "major")))
    (set_b / "a_minor_scale.mid").write_bytes(write_midi(scale_fixture(9, "minor")))
    (set_b / "eb_major_scale.midi").write_bytes(write_midi(scale_fixture(3, "major")))
    arpeggio = melody_score([57, 60, 64, 68, 69, 68, 64, 60], [48, 48, 48, 48, 96, 48, 48, 96])
    (set_b / "a_harmonic_arpeggio.mid").write_bytes(write_midi(arpeggio))
    waltz = melody_score([67, 64, 64, 65, 62, 62, 60, 62, 64, 65, 67, 67, 67],
                         [96, 96, 96, 96, 96, 96, 96, 96, 96, 96, 96, 96, 192])
    (set_b / "chorales" / "waltz.mid").write_bytes(write_midi(waltz))
    for i in range(2):
        score = random_score(rng, max_instruments=2, max_notes=32, meter_changes=False)
        (set_b / "chorales" / f"random_{i:02d}.mid").write_bytes(write_midi(score))

    for name, data in corrupt_files().items():
        (bad / name).write_bytes(data)


if __name__ == "__main__":
    main()
