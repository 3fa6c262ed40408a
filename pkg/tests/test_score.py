import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from generators import random_score
from notemesh.errors import RangeError, SchemaError
from notemesh.score import (
    Instrument,
    Note,
    Score,
    TimeSignature,
    bar_frames,
    from_json,
    group_notes_into_bars,
    pitch_to_name,
    retime,
    to_json,
)

NOTE_KEYS = ["pitch", "start_ticks", "end_ticks", "start_sec", "end_sec", "velocity", "pitch_name"]


def one_note_score(start, end=None, ts=(4, 4), tpqn=96):
    end = end if end is not None else start + 10
    score = Score(tpqn=tpqn, time_sig_map=((0, TimeSignature(*ts)),),
                  instruments=(Instrument(notes=(Note(60, start, end),)),))
    return group_notes_into_bars(retime(score))


def test_defaults():
    s = Score()
    assert s.tpqn == 96
    assert [(e.tick, e.bpm) for e in s.tempo_map] == [(0, 120.0)]
    assert s.time_sig_map == ((0, TimeSignature(4, 4)),)


@pytest.mark.parametrize("pitch,name", [(60, "C4"), (61, "C#4"), (0, "C-1"), (127, "G9"), (69, "A4")])
def test_pitch_to_name(pitch, name):
    assert pitch_to_name(pitch) == name


@pytest.mark.parametrize("bad", [-1, 128, 60.0, True])
def test_pitch_to_name_range(bad):
    with pytest.raises(RangeError):
        pitch_to_name(bad)


def test_pitch_to_name_injective():
    assert len({pitch_to_name(p) for p in range(128)}) == 128


def test_note_invariants():
    assert Note(60, 0, 10).pitch_name == "C4"
    with pytest.raises(ValueError):
        Note(60, 10, 10)
    with pytest.raises(ValueError):
        Note(60, 0, 10, pitch_name="D4")


def test_bar_assignment_4_4():
    inst = one_note_score(400).instruments[0]
    bar = next(b for b in inst.bars if 0 in b.note_refs)
    assert (bar.index, bar.start_ticks, bar.end_ticks) == (1, 384, 768)


def test_bar_assignment_6_8():
    inst = one_note_score(290, ts=(6, 8)).instruments[0]
    bar = next(b for b in inst.bars if 0 in b.note_refs)
    assert bar.index == 1
    assert bar.end_ticks - bar.start_ticks == 288


def test_empty_instrument_has_no_bars():
    s = group_notes_into_bars(Score(instruments=(Instrument(),)))
    assert s.instruments[0].bars == ()


def test_trailing_content_gets_full_bar():
    inst = one_note_score(0, 400).instruments[0]
    assert [(b.start_ticks, b.end_ticks) for b in inst.bars] == [(0, 384), (384, 768)]


def test_sustained_note_stays_in_onset_bar():
    inst = one_note_score(300, 900).instruments[0]
    assert inst.bars[0].note_refs == (0,)
    assert all(not b.note_refs for b in inst.bars[1:])


def test_meter_change_restarts_tiling():
    frames = bar_frames(((0, TimeSignature(4, 4)), (480, TimeSignature(3, 4))), 96, 1000)
    assert [(s, e) for s, e, _ in frames] == [(0, 384), (384, 480), (480, 768), (768, 1056)]


@given(st.integers(0, 10_000))
def test_bars_partition_notes(seed):
    score = random_score(np.random.default_rng(seed))
    for inst in score.instruments:
        refs = [i for b in inst.bars for i in b.note_refs]
        assert sorted(refs) == list(range(len(inst.notes)))
        for b in inst.bars:
            for i in b.note_refs:
                assert b.start_ticks <= inst.notes[i].start_ticks < b.end_ticks
        if inst.bars:
            assert inst.bars[0].start_ticks == 0
            for a, b in zip(inst.bars, inst.bars[1:]):
                assert a.end_ticks == b.start_ticks


def test_json_default_score():
    text = to_json(Score())
    assert '"tpqn":96' in text
    assert '"tempo_map":[{"tick":0,"bpm":120.0}]' in text


def test_json_note_has_all_schema_fields():
    doc = json.loads(to_json(one_note_score(0, 96)))
    note = doc["instruments"][0]["notes"][0]
    assert list(note) == NOTE_KEYS
    assert note == {"pitch": 60, "start_ticks": 0, "end_ticks": 96, "start_sec": 0.0,
                    "end_sec": 0.5, "velocity": 100, "pitch_name": "C4"}
    assert list(doc) == ["tpqn", "tempo_map", "time_sig_map", "instruments"]
    assert list(doc["instruments"][0]) == ["program", "name", "is_drum", "notes"]


@given(st.integers(0, 10_000))
def test_json_round_trip(seed):
    score = random_score(np.random.default_rng(seed))
    text = to_json(score)
    back = from_json(text)
    assert back == score
    assert to_json(back) == text


def test_json_is_deterministic():
    s = random_score(np.random.default_rng(3))
    assert to_json(s) == to_json(s)


def test_missing_tpqn():
    doc = json.loads(to_json(Score()))
    del doc["tpqn"]
    with pytest.raises(SchemaError) as err:
        from_json(json.dumps(doc))
    assert err.value.path == "/tpqn"


def test_bad_note_duration_names_path():
    doc = json.loads(to_json(one_note_score(0, 96)))
    doc["instruments"][0]["notes"][0]["end_ticks"] = 0
    with pytest.raises(SchemaError) as err:
        from_json(json.dumps(doc))
    assert err.value.path == "/instruments/0/notes/0/end_ticks"


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d.update(tpqn="96"), "/tpqn"),
    (lambda d: d.update(tempo_map=[]), "/tempo_map"),
    (lambda d: d["tempo_map"][0].update(bpm=-1), "/tempo_map/0/bpm"),
    (lambda d: d["time_sig_map"][0].update(denominator=3), "/time_sig_map/0/denominator"),
    (lambda d: d["instruments"][0].update(is_drum=1), "/instruments/0/is_drum"),
    (lambda d: d["instruments"][0]["notes"][0].update(pitch_name="D4"), "/instruments/0/notes/0/pitch_name"),
    (lambda d: d["instruments"][0]["notes"][0].pop("velocity"), "/instruments/0/notes/0/velocity"),
])
def test_schema_violations(mutate, path):
    doc = json.loads(to_json(one_note_score(0, 96)))
    mutate(doc)
    with pytest.raises(SchemaError) as err:
        from_json(json.dumps(doc))
    assert err.value.path == path


def test_invalid_json_text():
    with pytest.raises(SchemaError):
        from_json("{not json")
