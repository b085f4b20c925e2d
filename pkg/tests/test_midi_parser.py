import struct

import numpy as np
import pytest

from builders import header_chunk, midi_bytes, note_events, tempo_event, track_chunk, vlq
from core.corpus.midi_parser import parse_midi
from core.errors import (
    CorpusError,
    MalformedHeader,
    MalformedTrack,
    TruncatedTrack,
    UnsupportedFormat,
    UnsupportedTimeDivision,
)


def test_single_note_default_tempo():
    piece = parse_midi(midi_bytes([(0, 480, 60)]), piece_id="one")
    assert piece.id == "one"
    assert len(piece.events) == 1
    event = piece.events[0]
    assert event.onset == 0.0
    assert event.duration == pytest.approx(0.5, abs=1e-12)
    assert event.pitch == 60
    assert event.velocity == 100


def test_tempo_event_scales_duration():
    # 480 ticks at 300000 us per quarter with 480 ticks per quarter
    piece = parse_midi(midi_bytes([(0, 480, 60)], tempo=300000))
    assert piece.events[0].duration == pytest.approx(0.3, abs=1e-12)


def test_tempo_change_mid_piece():
    events = [(0, tempo_event(500000)), (480, tempo_event(250000))] + note_events([(0, 480, 60), (480, 480, 62)])
    data = header_chunk() + track_chunk(events)
    piece = parse_midi(data)
    first, second = piece.events
    assert first.duration == pytest.approx(0.5)
    assert second.onset == pytest.approx(0.5)
    assert second.duration == pytest.approx(0.25)


def test_format1_tempo_track_applies_to_all_tracks():
    tempo_track = track_chunk([(0, tempo_event(1000000))])
    notes = track_chunk(note_events([(480, 480, 64)]))
    piece = parse_midi(header_chunk(1, 2) + tempo_track + notes)
    assert piece.events[0].onset == pytest.approx(1.0)
    assert piece.events[0].duration == pytest.approx(1.0)


def test_velocity_zero_note_on_is_note_off_and_running_status():
    # note-on 60, then running status: 60 vel 0 (off), 62 vel 90, 62 vel 0
    body = vlq(0) + bytes([0x90, 60, 80]) + vlq(240) + bytes([60, 0]) + vlq(0) + bytes([62, 90]) + vlq(240) + bytes([62, 0])
    body += vlq(0) + b"\xff\x2f\x00"
    data = header_chunk() + b"MTrk" + struct.pack(">L", len(body)) + body
    piece = parse_midi(data)
    assert [e.pitch for e in piece.events] == [60, 62]
    assert [e.velocity for e in piece.events] == [80, 90]
    assert piece.events[1].onset == pytest.approx(0.25)


def test_unterminated_note_closed_at_end_of_track():
    events = [(0, bytes([0x90, 67, 100])), (960, bytes([0xFF, 0x01, 0x00]))]
    piece = parse_midi(header_chunk() + track_chunk(events))
    assert len(piece.events) == 1
    assert piece.events[0].duration == pytest.approx(1.0)


def test_chord_events_sorted_by_pitch():
    piece = parse_midi(midi_bytes([(0, 480, 67), (0, 480, 60), (0, 480, 64)]))
    assert [e.pitch for e in piece.events] == [60, 64, 67]


def test_track_length_past_end_is_truncated():
    data = midi_bytes([(0, 480, 60)])
    with pytest.raises(TruncatedTrack):
        parse_midi(data[:-3])


def test_event_cut_mid_way_is_truncated():
    body = vlq(0) + bytes([0x90, 60])
    data = header_chunk() + b"MTrk" + struct.pack(">L", len(body)) + body
    with pytest.raises(TruncatedTrack):
        parse_midi(data)


def test_bad_magic():
    with pytest.raises(MalformedHeader):
        parse_midi(b"RIFF" + midi_bytes([(0, 480, 60)])[4:])


def test_smpte_division_rejected():
    data = b"MThd" + struct.pack(">LHHH", 6, 0, 1, 0xE728) + track_chunk([])
    with pytest.raises(UnsupportedTimeDivision):
        parse_midi(data)


def test_format_2_rejected():
    with pytest.raises(UnsupportedFormat):
        parse_midi(header_chunk(2, 1) + track_chunk([]))


def test_data_byte_without_status():
    body = vlq(0) + bytes([60, 100])
    data = header_chunk() + b"MTrk" + struct.pack(">L", len(body)) + body
    with pytest.raises(MalformedTrack):
        parse_midi(data)


def test_arbitrary_bytes_only_raise_typed_errors():
    rng = np.random.default_rng(3)
    valid = midi_bytes([(0, 240, 60), (240, 240, 62), (480, 240, 64)], tempo=400000)
    for trial in range(300):
        if trial % 2:
            data = bytes(rng.integers(0, 256, size=int(rng.integers(0, 80)), dtype=np.uint8))
        else:
            mutated = bytearray(valid)
            for _ in range(3):
                mutated[int(rng.integers(0, len(mutated)))] = int(rng.integers(0, 256))
            data = bytes(mutated[: int(rng.integers(10, len(mutated) + 1))])
        try:
            parse_midi(data)
        except CorpusError:
            pass
