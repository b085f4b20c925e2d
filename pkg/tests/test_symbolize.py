import json

import numpy as np
import pytest

from builders import piece_from
from core.corpus.symbolize import (
    symbol_sequence_json,
    symbolize_joint,
    symbolize_pitch,
    symbolize_rhythm,
)
from core.errors import EmptyPiece, PieceMismatch, TooFewEvents
from core.schema.core_schema import NoteEvent, Piece, SymbolSequence
from core.schema.schema_config import Domain, PitchMode


def test_pitch_symbols_dense_over_distinct_pitches():
    seq = symbolize_pitch(piece_from([60, 62, 60], [0.5, 0.5]))
    assert seq.symbols == [0, 1, 0]
    assert seq.alphabet == ["60", "62"]
    assert seq.alphabet_size == 2
    assert seq.domain == Domain.PITCH


def test_pitch_class_mode_folds_octaves():
    seq = symbolize_pitch(piece_from([60, 72], [0.5]), PitchMode.PITCH_CLASS)
    assert seq.symbols == [0, 0]
    assert seq.alphabet_size == 1


def test_midi_labels_mod_12_match_pitch_classes():
    rng = np.random.default_rng(12)
    for _ in range(20):
        pitches = rng.integers(36, 96, size=30).tolist()
        piece = piece_from(pitches, [0.25] * 29)
        midi = symbolize_pitch(piece, PitchMode.MIDI_NUMBER)
        classes = symbolize_pitch(piece, PitchMode.PITCH_CLASS)
        folded = [str(int(midi.alphabet[s]) % 12) for s in midi.symbols]
        assert folded == [classes.alphabet[s] for s in classes.symbols]


def test_pitch_empty_piece():
    with pytest.raises(EmptyPiece):
        symbolize_pitch(Piece(id="e"))


def test_isochronous_rhythm_is_all_zero():
    seq = symbolize_rhythm(piece_from([60] * 6, [0.5] * 5))
    assert seq.labels() == ["0"] * 5
    assert seq.alphabet_size == 1


def test_rhythm_log_ratio_bins():
    seq = symbolize_rhythm(piece_from([60, 62, 64, 65], [0.25, 0.5, 0.5]))
    assert seq.labels() == ["-4", "0", "0"]


def test_rhythm_bins_are_clamped():
    seq = symbolize_rhythm(piece_from([60] * 4, [0.5, 0.5, 100.0]), clamp=3)
    assert seq.labels() == ["0", "0", "3"]


def test_rhythm_is_tempo_invariant():
    iois = [0.2, 0.4, 0.1, 0.2, 0.3]
    slow = symbolize_rhythm(piece_from([60] * 6, iois))
    fast = symbolize_rhythm(piece_from([60] * 6, [x * 0.5 for x in iois]))
    assert slow.symbols == fast.symbols


def test_rhythm_merges_simultaneous_onsets():
    events = [
        NoteEvent(onset=0.0, duration=0.4, pitch=60),
        NoteEvent(onset=0.0, duration=0.4, pitch=64),
        NoteEvent(onset=0.5, duration=0.4, pitch=62),
    ]
    seq = symbolize_rhythm(Piece(id="c", events=events))
    assert len(seq.symbols) == 1


def test_rhythm_one_event():
    with pytest.raises(TooFewEvents):
        symbolize_rhythm(piece_from([60], []))


def test_joint_pairs_note_with_preceding_interval():
    pitch = SymbolSequence(piece_id="p", domain=Domain.PITCH, symbols=[0, 1, 0], alphabet=["a", "b"])
    rhythm = SymbolSequence(piece_id="p", domain=Domain.RHYTHM, symbols=[0, 0], alphabet=["0"])
    joint = symbolize_joint(pitch, rhythm)
    assert joint.labels() == ["b|0", "a|0"]
    assert joint.alphabet_size == 2
    assert len(joint.symbols) == len(rhythm.symbols)


def test_joint_distinct_rhythms_make_distinct_symbols():
    pitch = SymbolSequence(piece_id="p", domain=Domain.PITCH, symbols=[0, 0, 0], alphabet=["a"])
    rhythm = SymbolSequence(piece_id="p", domain=Domain.RHYTHM, symbols=[0, 1], alphabet=["x", "y"])
    assert symbolize_joint(pitch, rhythm).alphabet_size == 2


def test_joint_uses_top_note_of_chord():
    events = [
        NoteEvent(onset=0.0, duration=0.4, pitch=60),
        NoteEvent(onset=0.5, duration=0.4, pitch=64),
        NoteEvent(onset=0.5, duration=0.4, pitch=67),
    ]
    piece = Piece(id="c", events=events)
    joint = symbolize_joint(symbolize_pitch(piece), symbolize_rhythm(piece))
    assert joint.labels() == ["67|0"]


def test_joint_piece_mismatch():
    a = symbolize_pitch(piece_from([60, 62], [0.5], piece_id="a"))
    b = symbolize_rhythm(piece_from([60, 62], [0.5], piece_id="b"))
    with pytest.raises(PieceMismatch):
        symbolize_joint(a, b)


def test_sequence_json_document():
    seq = symbolize_pitch(piece_from([62, 60], [0.5], piece_id="doc"))
    doc = json.loads(symbol_sequence_json(seq))
    assert doc == {
        "piece_id": "doc",
        "domain": "pitch",
        "K": 2,
        "alphabet": {"0": "60", "1": "62"},
        "symbols": [1, 0],
    }
