"""
Symbolization of pieces into pitch, rhythm and pitch-rhythm sequences.

Rhythm symbols are tempo-invariant log-ratio bins of inter-onset intervals:
    symbol_i = round(bins_per_octave * log2(IOI_i / median IOI)), clamped to [-clamp, clamp]
Notes starting within ONSET_MERGE_SEC of a group's first onset share one onset.
"""

import json
from typing import List, Tuple

import numpy as np

from ..errors import CorpusError, EmptyPiece, PieceMismatch, TooFewEvents
from ..schema.core_schema import Piece, SymbolSequence
from ..schema.schema_config import Domain, PitchMode

ONSET_MERGE_SEC = 0.001


def onset_groups(piece: Piece) -> Tuple[List[int], List[float]]:
    """Group index of each event, and the onset time of each group."""
    group_of: List[int] = []
    group_onsets: List[float] = []
    for event in piece.events:
        if not group_onsets or event.onset - group_onsets[-1] > ONSET_MERGE_SEC:
            group_onsets.append(event.onset)
        group_of.append(len(group_onsets) - 1)
    return group_of, group_onsets


def _encode(values: List, labeler=str) -> Tuple[List[int], List[str]]:
    """Dense ids over the sorted distinct values."""
    distinct = sorted(set(values))
    index = {v: i for i, v in enumerate(distinct)}
    return [index[v] for v in values], [labeler(v) for v in distinct]


def symbolize_pitch(piece: Piece, mode: PitchMode = PitchMode.MIDI_NUMBER) -> SymbolSequence:
    """One symbol per note: MIDI number, or pitch class in pitch_class mode."""
    if not piece.events:
        raise EmptyPiece(f"{piece.id}: no events")
    mode = PitchMode(mode)
    pitches = [e.pitch if mode == PitchMode.MIDI_NUMBER else e.pitch % 12 for e in piece.events]
    symbols, alphabet = _encode(pitches)
    group_of, _ = onset_groups(piece)
    return SymbolSequence(
        piece_id=piece.id,
        domain=Domain.PITCH,
        symbols=symbols,
        alphabet=alphabet,
        onset_index=group_of,
    )


def rhythm_bins(iois: np.ndarray, bins_per_octave: int = 4, clamp: int = 8) -> np.ndarray:
    """Log-ratio bins of positive IOIs relative to their median."""
    ratios = np.log2(iois / np.median(iois))
    return np.clip(np.round(bins_per_octave * ratios), -clamp, clamp).astype(int)


def symbolize_rhythm(piece: Piece, bins_per_octave: int = 4, clamp: int = 8) -> SymbolSequence:
    """One symbol per inter-onset interval between distinct (merged) onsets."""
    if bins_per_octave < 1 or clamp < 0:
        raise CorpusError("bins_per_octave must be >= 1 and clamp >= 0")
    _, group_onsets = onset_groups(piece)
    if len(group_onsets) < 2:
        raise TooFewEvents(f"{piece.id}: rhythm needs at least 2 distinct onsets")
    iois = np.diff(np.asarray(group_onsets, dtype=float))
    symbols, alphabet = _encode(rhythm_bins(iois, bins_per_octave, clamp).tolist())
    return SymbolSequence(piece_id=piece.id, domain=Domain.RHYTHM, symbols=symbols, alphabet=alphabet)


def symbolize_joint(pitch_seq: SymbolSequence, rhythm_seq: SymbolSequence) -> SymbolSequence:
    """
    Pair each IOI with the note it leads into: joint symbol i combines rhythm symbol i with
    the pitch of onset group i+1 (its highest note when the group is a chord).
    """
    if pitch_seq.piece_id != rhythm_seq.piece_id:
        raise PieceMismatch(f"{pitch_seq.piece_id!r} != {rhythm_seq.piece_id!r}")
    if pitch_seq.domain != Domain.PITCH or rhythm_seq.domain != Domain.RHYTHM:
        raise PieceMismatch("expected a pitch sequence and a rhythm sequence")

    n = len(rhythm_seq.symbols)
    if pitch_seq.onset_index is not None:
        top_pitch = {}
        for symbol, group in zip(pitch_seq.symbols, pitch_seq.onset_index):
            top_pitch[group] = symbol  # same-onset notes are listed in ascending pitch
        if len(top_pitch) != n + 1:
            raise PieceMismatch("pitch onsets and rhythm intervals do not align")
        leading = [top_pitch[i + 1] for i in range(n)]
    else:
        if len(pitch_seq.symbols) != n + 1:
            raise PieceMismatch("pitch sequence must be one symbol longer than rhythm sequence")
        leading = pitch_seq.symbols[1:]

    pairs = list(zip(leading, rhythm_seq.symbols))
    symbols, alphabet = _encode(
        pairs, labeler=lambda p: f"{pitch_seq.alphabet[p[0]]}|{rhythm_seq.alphabet[p[1]]}"
    )
    return SymbolSequence(
        piece_id=pitch_seq.piece_id, domain=Domain.PITCH_RHYTHM, symbols=symbols, alphabet=alphabet
    )


def symbol_sequence_json(seq: SymbolSequence) -> str:
    """Symbol-sequence document: piece_id, domain, K, alphabet, symbols."""
    return json.dumps(
        {
            "piece_id": seq.piece_id,
            "domain": seq.domain.value,
            "K": seq.alphabet_size,
            "alphabet": {str(i): label for i, label in enumerate(seq.alphabet)},
            "symbols": seq.symbols,
        },
        sort_keys=True,
    )
