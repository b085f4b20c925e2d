"""
Per-piece information dynamics and the corpus feature matrix.

Each piece is symbolized in three domains, each sequence is learned by a fresh hierarchy, and
the level-0 records become nine series (3 domains x 3 measures). Series are stretched to the
longest length in a selection by linear interpolation before embedding.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from ..errors import AnalysisError, EmptyInput, InsufficientPieces, TooFewEvents
from ..corpus.symbolize import symbolize_joint, symbolize_pitch, symbolize_rhythm
from ..learning.hbsl_model import HierarchyResult, LabelCounts, learn_hierarchy, transition_tally
from ..schema.core_schema import (
    DynamicsSeries,
    FeatureMatrix,
    HbslConfig,
    Piece,
    RhythmConfig,
    RowMetadata,
    SymbolSequence,
)
from ..schema.schema_config import ALL_DOMAINS, ALL_MEASURES, Domain, LearningMode, Measure, PitchMode

logger = logging.getLogger(__name__)

META_COLUMNS = ["piece_id", "performer", "year", "decade", "style", "instrument"]


def interpolate_series(values: Sequence[float], target_len: int) -> List[float]:
    """Resample a series to target_len points; position j maps to j*(n-1)/(target_len-1)."""
    if len(values) == 0:
        raise EmptyInput("cannot interpolate an empty series")
    if target_len < 1:
        raise EmptyInput(f"target length must be >= 1, got {target_len}")
    n = len(values)
    if target_len == n:
        return [float(v) for v in values]
    if n == 1 or target_len == 1:
        return [float(values[0])] * target_len
    positions = np.arange(target_len) * (n - 1) / (target_len - 1)
    out = np.interp(positions, np.arange(n), np.asarray(values, dtype=float))
    out[0], out[-1] = values[0], values[-1]
    return out.tolist()


@dataclass
class PieceDynamics:
    """Everything learned from one piece."""
    piece_id: str
    sequences: Dict[Domain, SymbolSequence] = field(default_factory=dict)
    results: Dict[Domain, HierarchyResult] = field(default_factory=dict)
    series: List[DynamicsSeries] = field(default_factory=list)


def symbolize_piece(
    piece: Piece,
    rhythm: Optional[RhythmConfig] = None,
    pitch_mode: PitchMode = PitchMode.MIDI_NUMBER,
) -> Dict[Domain, SymbolSequence]:
    """Pitch, rhythm and pitch-rhythm sequences of one piece."""
    rhythm = rhythm or RhythmConfig()
    if len(piece.events) < 2:
        raise TooFewEvents(f"{piece.id}: dynamics need at least 2 events, got {len(piece.events)}")
    pitch_seq = symbolize_pitch(piece, pitch_mode)
    rhythm_seq = symbolize_rhythm(piece, rhythm.bins_per_octave, rhythm.clamp)
    return {
        Domain.PITCH: pitch_seq,
        Domain.RHYTHM: rhythm_seq,
        Domain.PITCH_RHYTHM: symbolize_joint(pitch_seq, rhythm_seq),
    }


def learn_sequences(
    sequences: Mapping[Domain, SymbolSequence],
    hbsl: Optional[HbslConfig] = None,
    priors: Optional[Mapping[Domain, LabelCounts]] = None,
) -> PieceDynamics:
    """Learn each domain with a fresh model; series come out in (domain, measure) order."""
    piece_id = next(iter(sequences.values())).piece_id
    dynamics = PieceDynamics(piece_id=piece_id, sequences=dict(sequences))
    for domain in ALL_DOMAINS:
        seq = sequences[domain]
        result = learn_hierarchy(seq, hbsl, (priors or {}).get(domain))
        dynamics.results[domain] = result
        for measure in ALL_MEASURES:
            dynamics.series.append(
                DynamicsSeries(piece_id=piece_id, domain=domain, measure=measure, values=result.series(measure))
            )
    return dynamics


def per_piece_dynamics(
    piece: Piece,
    hbsl: Optional[HbslConfig] = None,
    rhythm: Optional[RhythmConfig] = None,
    pitch_mode: PitchMode = PitchMode.MIDI_NUMBER,
    priors: Optional[Mapping[Domain, LabelCounts]] = None,
) -> List[DynamicsSeries]:
    """The nine level-0 series of one piece."""
    return learn_sequences(symbolize_piece(piece, rhythm, pitch_mode), hbsl, priors).series


def corpus_dynamics(
    pieces: Iterable[Piece],
    hbsl: Optional[HbslConfig] = None,
    rhythm: Optional[RhythmConfig] = None,
    pitch_mode: PitchMode = PitchMode.MIDI_NUMBER,
    failures: Optional[Dict[str, str]] = None,
) -> Dict[str, PieceDynamics]:
    """
    Dynamics of every piece, keyed by piece id.

    Online mode learns each piece from a flat prior. Corpus-primed mode visits pieces in
    (year, id) order and seeds each piece with the transitions of all strictly earlier years.
    Pieces that cannot be analyzed are skipped and reported in `failures`.
    """
    hbsl = hbsl or HbslConfig()
    primed = hbsl.learning_mode == LearningMode.CORPUS_PRIMED
    ordered = sorted(pieces, key=lambda p: (p.year, p.id) if primed else (0, p.id))

    out: Dict[str, PieceDynamics] = {}
    earlier: Dict[Domain, LabelCounts] = {d: {} for d in ALL_DOMAINS}
    this_year: Dict[Domain, LabelCounts] = {d: {} for d in ALL_DOMAINS}
    current_year = None
    for piece in ordered:
        if primed and piece.year != current_year:
            for domain in ALL_DOMAINS:
                _merge_counts(earlier[domain], this_year[domain])
                this_year[domain] = {}
            current_year = piece.year
        try:
            sequences = symbolize_piece(piece, rhythm, pitch_mode)
            out[piece.id] = learn_sequences(sequences, hbsl, earlier if primed else None)
        except AnalysisError as exc:
            logger.warning("piece %s skipped: %s", piece.id, exc)
            if failures is not None:
                failures[piece.id] = str(exc)
            continue
        if primed:
            for domain, seq in sequences.items():
                transition_tally(seq, hbsl.order, into=this_year[domain])
    return out


def _merge_counts(into: LabelCounts, other: LabelCounts) -> None:
    for context, row in other.items():
        target = into.setdefault(context, {})
        for label, n in row.items():
            target[label] = target.get(label, 0) + n


def _zscore_row(row: List[float]) -> List[float]:
    arr = np.asarray(row, dtype=float)
    sd = arr.std()
    if sd == 0:
        return (arr - arr.mean()).tolist()
    return ((arr - arr.mean()) / sd).tolist()


def build_feature_matrix(
    corpus: Mapping[str, Iterable[DynamicsSeries]],
    domain: Domain,
    measure: Measure,
    metadata: Optional[Mapping[str, RowMetadata]] = None,
    zscore_rows: bool = False,
) -> FeatureMatrix:
    """
    One row per piece for the (domain, measure) selection, ordered by piece id and
    interpolated to the longest series length.
    """
    domain, measure = Domain(domain), Measure(measure)
    selected: Dict[str, List[float]] = {}
    for piece_id, series_list in corpus.items():
        for series in series_list:
            if series.domain == domain and series.measure == measure:
                if not series.values:
                    raise EmptyInput(f"{piece_id}: empty {domain.value}/{measure.value} series")
                selected[piece_id] = series.values
    if len(selected) < 2:
        raise InsufficientPieces(f"{domain.value}/{measure.value}: need at least 2 pieces, got {len(selected)}")

    target = max(len(v) for v in selected.values())
    ids = sorted(selected)
    rows = [interpolate_series(selected[i], target) for i in ids]
    if zscore_rows:
        rows = [_zscore_row(r) for r in rows]
    meta = [(metadata or {}).get(i) or RowMetadata(piece_id=i) for i in ids]
    return FeatureMatrix(domain=domain, measure=measure, rows=rows, metadata=meta)


def dynamics_table(corpus: Mapping[str, Iterable[DynamicsSeries]]) -> pd.DataFrame:
    """Long table: piece_id, domain, measure, event_index, value."""
    records = [
        (s.piece_id, s.domain.value, s.measure.value, i, v)
        for piece_id in sorted(corpus)
        for s in corpus[piece_id]
        for i, v in enumerate(s.values)
    ]
    frame = pd.DataFrame(records, columns=["piece_id", "domain", "measure", "event_index", "value"])
    return frame.sort_values(["piece_id", "domain", "measure", "event_index"], kind="mergesort").reset_index(drop=True)


def feature_matrix_table(matrix: FeatureMatrix) -> pd.DataFrame:
    """Metadata columns first, then t0..t{L-1}."""
    meta = pd.DataFrame([m.model_dump() for m in matrix.metadata], columns=META_COLUMNS)
    values = pd.DataFrame(matrix.rows, columns=[f"t{j}" for j in range(matrix.row_length)])
    return pd.concat([meta, values], axis=1)
