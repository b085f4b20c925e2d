"""
Core Schema Definitions for the Music Dynamics Toolkit

Symbolic data flows through these models:
  (1) MIDI / CSV → Piece (NoteEvent list + metadata)
  (2) Piece → SymbolSequence (pitch, rhythm, pitch-rhythm)
  (3) SymbolSequence → DynamicsSeries (surprise, Bayesian surprise, entropy per event)
  (4) DynamicsSeries → FeatureMatrix → EmbeddedPoint

Audio-side models (Waveform, EnvelopeDecomposition, Scalogram, CycleStats) hold numpy arrays.
"""

from typing import List, Optional, Dict, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .schema_config import Domain, LearningMode, Measure, UNKNOWN


# ============================================================================
# CORPUS
# ============================================================================

class NoteEvent(BaseModel):
    """One sounded note, times in seconds."""
    model_config = ConfigDict(frozen=True)

    onset: float = Field(..., ge=0.0, allow_inf_nan=False, description="Onset time in seconds")
    duration: float = Field(..., gt=0.0, allow_inf_nan=False, description="Duration in seconds")
    pitch: int = Field(..., ge=0, le=127, description="MIDI note number")
    velocity: int = Field(64, ge=0, le=127)


class PieceMetadata(BaseModel):
    """Annotations bound to a piece through the corpus manifest."""
    performer: str = UNKNOWN
    year: int = Field(0, ge=0)
    style: str = UNKNOWN
    instrument: str = UNKNOWN

    @property
    def decade(self) -> int:
        return self.year - self.year % 10


class Piece(BaseModel):
    """
    A parsed performance. Events are kept sorted by onset, ties by pitch.
    Events may be empty straight out of a parser; analysis admits only non-empty pieces.
    """
    id: str = Field(..., description="Unique within the corpus")
    performer: str = UNKNOWN
    year: int = Field(0, ge=0, description="Performance year (0 when unknown)")
    style: str = UNKNOWN
    instrument: str = UNKNOWN
    events: List[NoteEvent] = Field(default_factory=list)

    @field_validator("events")
    @classmethod
    def _sort_events(cls, events: List[NoteEvent]) -> List[NoteEvent]:
        return sorted(events, key=lambda e: (e.onset, e.pitch))

    @property
    def decade(self) -> int:
        return self.year - self.year % 10

    @property
    def metadata(self) -> PieceMetadata:
        return PieceMetadata(
            performer=self.performer, year=self.year, style=self.style, instrument=self.instrument
        )

    def with_metadata(self, metadata: PieceMetadata, piece_id: Optional[str] = None) -> "Piece":
        return self.model_copy(
            update={**metadata.model_dump(), "id": piece_id if piece_id is not None else self.id}
        )

    def group_label(self, key: str) -> str:
        """Label of this piece under a grouping key (decade, style, instrument, performer)."""
        if key == "decade":
            return str(self.decade)
        return str(getattr(self, key))


class SymbolSequence(BaseModel):
    """Integer-coded event stream of one piece in one domain."""
    piece_id: str
    domain: Domain
    symbols: List[int] = Field(default_factory=list)
    alphabet: List[str] = Field(
        default_factory=list,
        description="alphabet[i] is the human-readable label of symbol i",
    )
    onset_index: Optional[List[int]] = Field(
        None,
        description="Pitch sequences only: merged onset group of each note",
    )

    @property
    def alphabet_size(self) -> int:
        return len(self.alphabet)

    @model_validator(mode="after")
    def _check_alphabet(self) -> "SymbolSequence":
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet labels must be unique")
        k = len(self.alphabet)
        if any(s < 0 or s >= k for s in self.symbols):
            raise ValueError("every symbol must be < alphabet size")
        if self.onset_index is not None and len(self.onset_index) != len(self.symbols):
            raise ValueError("onset_index must align with symbols")
        return self

    def label_map(self) -> Dict[int, str]:
        return dict(enumerate(self.alphabet))

    def labels(self) -> List[str]:
        return [self.alphabet[s] for s in self.symbols]


# ============================================================================
# STATISTICAL LEARNING
# ============================================================================

class PredictiveDistribution(BaseModel):
    """P(next | context) over a level's alphabet."""
    probs: List[float]
    context: Tuple[int, ...] = ()

    @field_validator("probs")
    @classmethod
    def _check_probs(cls, probs: List[float]) -> List[float]:
        if not probs:
            raise ValueError("distribution must be non-empty")
        if any(p < 0 for p in probs):
            raise ValueError("probabilities must be non-negative")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")
        return probs

    @property
    def size(self) -> int:
        return len(self.probs)


class ChunkNode(BaseModel):
    """A pair of symbols promoted to one symbol of the next level."""
    chunk_id: int
    children: Tuple[int, int]
    level_index: int = Field(..., ge=0)
    created_at: int = Field(..., ge=0, description="Level-0 event index when the gate fired")


class EventRecord(BaseModel):
    """What the learner reports for one observed event."""
    surprise_bits: float
    bayesian_surprise_bits: float
    entropy_bits: float


class HbslConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(1.0, gt=0.0, description="Dirichlet pseudo-count per cell")
    c: float = Field(5.0, gt=0.0, description="Chunk gate constant")
    max_levels: int = Field(3, ge=1)
    order: int = Field(1, ge=1, description="Markov order")
    learning_mode: LearningMode = LearningMode.ONLINE
    reliability_reference: str = Field(
        "median",
        pattern="^(median|mean)$",
        description="Statistic of past reliabilities that normalizes the gate",
    )


class RhythmConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    bins_per_octave: int = Field(4, ge=1, description="IOI log-ratio bins per doubling")
    clamp: int = Field(8, ge=0, description="Largest absolute rhythm bin")


# ============================================================================
# DYNAMICS / EMBEDDING
# ============================================================================

class DynamicsSeries(BaseModel):
    """One measure over the level-0 events of one piece in one domain."""
    piece_id: str
    domain: Domain
    measure: Measure
    values: List[float]

    @field_validator("values")
    @classmethod
    def _finite(cls, values: List[float]) -> List[float]:
        if not all(np.isfinite(values)):
            raise ValueError("dynamics values must be finite")
        return values


class RowMetadata(BaseModel):
    piece_id: str
    performer: str = UNKNOWN
    year: int = 0
    decade: int = 0
    style: str = UNKNOWN
    instrument: str = UNKNOWN

    @classmethod
    def from_piece(cls, piece: Piece) -> "RowMetadata":
        return cls(
            piece_id=piece.id,
            performer=piece.performer,
            year=piece.year,
            decade=piece.decade,
            style=piece.style,
            instrument=piece.instrument,
        )


class FeatureMatrix(BaseModel):
    """Length-normalized series, one row per piece, for one (domain, measure) selection."""
    domain: Domain
    measure: Measure
    rows: List[List[float]]
    metadata: List[RowMetadata]

    @model_validator(mode="after")
    def _check_shape(self) -> "FeatureMatrix":
        if len(self.rows) != len(self.metadata):
            raise ValueError("metadata row count must equal matrix row count")
        if len({len(r) for r in self.rows}) > 1:
            raise ValueError("all rows must have the same length")
        return self

    @property
    def row_length(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def as_array(self) -> np.ndarray:
        return np.asarray(self.rows, dtype=float)


class TsneConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    perplexity: float = Field(2.0, gt=0.0)
    early_exaggeration: float = Field(20.0, gt=0.0)
    seed: int = Field(40, ge=0)
    iterations: int = Field(1000, gt=0)
    exaggeration_iters: int = Field(250, ge=0)
    learning_rate: float = Field(200.0, gt=0.0)
    initial_momentum: float = Field(0.5, gt=0.0, lt=1.0)
    final_momentum: float = Field(0.8, gt=0.0, lt=1.0)
    momentum_switch_iter: int = Field(250, ge=0)
    init: str = Field("random", pattern="^(random|pca)$")


class AcousticsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sample_rate: int = Field(16000, gt=80, description="Synthesis rate in Hz")
    cutoff: float = Field(40.0, gt=0.0, description="Modulator / carrier split in Hz")
    prominence: float = Field(0.05, ge=0.0, lt=1.0, description="Trough prominence, fraction of envelope range")
    frame_rate: float = Field(200.0, gt=0.0, description="Envelope rate after decimation")
    iterations: int = Field(10, ge=1, description="Demodulation refinement passes")
    n_bands: int = Field(24, ge=2)
    fmin: float = Field(0.1, gt=0.0)
    fmax: float = Field(40.0, gt=0.0)
    write_scalograms: bool = False
    write_debug_audio: bool = False

    @model_validator(mode="after")
    def _check_bands(self) -> "AcousticsConfig":
        if self.fmin >= self.fmax:
            raise ValueError("fmin must be below fmax")
        if self.fmax > self.frame_rate / 2:
            raise ValueError("fmax must not exceed half the frame rate")
        if self.cutoff >= self.sample_rate / 2:
            raise ValueError("cutoff must be below half the sample rate")
        return self


class EmbeddedPoint(BaseModel):
    piece_id: str
    x: float
    y: float
    decade: int = 0
    performer: str = UNKNOWN
    style: str = UNKNOWN
    instrument: str = UNKNOWN

    @model_validator(mode="after")
    def _finite(self) -> "EmbeddedPoint":
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise ValueError("coordinates must be finite")
        return self


# ============================================================================
# ACOUSTICS
# ============================================================================

class _ArrayModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)


class Waveform(_ArrayModel):
    sample_rate: int = Field(16000, gt=80, description="Must resolve the 40 Hz cutoff")
    samples: np.ndarray

    @field_validator("samples", mode="before")
    @classmethod
    def _as_array(cls, samples) -> np.ndarray:
        arr = np.asarray(samples, dtype=float)
        if arr.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        return arr

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


class EnvelopeDecomposition(_ArrayModel):
    """Slow non-negative modulator and fast carrier of a signal."""
    envelope: np.ndarray
    carrier: np.ndarray = Field(default_factory=lambda: np.zeros(0))
    cutoff: float = 40.0
    sample_rate: float = Field(..., gt=0, description="Rate of the envelope samples")

    @field_validator("envelope", "carrier", mode="before")
    @classmethod
    def _as_array(cls, values) -> np.ndarray:
        return np.asarray(values, dtype=float)


class Scalogram(_ArrayModel):
    frequencies: np.ndarray  # Hz, strictly increasing
    power: np.ndarray  # bands x frames
    frame_rate: float

    def band_means(self) -> np.ndarray:
        """Time-mean power per band."""
        if self.power.shape[1] == 0:
            return np.zeros(len(self.frequencies))
        return self.power.mean(axis=1)


class Spectrum(_ArrayModel):
    frequencies: np.ndarray
    power: np.ndarray

    @property
    def peak_frequency(self) -> float:
        return float(self.frequencies[int(np.argmax(self.power))]) if len(self.power) else 0.0


class CycleStats(_ArrayModel):
    trough_indices: np.ndarray
    cycle_lengths: np.ndarray  # seconds
    horizontal_rates: np.ndarray
    density: np.ndarray  # probability per bin
    bin_edges: np.ndarray

    @property
    def bin_centers(self) -> np.ndarray:
        return (self.bin_edges[:-1] + self.bin_edges[1:]) / 2.0

    @property
    def mean_cycle_length(self) -> float:
        return float(np.mean(self.cycle_lengths)) if len(self.cycle_lengths) else 0.0
