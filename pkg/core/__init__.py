"""
Core modules for the Music Dynamics Toolkit.

This package exposes a clean public API while the actual implementation
is organized into subpackages:

- core.schema:     Pydantic schemas (Piece, SymbolSequence, configs) and the run config
- core.corpus:     MIDI / CSV ingestion, manifest, symbolization
- core.learning:   information measures, Dirichlet-Markov levels, chunking hierarchy
- core.analysis:   dynamics, t-SNE embedding, envelope acoustics, cycle rates
- core.pipeline:   AnalysisRunner and report writers
"""

__version__ = "0.1.0"

# Core schemas
from .schema.core_schema import (
    NoteEvent,
    Piece,
    SymbolSequence,
    HbslConfig,
    TsneConfig,
    AcousticsConfig,
    DynamicsSeries,
    FeatureMatrix,
    EmbeddedPoint,
)
from .schema.run_config import RunConfig, validate_config

# Core operations
from .corpus import parse_midi, parse_corpus_csv, symbolize_pitch, symbolize_rhythm, symbolize_joint
from .learning import HbslModel, learn_hierarchy, information_content, entropy, kl_divergence
from .analysis import per_piece_dynamics, build_feature_matrix, interpolate_series, tsne, demodulate
from .pipeline import AnalysisRunner, RunReport

__all__ = [
    "__version__",
    "NoteEvent",
    "Piece",
    "SymbolSequence",
    "HbslConfig",
    "TsneConfig",
    "AcousticsConfig",
    "DynamicsSeries",
    "FeatureMatrix",
    "EmbeddedPoint",
    "RunConfig",
    "validate_config",
    "parse_midi",
    "parse_corpus_csv",
    "symbolize_pitch",
    "symbolize_rhythm",
    "symbolize_joint",
    "HbslModel",
    "learn_hierarchy",
    "information_content",
    "entropy",
    "kl_divergence",
    "per_piece_dynamics",
    "build_feature_matrix",
    "interpolate_series",
    "tsne",
    "demodulate",
    "AnalysisRunner",
    "RunReport",
]
