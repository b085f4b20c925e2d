"""
Typed errors for the toolkit.

Every error is a ValueError so callers that only care about "bad input" can catch that,
while the pipeline catches AnalysisError to isolate per-piece failures.
"""

from typing import Optional


class AnalysisError(ValueError):
    """Base class for all toolkit errors."""


# ============================================================================
# CORPUS
# ============================================================================

class CorpusError(AnalysisError):
    """Ingestion or symbolization failure for a single piece."""


class MalformedHeader(CorpusError):
    pass


class UnsupportedTimeDivision(CorpusError):
    pass


class UnsupportedFormat(CorpusError):
    pass


class TruncatedTrack(CorpusError):
    pass


class MalformedTrack(CorpusError):
    """Track bytes that are present but do not form valid events."""


class MissingColumn(CorpusError):
    pass


class UnparsableRow(CorpusError):
    def __init__(self, row_index: int, reason: str) -> None:
        super().__init__(f"row {row_index}: {reason}")
        self.row_index = row_index


class EmptyPiece(CorpusError):
    pass


class TooFewEvents(CorpusError):
    pass


class PieceMismatch(CorpusError):
    pass


# ============================================================================
# STATISTICAL LEARNING
# ============================================================================

class ModelError(AnalysisError):
    pass


class InvalidSymbol(ModelError):
    pass


class NonpositiveProbability(ModelError):
    pass


class AlphabetMismatch(ModelError):
    pass


class AbsoluteContinuityViolation(ModelError):
    pass


class EmptySequence(ModelError):
    pass


# ============================================================================
# DYNAMICS / EMBEDDING
# ============================================================================

class DynamicsError(AnalysisError):
    pass


class EmptyInput(DynamicsError):
    pass


class InsufficientPieces(DynamicsError):
    pass


class EmbeddingError(AnalysisError):
    pass


class TooFewRows(EmbeddingError):
    pass


class NonFiniteInput(EmbeddingError):
    pass


# ============================================================================
# ACOUSTICS
# ============================================================================

class AcousticsError(AnalysisError):
    pass


class ZeroVariance(AcousticsError):
    pass


class CutoffTooHigh(AcousticsError):
    pass


class TooShort(AcousticsError):
    pass


class TooFewCycles(AcousticsError):
    pass


class EmptyGroup(AcousticsError):
    pass


class EnvelopeInvariantError(AcousticsError):
    """An envelope broke non-negativity or its band limit."""


# ============================================================================
# CONFIG / PIPELINE
# ============================================================================

class ConfigError(AnalysisError):
    """Configuration problem; `key` is the dotted path of the offending key."""

    def __init__(self, key: str, message: Optional[str] = None) -> None:
        self.key = key
        super().__init__(f"{key}: {message}" if message else key)


class UnknownKey(ConfigError):
    pass


class MissingRequired(ConfigError):
    pass


class BadValue(ConfigError):
    pass


class PipelineError(AnalysisError):
    """Stage-fatal condition (empty corpus, unwritable output directory)."""
