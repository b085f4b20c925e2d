"""
Per-note CSV ingestion and the canonical piece CSV.

Any per-note export works as long as the configured columns exist; metadata columns are
optional. The canonical CSV (onset_sec, duration_sec, pitch, velocity) round-trips exactly.
"""

import io
import logging
from typing import List, Optional, TextIO, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..errors import EmptyPiece, MissingColumn, UnparsableRow
from ..schema.core_schema import NoteEvent, Piece, PieceMetadata
from .manifest import normalize_metadata

logger = logging.getLogger(__name__)

CANONICAL_COLUMNS = ["onset_sec", "duration_sec", "pitch", "velocity"]


class CsvSchema(BaseModel):
    """Column names of a per-note CSV export."""
    model_config = ConfigDict(extra="forbid")

    onset: str = "onset_sec"
    duration: str = "duration_sec"
    pitch: str = "pitch"
    velocity: Optional[str] = Field("velocity", description="Optional; 64 when absent")
    performer: Optional[str] = "performer"
    year: Optional[str] = "year"
    style: Optional[str] = "style"
    instrument: Optional[str] = "instrument"


def _parse_int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _metadata_from_row(row: pd.Series, schema: CsvSchema) -> PieceMetadata:
    def cell(column: Optional[str]) -> str:
        if column is None or column not in row.index:
            return ""
        return str(row[column]).strip()

    year_text = cell(schema.year)
    try:
        year = _parse_int(year_text) if year_text else 0
    except ValueError:
        logger.warning("unparsable year %r, using 0", year_text)
        year = 0
    return normalize_metadata(
        performer=cell(schema.performer),
        year=max(year, 0),
        style=cell(schema.style),
        instrument=cell(schema.instrument),
    )


def parse_corpus_csv(
    source: Union[TextIO, str],
    schema: Optional[CsvSchema] = None,
    piece_id: str = "",
    metadata: Optional[PieceMetadata] = None,
    warnings: Optional[List[str]] = None,
) -> Piece:
    """
    Read one piece from a per-note CSV.

    Args:
        source: open text stream or CSV text
        schema: column names (canonical names by default)
        piece_id: id given to the piece
        metadata: overrides metadata read from the file
        warnings: optional sink collecting one message per skipped row

    Raises:
        MissingColumn: a configured onset/duration/pitch column is absent
        EmptyPiece: no row could be parsed
    """
    schema = schema or CsvSchema()
    if isinstance(source, str):
        source = io.StringIO(source)
    frame = pd.read_csv(source, dtype=str, keep_default_na=False, skipinitialspace=True)
    frame.columns = [c.strip() for c in frame.columns]

    for column in (schema.onset, schema.duration, schema.pitch):
        if column not in frame.columns:
            raise MissingColumn(f"column {column!r} not found (have {list(frame.columns)})")
    has_velocity = schema.velocity is not None and schema.velocity in frame.columns

    events: List[NoteEvent] = []
    for i, (_, row) in enumerate(frame.iterrows(), start=1):
        try:
            events.append(
                NoteEvent(
                    onset=float(row[schema.onset]),
                    duration=float(row[schema.duration]),
                    pitch=_parse_int(row[schema.pitch]),
                    velocity=_parse_int(row[schema.velocity]) if has_velocity else 64,
                )
            )
        except (ValueError, ValidationError) as e:
            error = UnparsableRow(i, str(e).splitlines()[0])
            message = f"{piece_id or '<csv>'}: skipped {error}"
            logger.warning(message)
            if warnings is not None:
                warnings.append(message)

    if not events:
        raise EmptyPiece(f"{piece_id or '<csv>'}: no parsable note rows")

    if metadata is None:
        metadata = _metadata_from_row(frame.iloc[0], schema)
    return Piece(id=piece_id, events=events, **metadata.model_dump())


def write_piece_csv(piece: Piece) -> str:
    """Canonical CSV text of a piece's events (floats written at full precision)."""
    frame = pd.DataFrame(
        [(e.onset, e.duration, e.pitch, e.velocity) for e in piece.events],
        columns=CANONICAL_COLUMNS,
    )
    return frame.to_csv(index=False, lineterminator="\n")
