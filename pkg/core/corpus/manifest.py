"""
Corpus manifest: binds piece files to their annotations.

Manifest CSV columns: id, path (required); performer, year, style, instrument (optional).
"""

import logging
from pathlib import Path
from typing import List

import pandas as pd
from pydantic import BaseModel, Field

from ..errors import BadValue, CorpusError, MissingColumn
from ..schema.core_schema import PieceMetadata
from ..schema.schema_config import CORPUS_INSTRUMENTS, CORPUS_STYLES, UNKNOWN

logger = logging.getLogger(__name__)

# Abbreviations used by jazz solo transcription databases
INSTRUMENT_ALIASES = {
    "as": "alto saxophone",
    "bcl": "bass clarinet",
    "bs": "baritone saxophone",
    "cl": "clarinet",
    "cor": "cornet",
    "g": "guitar",
    "p": "piano",
    "ss": "soprano saxophone",
    "tb": "trombone",
    "tp": "trumpet",
    "ts": "tenor saxophone",
    "ts-c": "c melody tenor saxophone",
    "vib": "vibraphone",
    "bass clarinette": "bass clarinet",
}


class ManifestEntry(BaseModel):
    id: str = Field(..., min_length=1)
    path: Path
    metadata: PieceMetadata = Field(default_factory=PieceMetadata)


def _normalize(value: str, vocabulary: List[str], what: str) -> str:
    text = " ".join(value.strip().lower().split())
    if not text or text == UNKNOWN:
        return UNKNOWN
    if what == "instrument":
        text = INSTRUMENT_ALIASES.get(text, text)
    if text not in vocabulary:
        logger.warning("unknown %s %r, using %r", what, value, UNKNOWN)
        return UNKNOWN
    return text


def normalize_metadata(performer: str = "", year: int = 0, style: str = "", instrument: str = "") -> PieceMetadata:
    """Map free-text annotations onto the corpus vocabularies."""
    return PieceMetadata(
        performer=performer.strip() or UNKNOWN,
        year=year,
        style=_normalize(style, CORPUS_STYLES, "style"),
        instrument=_normalize(instrument, CORPUS_INSTRUMENTS, "instrument"),
    )


def read_manifest(path: Path) -> List[ManifestEntry]:
    """
    Read the corpus manifest. Relative file paths resolve against the manifest's directory.

    Raises:
        MissingColumn: id or path column absent
        BadValue: duplicate piece id or unparsable year
    """
    path = Path(path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    frame.columns = [c.strip().lower() for c in frame.columns]
    for column in ("id", "path"):
        if column not in frame.columns:
            raise MissingColumn(f"manifest {path}: column {column!r} not found")

    entries: List[ManifestEntry] = []
    seen = set()
    for i, row in enumerate(frame.to_dict(orient="records"), start=1):
        piece_id = row["id"].strip()
        if piece_id in seen:
            raise BadValue("manifest.id", f"duplicate piece id {piece_id!r} on row {i}")
        seen.add(piece_id)
        year_text = row.get("year", "").strip()
        try:
            year = int(year_text) if year_text else 0
        except ValueError:
            raise BadValue("manifest.year", f"row {i}: {year_text!r} is not a year") from None
        if year < 0:
            raise BadValue("manifest.year", f"row {i}: year {year} is negative")
        file_path = Path(row["path"].strip())
        if not file_path.is_absolute():
            file_path = path.parent / file_path
        entries.append(
            ManifestEntry(
                id=piece_id,
                path=file_path,
                metadata=normalize_metadata(
                    performer=row.get("performer", ""),
                    year=year,
                    style=row.get("style", ""),
                    instrument=row.get("instrument", ""),
                ),
            )
        )
    return entries


def load_piece(entry: ManifestEntry, csv_schema=None, warnings=None):
    """
    Parse the file behind a manifest entry and attach the manifest's metadata.

    Raises:
        CorpusError: unreadable file, unsupported extension or any parser error
    """
    from .csv_reader import parse_corpus_csv
    from .midi_parser import parse_midi

    suffix = entry.path.suffix.lower()
    try:
        if suffix in (".mid", ".midi"):
            piece = parse_midi(entry.path.read_bytes(), piece_id=entry.id)
        elif suffix == ".csv":
            with open(entry.path, "r", encoding="utf-8") as f:
                piece = parse_corpus_csv(f, csv_schema, piece_id=entry.id, warnings=warnings)
        else:
            raise CorpusError(f"{entry.path}: unsupported file type {suffix!r}")
    except CorpusError:
        raise
    except (OSError, ValueError) as e:
        # unreadable file, bad encoding, or a CSV the tokenizer rejects
        raise CorpusError(f"{entry.path}: {e}") from e

    # Manifest annotations win; file-level metadata only fills what the manifest leaves unknown
    merged = piece.metadata.model_dump()
    for key, value in entry.metadata.model_dump().items():
        if value not in (UNKNOWN, 0):
            merged[key] = value
    return piece.with_metadata(PieceMetadata(**merged), piece_id=entry.id)
