"""
Corpus ingestion: MIDI and CSV parsing, manifest handling, symbolization.
"""

from .midi_parser import parse_midi
from .csv_reader import CsvSchema, parse_corpus_csv, write_piece_csv
from .manifest import ManifestEntry, read_manifest, load_piece, normalize_metadata
from .symbolize import (
    symbolize_pitch,
    symbolize_rhythm,
    symbolize_joint,
    symbol_sequence_json,
    onset_groups,
)

__all__ = [
    "parse_midi",
    "CsvSchema",
    "parse_corpus_csv",
    "write_piece_csv",
    "ManifestEntry",
    "read_manifest",
    "load_piece",
    "normalize_metadata",
    "symbolize_pitch",
    "symbolize_rhythm",
    "symbolize_joint",
    "symbol_sequence_json",
    "onset_groups",
]
