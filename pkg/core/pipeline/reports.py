"""
Deterministic file outputs and grouped report tables.

All CSVs use 9 significant digits and sorted rows; JSON uses sorted keys. Together with
seeded computations this makes reruns byte-identical.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from ..errors import BadValue
from ..analysis.acoustics import mean_power_by_group
from ..analysis.rates import RATE_BIN_EDGES, density_by_group
from ..schema.core_schema import Piece, Spectrum
from ..schema.schema_config import GroupKey

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.9g"


class OutputWriter:
    """Writes under one root and remembers every file it wrote (relative POSIX paths)."""

    def __init__(self, root: Path) -> None:
        self.root = Path(root)
        self.inventory: List[str] = []

    def _target(self, relative: str) -> Path:
        path = self.root / relative
        path.parent.mkdir(parents=True, exist_ok=True)
        if relative not in self.inventory:
            self.inventory.append(relative)
        return path

    def path_for(self, relative: str) -> Path:
        """Reserve a path for a file written by someone else (e.g. a WAV or the run log)."""
        return self._target(relative)

    def write_csv(self, relative: str, frame: pd.DataFrame) -> Path:
        path = self._target(relative)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return path

    def write_json(self, relative: str, document) -> Path:
        path = self._target(relative)
        text = document if isinstance(document, str) else json.dumps(document, sort_keys=True, indent=2)
        path.write_text(text + "\n", encoding="utf-8")
        return path

    def write_text(self, relative: str, text: str) -> Path:
        path = self._target(relative)
        path.write_text(text, encoding="utf-8")
        return path

    def sorted_inventory(self) -> List[str]:
        return sorted(self.inventory)


@dataclass
class AcousticSummary:
    """Acoustic results of one piece that feed the corpus tables."""
    piece_id: str
    band_means: np.ndarray
    carrier: Spectrum
    cycle_lengths: np.ndarray
    rates: np.ndarray


@dataclass
class RunOutputs:
    """In-memory results the report stage groups."""
    pieces: Dict[str, Piece] = field(default_factory=dict)
    band_frequencies: Optional[np.ndarray] = None
    acoustics: Dict[str, AcousticSummary] = field(default_factory=dict)
    embeddings: Dict[str, pd.DataFrame] = field(default_factory=dict)  # measure → table


# ============================================================================
# CORPUS TABLES
# ============================================================================

def band_power_table(outputs: RunOutputs) -> pd.DataFrame:
    records = [
        (piece_id, float(f), float(p))
        for piece_id in sorted(outputs.acoustics)
        for f, p in zip(outputs.band_frequencies, outputs.acoustics[piece_id].band_means)
    ]
    return pd.DataFrame(records, columns=["piece_id", "band_hz", "mean_power"])


def cycles_table(outputs: RunOutputs) -> pd.DataFrame:
    records = [
        (piece_id, i, float(c))
        for piece_id in sorted(outputs.acoustics)
        for i, c in enumerate(outputs.acoustics[piece_id].cycle_lengths)
    ]
    return pd.DataFrame(records, columns=["piece_id", "cycle_index", "cycle_sec"])


def rates_table(outputs: RunOutputs) -> pd.DataFrame:
    records = [
        (piece_id, i, float(r))
        for piece_id in sorted(outputs.acoustics)
        for i, r in enumerate(outputs.acoustics[piece_id].rates)
    ]
    return pd.DataFrame(records, columns=["piece_id", "rate_index", "rate"])


def density_table(density: np.ndarray, group: Optional[str] = None) -> pd.DataFrame:
    centers = (RATE_BIN_EDGES[:-1] + RATE_BIN_EDGES[1:]) / 2.0
    frame = pd.DataFrame({"bin_center": centers, "probability": density})
    if group is not None:
        frame.insert(0, "group", group)
    return frame


def carrier_peaks_table(outputs: RunOutputs) -> pd.DataFrame:
    records = [(pid, outputs.acoustics[pid].carrier.peak_frequency) for pid in sorted(outputs.acoustics)]
    return pd.DataFrame(records, columns=["piece_id", "peak_hz"])


def scalogram_table(frequencies: np.ndarray, power: np.ndarray) -> pd.DataFrame:
    """Band frequency per row, one column per frame."""
    frame = pd.DataFrame(power, columns=[f"frame{j}" for j in range(power.shape[1])])
    frame.insert(0, "band_hz", frequencies)
    return frame


# ============================================================================
# GROUPED REPORTS
# ============================================================================

def _group_key(key) -> GroupKey:
    try:
        return GroupKey(key)
    except ValueError:
        choices = ", ".join(k.value for k in GroupKey)
        raise BadValue("group_key", f"{key!r} is not one of {choices}") from None


def group_report(outputs: RunOutputs, group_key, warnings: Optional[List[str]] = None) -> Dict[str, pd.DataFrame]:
    """
    Tables for one grouping key: per-group mean envelope spectra and carrier spectra,
    per-group horizontal-rate densities, and every embedding annotated with the group label.

    Raises:
        BadValue: group_key is not decade, style, instrument or performer
    """
    key = _group_key(group_key)
    labels = {pid: piece.group_label(key.value) for pid, piece in outputs.pieces.items()}
    tables: Dict[str, pd.DataFrame] = {}

    if outputs.acoustics:
        band_means = {pid: a.band_means for pid, a in outputs.acoustics.items()}
        spectra = mean_power_by_group(band_means, labels, warnings=warnings)
        tables["spectra"] = pd.DataFrame(
            [
                (group, float(f), float(p))
                for group, power in spectra.items()
                for f, p in zip(outputs.band_frequencies, power)
            ],
            columns=["group", "band_hz", "mean_power"],
        )

        carriers = {pid: a.carrier.power for pid, a in outputs.acoustics.items()}
        carrier_freqs = next(iter(outputs.acoustics.values())).carrier.frequencies
        uniform = {pid: p for pid, p in carriers.items() if len(p) == len(carrier_freqs)}
        carrier_means = mean_power_by_group(uniform, labels, warnings=warnings)
        tables["carrier"] = pd.DataFrame(
            [
                (group, float(f), float(p))
                for group, power in carrier_means.items()
                for f, p in zip(carrier_freqs, power)
            ],
            columns=["group", "frequency_hz", "mean_power"],
        )

        rates = {pid: a.rates for pid, a in outputs.acoustics.items()}
        densities = density_by_group(rates, labels, warnings=warnings)
        frames = [density_table(d, group) for group, d in densities.items()]
        tables["rates"] = (
            pd.concat(frames, ignore_index=True)
            if frames
            else pd.DataFrame(columns=["group", "bin_center", "probability"])
        )

    for measure in sorted(outputs.embeddings):
        table = outputs.embeddings[measure].copy()
        table.insert(1, "group", [labels.get(pid, "unknown") for pid in table["piece_id"]])
        tables[f"embedding_{measure}"] = table

    logger.info("group report %s: %d tables", key.value, len(tables))
    return tables


def write_group_report(writer: OutputWriter, tables: Dict[str, pd.DataFrame], group_key) -> List[str]:
    key = _group_key(group_key)
    written = []
    for name in sorted(tables):
        relative = f"reports/group_{key.value}_{name}.csv"
        writer.write_csv(relative, tables[name])
        written.append(relative)
    return written
