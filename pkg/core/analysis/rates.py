"""
Cycle statistics of amplitude envelopes.

Troughs of the envelope bound cycles; adjacent cycle lengths c1, c2 give the horizontal
rate c1 / (c1 + c2), so 0.5 is a 1:1 relation, 1/3 is 1:2 and 2/3 is 2:1.
"""

import logging
from typing import Dict, List, Mapping, Optional

import numpy as np
from scipy import signal

from ..errors import TooFewCycles
from ..schema.core_schema import CycleStats, EnvelopeDecomposition

logger = logging.getLogger(__name__)

BIN_WIDTH = 0.02
RATE_BIN_EDGES = np.linspace(0.0, 1.0, int(round(1.0 / BIN_WIDTH)) + 1)


def detect_troughs(decomposition: EnvelopeDecomposition, min_prominence_frac: float = 0.05) -> np.ndarray:
    """Indices of envelope minima with prominence >= min_prominence_frac of the envelope range."""
    env = np.asarray(decomposition.envelope, dtype=float)
    if len(env) < 3:
        return np.zeros(0, dtype=int)
    span = float(env.max() - env.min())
    if span == 0:
        return np.zeros(0, dtype=int)
    troughs, _ = signal.find_peaks(-env, prominence=min_prominence_frac * span)
    return troughs.astype(int)


def rate_density(rates: np.ndarray) -> np.ndarray:
    """Histogram over (0, 1) in 0.02-wide bins, normalized to sum 1 (all zeros without rates)."""
    counts, _ = np.histogram(rates, bins=RATE_BIN_EDGES)
    total = counts.sum()
    return counts / total if total else counts.astype(float)


def horizontal_rates(troughs: np.ndarray, frame_rate: float) -> CycleStats:
    """
    Raises:
        TooFewCycles: fewer than 3 troughs
    """
    troughs = np.asarray(troughs, dtype=int)
    if len(troughs) < 3:
        raise TooFewCycles(f"need at least 3 troughs for one rate, got {len(troughs)}")
    cycles = np.diff(troughs) / frame_rate
    rates = cycles[:-1] / (cycles[:-1] + cycles[1:])
    return CycleStats(
        trough_indices=troughs,
        cycle_lengths=cycles,
        horizontal_rates=rates,
        density=rate_density(rates),
        bin_edges=RATE_BIN_EDGES.copy(),
    )


def mass_near(stats_or_density, center: float, tolerance: float = BIN_WIDTH) -> float:
    """Density mass in bins whose centers lie within tolerance of center."""
    density = stats_or_density.density if isinstance(stats_or_density, CycleStats) else np.asarray(stats_or_density)
    centers = (RATE_BIN_EDGES[:-1] + RATE_BIN_EDGES[1:]) / 2.0
    return float(density[np.abs(centers - center) <= tolerance + 1e-12].sum())


def density_by_group(
    rates: Mapping[str, np.ndarray],
    labels: Mapping[str, str],
    warnings: Optional[List[str]] = None,
) -> Dict[str, np.ndarray]:
    """Density of the pooled rates of every piece in each group."""
    pooled: Dict[str, List[np.ndarray]] = {}
    for piece_id in sorted(rates):
        if piece_id in labels:
            pooled.setdefault(labels[piece_id], []).append(np.asarray(rates[piece_id], dtype=float))
    out: Dict[str, np.ndarray] = {}
    for group in sorted(pooled):
        values = np.concatenate(pooled[group])
        if values.size == 0:
            message = f"group {group!r} has no cycle rates, dropped"
            logger.warning(message)
            if warnings is not None:
                warnings.append(message)
            continue
        out[group] = rate_density(values)
    return out
