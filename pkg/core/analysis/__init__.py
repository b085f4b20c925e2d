"""
Analyses built on parsed pieces: information dynamics, t-SNE embedding, envelope acoustics.
"""

from .dynamics import (
    PieceDynamics,
    build_feature_matrix,
    corpus_dynamics,
    dynamics_table,
    feature_matrix_table,
    interpolate_series,
    learn_sequences,
    per_piece_dynamics,
    symbolize_piece,
)
from .embedding import TsneResult, embedding_table, run_tsne, tsne
from .acoustics import (
    carrier_spectrum,
    check_envelope,
    decimate_envelope,
    demodulate,
    mean_power_by_group,
    read_wav,
    scalogram,
    spectral_slope,
    synthesize,
    write_wav,
    zscore,
)
from .rates import density_by_group, detect_troughs, horizontal_rates, mass_near, rate_density

__all__ = [
    "PieceDynamics",
    "build_feature_matrix",
    "corpus_dynamics",
    "dynamics_table",
    "feature_matrix_table",
    "interpolate_series",
    "learn_sequences",
    "per_piece_dynamics",
    "symbolize_piece",
    "TsneResult",
    "embedding_table",
    "run_tsne",
    "tsne",
    "carrier_spectrum",
    "check_envelope",
    "decimate_envelope",
    "demodulate",
    "mean_power_by_group",
    "read_wav",
    "scalogram",
    "spectral_slope",
    "synthesize",
    "write_wav",
    "zscore",
    "density_by_group",
    "detect_troughs",
    "horizontal_rates",
    "mass_near",
    "rate_density",
]
