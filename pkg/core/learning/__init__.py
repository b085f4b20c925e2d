"""
Statistical learning: information measures, Dirichlet-Markov levels, the chunking hierarchy.
"""

from .information import information_content, entropy, kl_divergence
from .dirichlet_markov import START, DirichletMarkovLevel, predictive_distribution, reliability
from .hbsl_model import (
    HbslModel,
    HierarchyResult,
    chunk_gate,
    learn_hierarchy,
    model_snapshot,
    rewrite_pairs,
    transition_tally,
)

__all__ = [
    "information_content",
    "entropy",
    "kl_divergence",
    "START",
    "DirichletMarkovLevel",
    "predictive_distribution",
    "reliability",
    "HbslModel",
    "HierarchyResult",
    "chunk_gate",
    "learn_hierarchy",
    "model_snapshot",
    "rewrite_pairs",
    "transition_tally",
]
