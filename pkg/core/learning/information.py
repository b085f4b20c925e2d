"""
Information measures in bits.

Sums use math.fsum (exactly rounded), so results do not depend on the order of the alphabet.
"""

import math
from typing import Sequence, Union

import numpy as np

from ..errors import AbsoluteContinuityViolation, AlphabetMismatch, ModelError, NonpositiveProbability
from ..schema.core_schema import PredictiveDistribution

Distribution = Union[PredictiveDistribution, Sequence[float], np.ndarray]


def _probs(dist: Distribution) -> np.ndarray:
    if isinstance(dist, PredictiveDistribution):
        return np.asarray(dist.probs, dtype=float)
    return np.asarray(dist, dtype=float)


def information_content(p: float) -> float:
    """Surprise of an outcome with probability p: -log2 p."""
    if not p > 0:
        raise NonpositiveProbability(f"probability must be positive, got {p}")
    if p > 1:
        raise ModelError(f"probability must be <= 1, got {p}")
    return 0.0 - math.log2(p)


def entropy(dist: Distribution) -> float:
    """Expected information content, with 0 * log2(0) = 0."""
    probs = _probs(dist)
    return 0.0 - math.fsum(float(p) * math.log2(p) for p in probs if p > 0)


def kl_divergence(p_dist: Distribution, q_dist: Distribution) -> float:
    """
    KL(P || Q) in bits.

    Raises:
        AlphabetMismatch: P and Q have different sizes
        AbsoluteContinuityViolation: Q(i) = 0 where P(i) > 0
    """
    p, q = _probs(p_dist), _probs(q_dist)
    if p.shape != q.shape:
        raise AlphabetMismatch(f"distributions over {p.size} and {q.size} symbols")
    terms = []
    for pi, qi in zip(p, q):
        if pi <= 0:
            continue
        if qi <= 0:
            raise AbsoluteContinuityViolation("Q assigns zero probability where P does not")
        terms.append(float(pi) * math.log2(pi / qi))
    return max(0.0, math.fsum(terms))
