"""
One level of the statistical learner: a Dirichlet-smoothed Markov chain.

For a context with counts n_i and pseudo-count alpha per cell,
    P(i | context) = (n_i + alpha) / (sum_j n_j + K * alpha)
and the reliability of a transition is the inverse variance of its posterior Dirichlet marginal.
"""

import math
from bisect import insort
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..errors import InvalidSymbol
from ..schema.core_schema import PredictiveDistribution

START = -1  # context symbol preceding the first event of a piece

Context = Tuple[int, ...]


class DirichletMarkovLevel:
    """Transition counts of one hierarchy level over its (growing) alphabet."""

    def __init__(
        self,
        symbols: Iterable[int],
        order: int = 1,
        alpha: float = 1.0,
        level_index: int = 0,
    ) -> None:
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        if order < 1:
            raise ValueError("order must be >= 1")
        self.order = order
        self.alpha = float(alpha)
        self.level_index = level_index
        # global symbol ids in alphabet order; position = index in predictive vectors
        self.symbols: List[int] = []
        self.index: Dict[int, int] = {}
        for s in symbols:
            self.add_symbol(s)
        self.counts: Dict[Context, Dict[int, int]] = {}
        self.totals: Dict[Context, int] = {}
        # everything this level has received, in order
        self.history: List[int] = []
        # reliability of each non-START transition when it was observed, kept sorted
        self.reliability_history: List[float] = []
        # pairs of this level already promoted to chunks → chunk id
        self.chunked: Dict[Tuple[int, int], int] = {}

    @property
    def alphabet_size(self) -> int:
        return len(self.symbols)

    def add_symbol(self, symbol: int) -> None:
        if symbol not in self.index:
            self.index[symbol] = len(self.symbols)
            self.symbols.append(symbol)

    def start_context(self) -> Context:
        return (START,) * self.order

    def check_context(self, context: Context) -> None:
        if len(context) != self.order:
            raise InvalidSymbol(f"context {context} has length {len(context)}, order is {self.order}")
        for s in context:
            if s != START and s not in self.index:
                raise InvalidSymbol(f"context symbol {s} not in level {self.level_index} alphabet")

    def check_symbol(self, symbol: int) -> None:
        if symbol not in self.index:
            raise InvalidSymbol(
                f"symbol {symbol} not in level {self.level_index} alphabet of size {self.alphabet_size}"
            )

    # ------------------------------------------------------------------
    # Posterior
    # ------------------------------------------------------------------
    def count_vector(self, context: Context) -> np.ndarray:
        vec = np.zeros(self.alphabet_size)
        for symbol, n in self.counts.get(context, {}).items():
            vec[self.index[symbol]] = n
        return vec

    def predictive_vector(self, context: Context) -> np.ndarray:
        self.check_context(context)
        denominator = self.totals.get(context, 0) + self.alphabet_size * self.alpha
        return (self.count_vector(context) + self.alpha) / denominator

    def reliability(self, context: Context, symbol: int) -> float:
        """1 / Var(p_symbol) under the posterior Dirichlet; infinite when the variance is 0."""
        self.check_context(context)
        self.check_symbol(symbol)
        alpha_i = self.counts.get(context, {}).get(symbol, 0) + self.alpha
        alpha_0 = self.totals.get(context, 0) + self.alphabet_size * self.alpha
        mean = alpha_i / alpha_0
        variance = mean * (1.0 - mean) / (alpha_0 + 1.0)
        return math.inf if variance <= 0 else 1.0 / variance

    def reference_reliability(self, reference: str = "median") -> Optional[float]:
        """Typical reliability over the transitions observed so far."""
        values = self.reliability_history
        if not values:
            return None
        if reference == "mean":
            return float(np.mean(values))
        mid = len(values) // 2
        if len(values) % 2:
            return values[mid]
        return (values[mid - 1] + values[mid]) / 2.0

    # ------------------------------------------------------------------
    # Learning
    # ------------------------------------------------------------------
    def update(self, context: Context, symbol: int, weight: int = 1) -> None:
        """Count one (context → symbol) transition and record its reliability."""
        self.check_context(context)
        self.check_symbol(symbol)
        row = self.counts.setdefault(context, {})
        row[symbol] = row.get(symbol, 0) + weight
        self.totals[context] = self.totals.get(context, 0) + weight
        if START not in context:
            insort(self.reliability_history, self.reliability(context, symbol))

    def seed(self, context: Context, symbol: int, count: int) -> None:
        """Add prior counts without touching the observation history."""
        self.check_context(context)
        self.check_symbol(symbol)
        row = self.counts.setdefault(context, {})
        row[symbol] = row.get(symbol, 0) + count
        self.totals[context] = self.totals.get(context, 0) + count


def predictive_distribution(level: DirichletMarkovLevel, context: Context) -> PredictiveDistribution:
    """Posterior predictive P(next | context); uniform for an unseen context."""
    return PredictiveDistribution(probs=level.predictive_vector(tuple(context)).tolist(), context=tuple(context))


def reliability(level: DirichletMarkovLevel, context: Context, symbol: int) -> float:
    return level.reliability(tuple(context), symbol)
