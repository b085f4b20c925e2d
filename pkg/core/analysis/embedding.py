"""
Exact t-SNE in numpy.

Affinities come from a per-row binary search on the Gaussian precision that reaches the target
perplexity; the 2-D map minimizes KL(P || Q) under a Student-t kernel by gradient descent with
momentum, per-parameter gains and early exaggeration. Seeded runs are bit-reproducible.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..errors import NonFiniteInput, TooFewRows
from ..schema.core_schema import EmbeddedPoint, FeatureMatrix, TsneConfig

logger = logging.getLogger(__name__)

PERPLEXITY_TOLERANCE = 1e-5
MAX_SEARCH_STEPS = 50
INIT_SCALE = 1e-4
MIN_GAIN = 0.01
EPSILON = np.finfo(np.double).eps

EMBEDDING_COLUMNS = ["piece_id", "domain", "x", "y", "decade", "performer", "style", "instrument"]


@dataclass
class TsneResult:
    coordinates: np.ndarray
    kl_history: List[float] = field(default_factory=list)


def squared_distances(x: np.ndarray) -> np.ndarray:
    sum_x = np.sum(x * x, axis=1)
    d = sum_x[:, None] + sum_x[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d, 0.0)
    return np.maximum(d, 0.0)


def _row_affinities(d_row: np.ndarray, beta: float):
    """Conditional probabilities of one row (self excluded) and their Shannon entropy in nats."""
    shifted = d_row - d_row.min()
    p = np.exp(-shifted * beta)
    total = p.sum()
    if total == 0.0:
        total = EPSILON
    p = p / total
    h = np.log(total) + beta * np.sum(shifted * p)
    return p, h


def conditional_affinities(distances: np.ndarray, perplexity: float) -> np.ndarray:
    """p_{j|i} for every row, each tuned to the target perplexity."""
    n = distances.shape[0]
    target = np.log(perplexity)
    conditional = np.zeros((n, n))
    betas = np.ones(n)
    for i in range(n):
        others = np.concatenate([np.arange(i), np.arange(i + 1, n)])
        d_row = distances[i, others]
        beta, beta_min, beta_max = 1.0, -np.inf, np.inf
        p, h = _row_affinities(d_row, beta)
        for _ in range(MAX_SEARCH_STEPS):
            diff = h - target
            if abs(diff) <= PERPLEXITY_TOLERANCE:
                break
            if diff > 0:
                beta_min = beta
                beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
            p, h = _row_affinities(d_row, beta)
        conditional[i, others] = p
        betas[i] = beta
    logger.debug("mean sigma %.6f", float(np.mean(np.sqrt(1.0 / betas))))
    return conditional


def joint_affinities(x: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized p_ij = (p_{j|i} + p_{i|j}) / 2N."""
    conditional = conditional_affinities(squared_distances(x), perplexity)
    p = (conditional + conditional.T) / (2.0 * x.shape[0])
    p = np.maximum(p, EPSILON)
    np.fill_diagonal(p, 0.0)
    return p


def _student_t(y: np.ndarray):
    num = 1.0 / (1.0 + squared_distances(y))
    np.fill_diagonal(num, 0.0)
    q = np.maximum(num / num.sum(), EPSILON)
    np.fill_diagonal(q, 0.0)
    return num, q


def kl_objective(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def _initial_map(x: np.ndarray, config: TsneConfig) -> np.ndarray:
    if config.init == "pca":
        centered = x - x.mean(axis=0)
        u, s, _ = np.linalg.svd(centered, full_matrices=False)
        y = u[:, :2] * s[:2]
        if y.shape[1] < 2:
            y = np.hstack([y, np.zeros((y.shape[0], 2 - y.shape[1]))])
        scale = np.std(y[:, 0])
        return y / scale * INIT_SCALE if scale > 0 else y
    rng = np.random.default_rng(config.seed)
    return INIT_SCALE * rng.standard_normal((x.shape[0], 2))


def run_tsne(rows: Union[np.ndarray, Sequence[Sequence[float]]], config: Optional[TsneConfig] = None) -> TsneResult:
    """
    Embed rows in 2-D.

    Raises:
        TooFewRows: fewer than 3 rows
        NonFiniteInput: NaN or infinite entries
    """
    config = config or TsneConfig()
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2 or x.shape[0] < 3:
        raise TooFewRows(f"t-SNE needs at least 3 rows, got {x.shape[0] if x.ndim else 0}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("feature matrix contains non-finite values")

    n = x.shape[0]
    p = joint_affinities(x, config.perplexity)
    y = _initial_map(x, config)
    update = np.zeros_like(y)
    gains = np.ones_like(y)
    history: List[float] = []

    for it in range(config.iterations):
        exaggeration = config.early_exaggeration if it < config.exaggeration_iters else 1.0
        momentum = config.initial_momentum if it < config.momentum_switch_iter else config.final_momentum

        num, q = _student_t(y)
        pq = (exaggeration * p - q) * num
        grad = 4.0 * ((np.diag(pq.sum(axis=1)) - pq) @ y)

        same_sign = (grad > 0) == (update > 0)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.clip(gains, MIN_GAIN, None, out=gains)
        update = momentum * update - config.learning_rate * gains * grad
        y = y + update
        y = y - y.mean(axis=0)

        history.append(kl_objective(p, _student_t(y)[1]))
        if (it + 1) % 250 == 0:
            logger.debug("t-SNE iteration %d/%d, KL %.6f (n=%d)", it + 1, config.iterations, history[-1], n)

    return TsneResult(coordinates=y, kl_history=history)


def tsne(matrix: FeatureMatrix, config: Optional[TsneConfig] = None) -> List[EmbeddedPoint]:
    """Embed a feature matrix; one point per row, carrying the row metadata."""
    result = run_tsne(matrix.as_array(), config)
    return [
        EmbeddedPoint(
            piece_id=meta.piece_id,
            x=float(xy[0]),
            y=float(xy[1]),
            decade=meta.decade,
            performer=meta.performer,
            style=meta.style,
            instrument=meta.instrument,
        )
        for meta, xy in zip(matrix.metadata, result.coordinates)
    ]


def embedding_table(points_by_domain) -> pd.DataFrame:
    """Plot-ready table for one measure: a block of rows per domain, sorted by domain and piece id."""
    records = []
    for domain in sorted(points_by_domain, key=lambda d: getattr(d, "value", d)):
        label = getattr(domain, "value", domain)
        for point in points_by_domain[domain]:
            records.append({"domain": label, **point.model_dump()})
    frame = pd.DataFrame(records, columns=EMBEDDING_COLUMNS)
    return frame.sort_values(["domain", "piece_id"], kind="mergesort").reset_index(drop=True)
