import numpy as np
import pytest

from builders import markov_pitches, piece_from
from core.analysis.dynamics import build_feature_matrix, corpus_dynamics
from core.analysis.embedding import (
    EMBEDDING_COLUMNS,
    conditional_affinities,
    embedding_table,
    joint_affinities,
    run_tsne,
    squared_distances,
    tsne,
)
from core.errors import NonFiniteInput, TooFewRows
from core.schema.core_schema import FeatureMatrix, RowMetadata, TsneConfig
from core.schema.schema_config import Domain, Measure


def silhouette(points: np.ndarray, labels: np.ndarray) -> float:
    d = np.sqrt(squared_distances(points))
    scores = []
    for i in range(len(points)):
        same = (labels == labels[i])
        same[i] = False
        other = labels != labels[i]
        a = d[i, same].mean()
        b = d[i, other].mean()
        scores.append((b - a) / max(a, b))
    return float(np.mean(scores))


def test_seeded_runs_are_bit_identical():
    rows = np.random.default_rng(0).normal(size=(12, 6))
    first = run_tsne(rows)
    second = run_tsne(rows)
    assert np.array_equal(first.coordinates, second.coordinates)
    assert first.kl_history == second.kl_history
    assert first.coordinates.shape == (12, 2)


def test_different_seed_changes_map():
    rows = np.random.default_rng(0).normal(size=(8, 4))
    a = run_tsne(rows, TsneConfig(iterations=50)).coordinates
    b = run_tsne(rows, TsneConfig(iterations=50, seed=41)).coordinates
    assert not np.array_equal(a, b)


def test_too_few_rows():
    with pytest.raises(TooFewRows):
        run_tsne(np.zeros((2, 3)))


def test_non_finite_rows():
    rows = np.ones((4, 2))
    rows[1, 1] = np.nan
    with pytest.raises(NonFiniteInput):
        run_tsne(rows)


def test_joint_affinities_symmetric_and_normalized():
    x = np.random.default_rng(3).normal(size=(9, 5))
    p = joint_affinities(x, 2.0)
    assert np.allclose(p, p.T)
    assert np.all(np.diag(p) == 0)
    assert p.sum() == pytest.approx(1.0, abs=1e-6)


def _joint_from_distances(d, perplexity=2.0):
    conditional = conditional_affinities(d, perplexity)
    return (conditional + conditional.T) / (2.0 * d.shape[0])


def test_moving_a_pair_closer_never_lowers_its_affinity():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        d = squared_distances(rng.normal(size=(12, 6)))
        i, j = rng.choice(12, size=2, replace=False)
        closer = d.copy()
        closer[i, j] = closer[j, i] = 0.5 * d[i, j]
        assert _joint_from_distances(closer)[i, j] >= _joint_from_distances(d)[i, j]


def test_duplicate_rows_end_up_closest():
    hits = 0
    for seed in range(100):
        rows = np.random.default_rng(seed).normal(size=(10, 8))
        rows[7] = rows[3]
        y = run_tsne(rows).coordinates
        d = np.sqrt(squared_distances(y))
        np.fill_diagonal(d, np.inf)
        hits += d[3, 7] <= d.min()
    assert hits >= 95


def test_objective_does_not_rise_at_the_end():
    rows = np.random.default_rng(4).normal(size=(15, 5))
    kl = np.asarray(run_tsne(rows).kl_history)
    assert len(kl) == 1000
    tail = kl[-100:]
    assert np.all(np.diff(tail) <= 1e-6)


def test_tsne_carries_row_metadata():
    rng = np.random.default_rng(2)
    meta = [RowMetadata(piece_id=f"p{i}", decade=1950 + 10 * (i % 2), style="cool") for i in range(5)]
    matrix = FeatureMatrix(
        domain=Domain.PITCH,
        measure=Measure.SURPRISE,
        rows=rng.normal(size=(5, 3)).tolist(),
        metadata=meta,
    )
    points = tsne(matrix, TsneConfig(iterations=100))
    assert [p.piece_id for p in points] == [f"p{i}" for i in range(5)]
    assert points[1].decade == 1960 and points[0].style == "cool"

    table = embedding_table({Domain.RHYTHM: points, Domain.PITCH: points})
    assert list(table.columns) == EMBEDDING_COLUMNS
    assert table["domain"].tolist() == ["pitch"] * 5 + ["rhythm"] * 5


def _era_corpus(per_era=15, length=64):
    rng = np.random.default_rng(40)
    states = [60, 62, 64, 65, 67, 69, 71]
    k = len(states)
    stepwise = np.full((k, k), 0.1 / (k - 1))
    for i in range(k):
        stepwise[i, (i + 1) % k] = 0.9
    flat = np.full((k, k), 1.0 / k)
    pieces, labels = [], {}
    for era, transitions in ((0, stepwise), (1, flat)):
        for j in range(per_era):
            pitches = markov_pitches(rng, transitions, states, length)
            iois = rng.choice([0.25, 0.5, 0.75], size=length - 1)
            piece_id = f"era{era}_{j:02d}"
            pieces.append(piece_from(pitches, iois.tolist(), piece_id=piece_id))
            labels[piece_id] = era
    return pieces, labels


def test_pitch_dynamics_separate_generators_rhythm_does_not():
    pieces, labels = _era_corpus()
    dynamics = corpus_dynamics(pieces)
    corpus = {pid: d.series for pid, d in dynamics.items()}

    def score(domain):
        matrix = build_feature_matrix(corpus, domain, Measure.SURPRISE)
        points = tsne(matrix)
        xy = np.array([[p.x, p.y] for p in points])
        era = np.array([labels[p.piece_id] for p in points])
        return silhouette(xy, era)

    assert score(Domain.PITCH) > 0.3
    assert score(Domain.RHYTHM) < 0.1
