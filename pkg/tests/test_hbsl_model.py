import math

import numpy as np
import pytest

from core.errors import EmptySequence, InvalidSymbol
from core.learning import (
    START,
    DirichletMarkovLevel,
    HbslModel,
    chunk_gate,
    kl_divergence,
    learn_hierarchy,
    model_snapshot,
    rewrite_pairs,
    transition_tally,
)
from core.schema.core_schema import HbslConfig, SymbolSequence
from core.schema.schema_config import Domain, Measure


def sequence(symbols, k=None, piece_id="s"):
    k = k if k is not None else max(symbols) + 1
    return SymbolSequence(
        piece_id=piece_id,
        domain=Domain.PITCH,
        symbols=list(symbols),
        alphabet=[chr(ord("A") + i) for i in range(k)],
    )


def level0_pairs(model):
    return {ch.children for ch in model.chunks_at(0)}


def test_first_event_after_start():
    model = HbslModel(2)
    record = model.observe(0)
    assert record.surprise_bits == 1.0
    assert record.entropy_bits == 1.0
    assert record.bayesian_surprise_bits == pytest.approx(kl_divergence([0.5, 0.5], [2 / 3, 1 / 3]), rel=1e-12)
    assert record.bayesian_surprise_bits == pytest.approx(0.0850, abs=1e-4)


def test_invalid_symbol_leaves_model_unchanged():
    model = HbslModel(2)
    for s in [0, 1, 0]:
        model.observe(s)
    before = model_snapshot(model)
    with pytest.raises(InvalidSymbol):
        model.observe(2)
    assert model_snapshot(model) == before
    assert model.observed_events == 3


def test_single_event_sequence():
    result = learn_hierarchy(sequence([0], k=2))
    assert len(result.records) == 1
    assert result.series(Measure.SURPRISE) == [1.0]
    level = result.model.levels[0]
    assert level.reliability_history == []
    assert list(level.counts) == [(START,)]
    assert result.model.chunks == []


def test_empty_sequence():
    with pytest.raises(EmptySequence):
        learn_hierarchy(sequence([], k=2))


def test_alternating_sequence_chunks_ab():
    result = learn_hierarchy(sequence([0, 1] * 30))
    ab = [ch for ch in result.model.chunks_at(0) if ch.children == (0, 1)]
    assert ab
    assert ab[0].created_at < 60
    assert ab[0].chunk_id >= 2
    assert len(result.model.levels) >= 2


def test_repeated_symbol_chunks_with_itself():
    result = learn_hierarchy(sequence([0] * 40))
    assert (0, 0) in level0_pairs(result.model)


def test_cycle_of_four_builds_chunks_of_chunks():
    result = learn_hierarchy(sequence([0, 1, 2, 3] * 20))
    pairs = level0_pairs(result.model)
    assert pairs
    assert pairs <= {(0, 1), (1, 2), (2, 3), (3, 0)}
    assert result.model.chunks_at(1)
    assert len(result.records) == 80


def test_random_binary_rarely_chunks():
    rng = np.random.default_rng(2024)
    quiet = 0
    for _ in range(100):
        symbols = rng.integers(0, 2, size=60).tolist()
        result = learn_hierarchy(sequence(symbols, k=2))
        quiet += not result.model.chunks
    assert quiet >= 95


def test_bayesian_surprise_decays_for_repeated_transition():
    result = learn_hierarchy(sequence([0] * 21, k=2))
    kl = result.series(Measure.BAYESIAN_SURPRISE)[1:]
    assert len(kl) == 20
    assert all(a > b for a, b in zip(kl, kl[1:]))


def test_dynamics_series_length_matches_sequence():
    result = learn_hierarchy(sequence([0, 2, 1, 1, 0, 2, 2], k=3))
    for measure in Measure:
        assert len(result.series(measure)) == 7


def test_level0_counts_match_brute_force_tally():
    rng = np.random.default_rng(11)
    for _ in range(200):
        k = int(rng.integers(1, 6))
        n = int(rng.integers(1, 51))
        symbols = rng.integers(0, k, size=n).tolist()
        level = learn_hierarchy(sequence(symbols, k=k)).model.levels[0]

        tally = {}
        previous = START
        for s in symbols:
            row = tally.setdefault((previous,), {})
            row[s] = row.get(s, 0) + 1
            previous = s
        assert level.counts == tally

        for context, row in tally.items():
            total = sum(row.values())
            expected = [(row.get(s, 0) + 1.0) / (total + k * 1.0) for s in range(k)]
            assert level.predictive_vector(context).tolist() == expected


def test_entropy_within_bounds():
    rng = np.random.default_rng(5)
    symbols = rng.integers(0, 4, size=120).tolist()
    result = learn_hierarchy(sequence(symbols, k=4))
    assert all(0.0 <= r.entropy_bits <= 2.0 + 1e-12 for r in result.records)
    assert all(r.bayesian_surprise_bits >= 0.0 for r in result.records)


def test_relabeling_symbols_preserves_dynamics():
    rng = np.random.default_rng(9)
    symbols = rng.integers(0, 4, size=80).tolist()
    relabel = [2, 0, 3, 1]
    a = learn_hierarchy(sequence(symbols, k=4))
    b = learn_hierarchy(sequence([relabel[s] for s in symbols], k=4))
    for measure in Measure:
        assert a.series(measure) == b.series(measure)
    assert len(a.model.chunks) == len(b.model.chunks)


def test_relabeling_symbols_relabels_chunk_pairs():
    symbols = [0, 1, 2, 3] * 20
    relabel = [2, 0, 3, 1]
    a = learn_hierarchy(sequence(symbols, k=4)).model
    b = learn_hierarchy(sequence([relabel[s] for s in symbols], k=4)).model
    assert a.chunks

    def mapped(s):
        return relabel[s] if s < 4 else s

    assert [(c.chunk_id, c.level_index, tuple(mapped(s) for s in c.children)) for c in a.chunks] == [
        (c.chunk_id, c.level_index, c.children) for c in b.chunks
    ]


def test_snapshot_is_deterministic():
    seq = sequence([0, 1, 2, 0, 1, 2, 0, 1, 1, 2] * 4)
    first = model_snapshot(learn_hierarchy(seq).model)
    second = model_snapshot(learn_hierarchy(seq).model)
    assert first == second
    assert '"chunks"' in first and '"levels"' in first


def test_single_level_never_chunks():
    result = learn_hierarchy(sequence([0, 1] * 30), HbslConfig(max_levels=1))
    assert result.model.chunks == []
    assert len(result.model.levels) == 1


def test_chunk_gate_fires_on_certain_transition_once():
    level = DirichletMarkovLevel([0])
    level.update((0,), 0)
    chunk = chunk_gate(level, (0,), 0, 5.0, chunk_id=1, created_at=3)
    assert chunk is not None
    assert chunk.children == (0, 0)
    assert chunk.created_at == 3
    level.chunked[chunk.children] = chunk.chunk_id
    assert chunk_gate(level, (0,), 0, 5.0, chunk_id=2) is None


def test_chunk_gate_ignores_start_context():
    level = DirichletMarkovLevel([0])
    level.update(level.start_context(), 0)
    assert chunk_gate(level, level.start_context(), 0, 5.0, chunk_id=1) is None


def test_uniform_transition_does_not_fire():
    level = DirichletMarkovLevel([0, 1])
    level.update((0,), 1)
    assert chunk_gate(level, (0,), 1, 5.0, chunk_id=2) is None


def test_rewrite_pairs_greedy_left_to_right():
    assert rewrite_pairs([0, 1, 0, 1, 1], {(0, 1): 9}) == [9, 9, 1]
    assert rewrite_pairs([0, 0, 0], {(0, 0): 5}) == [5, 0]
    assert rewrite_pairs([1, 2, 3], {(0, 1): 9}) == [1, 2, 3]


def test_level_one_learns_rewritten_stream():
    result = learn_hierarchy(sequence([0, 1] * 30))
    model = result.model
    upper = model.levels[1]
    lower = model.levels[0]
    assert upper.history
    for symbol in upper.history:
        assert symbol in upper.index
    assert set(lower.chunked.values()) <= set(upper.symbols)


def test_prior_counts_shift_first_prediction():
    earlier = SymbolSequence(piece_id="old", domain=Domain.PITCH, symbols=[0, 1], alphabet=["A", "B"])
    prior = transition_tally(earlier)
    assert prior == {("<start>",): {"A": 1}, ("A",): {"B": 1}}

    later = SymbolSequence(piece_id="new", domain=Domain.PITCH, symbols=[0, 1], alphabet=["A", "C"])
    result = learn_hierarchy(later, prior_counts=prior)
    assert result.records[0].surprise_bits == pytest.approx(-math.log2(2 / 3), rel=1e-12)
    # "B" is not in the new alphabet, so A → C still sees a flat row
    assert result.records[1].surprise_bits == 1.0
