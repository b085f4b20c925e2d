"""
Hierarchical statistical learner with a reliability-gated chunking cascade.

Level 0 learns the symbol stream online. When a transition's normalized probability times its
normalized reliability exceeds the gate constant c, the pair becomes a chunk: a new symbol of
the next level. Level L+1 learns the level-L stream with chunked pairs rewritten greedily left
to right. Level L+1 is created with the first level-L chunk and starts by replaying the level-L
history rewritten so far; after that it learns forward only. Level 0 is never re-learned.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..errors import EmptySequence
from ..schema.core_schema import ChunkNode, EventRecord, HbslConfig, SymbolSequence
from ..schema.schema_config import Measure
from .dirichlet_markov import START, Context, DirichletMarkovLevel
from .information import entropy, information_content, kl_divergence

START_LABEL = "<start>"

# label-keyed transition counts: context labels → next label → count
LabelCounts = Dict[Tuple[str, ...], Dict[str, int]]


def chunk_gate(
    level: DirichletMarkovLevel,
    context: Context,
    symbol: int,
    c: float,
    *,
    chunk_id: int,
    created_at: int = 0,
    reference: str = "median",
) -> Optional[ChunkNode]:
    """
    Decide whether the just-observed (context → symbol) transition becomes a chunk.

    p_hat = K * P(symbol | context), 1 for a uniform predictive
    r_hat = reliability / typical reliability at this level, about 1 for a typical transition
    A chunk (last context symbol, symbol) fires when p_hat * r_hat > c and the pair is new.
    """
    previous = context[-1]
    if previous == START:
        return None
    pair = (previous, symbol)
    if pair in level.chunked:
        return None

    r = level.reliability(context, symbol)
    if math.isinf(r):
        score = math.inf
    else:
        typical = level.reference_reliability(reference)
        r_hat = r / typical if typical and not math.isinf(typical) else 1.0
        p_hat = level.alphabet_size * level.predictive_vector(context)[level.index[symbol]]
        score = p_hat * r_hat
    if score <= c:
        return None
    return ChunkNode(chunk_id=chunk_id, children=pair, level_index=level.level_index, created_at=created_at)


class _GreedyRewriter:
    """Online greedy left-to-right replacement of chunked pairs."""

    def __init__(self, pairs: Dict[Tuple[int, int], int]) -> None:
        self.pairs = pairs  # shared with the lower level, so new chunks apply immediately
        self.pending: Optional[int] = None

    def push(self, symbol: int) -> List[int]:
        if self.pending is None:
            self.pending = symbol
            return []
        chunk = self.pairs.get((self.pending, symbol))
        if chunk is not None:
            self.pending = None
            return [chunk]
        out, self.pending = [self.pending], symbol
        return out


def rewrite_pairs(stream: List[int], pairs: Dict[Tuple[int, int], int]) -> List[int]:
    """Greedy left-to-right non-overlapping replacement of every chunked pair."""
    rewriter = _GreedyRewriter(pairs)
    out: List[int] = []
    for s in stream:
        out.extend(rewriter.push(s))
    if rewriter.pending is not None:
        out.append(rewriter.pending)
    return out


class HbslModel:
    """Multi-level learner state for one sequence. Single writer: updates are order-dependent."""

    def __init__(
        self,
        alphabet_size: int,
        config: Optional[HbslConfig] = None,
        prior_counts: Optional[Dict[Context, Dict[int, int]]] = None,
    ) -> None:
        if alphabet_size < 1:
            raise EmptySequence("alphabet must contain at least one symbol")
        self.config = config or HbslConfig()
        self.gate_constant = self.config.c
        self.base_size = alphabet_size
        self.levels: List[DirichletMarkovLevel] = [
            DirichletMarkovLevel(range(alphabet_size), order=self.config.order, alpha=self.config.alpha)
        ]
        self.chunks: List[ChunkNode] = []
        self.observed_events = 0
        self._contexts: List[Context] = [self.levels[0].start_context()]
        self._rewriters: List[_GreedyRewriter] = []  # rewriter i feeds level i+1
        self._next_chunk_id = alphabet_size
        for context, row in (prior_counts or {}).items():
            for symbol, n in row.items():
                self.levels[0].seed(context, symbol, n)

    @property
    def max_levels(self) -> int:
        return self.config.max_levels

    def chunks_at(self, level_index: int) -> List[ChunkNode]:
        return [ch for ch in self.chunks if ch.level_index == level_index]

    # ------------------------------------------------------------------
    # Observation
    # ------------------------------------------------------------------
    def observe(self, symbol: int) -> EventRecord:
        """Learn one level-0 event and report its surprise, Bayesian surprise and entropy."""
        self.levels[0].check_symbol(symbol)
        record = self._observe_at(0, symbol)
        self.observed_events += 1
        return record

    def _observe_at(self, level_index: int, symbol: int) -> EventRecord:
        level = self.levels[level_index]
        context = self._contexts[level_index]

        before = level.predictive_vector(context)
        surprise = information_content(float(before[level.index[symbol]]))
        uncertainty = entropy(before)
        level.update(context, symbol)
        after = level.predictive_vector(context)
        record = EventRecord(
            surprise_bits=surprise,
            bayesian_surprise_bits=kl_divergence(before, after),
            entropy_bits=uncertainty,
        )
        level.history.append(symbol)
        self._contexts[level_index] = context[1:] + (symbol,)

        chunk = None
        if level_index < self.max_levels - 1:
            chunk = chunk_gate(
                level,
                context,
                symbol,
                self.gate_constant,
                chunk_id=self._next_chunk_id,
                created_at=self.observed_events,
                reference=self.config.reliability_reference,
            )
        created_level = False
        if chunk is not None:
            created_level = self._admit(chunk)
        if not created_level and level_index + 1 < len(self.levels):
            for out in self._rewriters[level_index].push(symbol):
                self._observe_at(level_index + 1, out)
        return record

    def _admit(self, chunk: ChunkNode) -> bool:
        """Register a chunk; returns True when it created (and replayed) the next level."""
        self._next_chunk_id += 1
        self.chunks.append(chunk)
        lower = self.levels[chunk.level_index]
        lower.chunked[chunk.children] = chunk.chunk_id
        for higher in self.levels[chunk.level_index + 1:]:
            higher.add_symbol(chunk.chunk_id)
        if chunk.level_index + 1 < len(self.levels):
            return False

        upper = DirichletMarkovLevel(
            list(lower.symbols) + [ch.chunk_id for ch in self.chunks_at(chunk.level_index)],
            order=self.config.order,
            alpha=self.config.alpha,
            level_index=chunk.level_index + 1,
        )
        self.levels.append(upper)
        self._contexts.append(upper.start_context())
        rewriter = _GreedyRewriter(lower.chunked)
        self._rewriters.append(rewriter)
        for s in list(lower.history):
            for out in rewriter.push(s):
                self._observe_at(upper.level_index, out)
        return True


@dataclass
class HierarchyResult:
    model: HbslModel
    records: List[EventRecord] = field(default_factory=list)

    @property
    def chunk_inventory(self) -> Dict[int, List[ChunkNode]]:
        return {i: self.model.chunks_at(i) for i in range(len(self.model.levels))}

    def series(self, measure: Measure) -> List[float]:
        attr = {
            Measure.SURPRISE: "surprise_bits",
            Measure.BAYESIAN_SURPRISE: "bayesian_surprise_bits",
            Measure.ENTROPY: "entropy_bits",
        }[Measure(measure)]
        return [getattr(r, attr) for r in self.records]


def prior_from_labels(seq: SymbolSequence, prior: Optional[LabelCounts]) -> Dict[Context, Dict[int, int]]:
    """Translate label-keyed counts into this sequence's ids, dropping unseen labels."""
    if not prior:
        return {}
    ids = {label: i for i, label in enumerate(seq.alphabet)}
    ids[START_LABEL] = START
    out: Dict[Context, Dict[int, int]] = {}
    for context_labels, row in prior.items():
        if not all(label in ids for label in context_labels):
            continue
        context = tuple(ids[label] for label in context_labels)
        for label, n in row.items():
            if label in ids and ids[label] != START:
                out.setdefault(context, {})[ids[label]] = n
    return out


def transition_tally(seq: SymbolSequence, order: int = 1, into: Optional[LabelCounts] = None) -> LabelCounts:
    """Label-keyed level-0 transition counts of a sequence (START-padded)."""
    tally: LabelCounts = into if into is not None else {}
    context = (START_LABEL,) * order
    for label in seq.labels():
        row = tally.setdefault(context, {})
        row[label] = row.get(label, 0) + 1
        context = context[1:] + (label,)
    return tally


def learn_hierarchy(
    seq: SymbolSequence,
    config: Optional[HbslConfig] = None,
    prior_counts: Optional[LabelCounts] = None,
) -> HierarchyResult:
    """
    Replay a symbol sequence through a fresh model.

    Returns the model, the level-0 per-event records (one per symbol) and the chunk inventory.
    """
    if not seq.symbols:
        raise EmptySequence(f"{seq.piece_id}: empty {seq.domain.value} sequence")
    model = HbslModel(seq.alphabet_size, config, prior_from_labels(seq, prior_counts))
    result = HierarchyResult(model=model)
    for symbol in seq.symbols:
        result.records.append(model.observe(symbol))
    return result


def _context_key(context: Context) -> str:
    return ",".join("START" if s == START else str(s) for s in context)


def model_snapshot(model: HbslModel) -> str:
    """Deterministic JSON snapshot: config, levels with sparse counts, chunks."""
    doc = {
        "config": model.config.model_dump(mode="json"),
        "observed_events": model.observed_events,
        "levels": [
            {
                "level_index": level.level_index,
                "alphabet": level.symbols,
                "counts": {
                    _context_key(ctx): {str(s): n for s, n in row.items()}
                    for ctx, row in level.counts.items()
                },
            }
            for level in model.levels
        ],
        "chunks": [ch.model_dump(mode="json") for ch in model.chunks],
    }
    return json.dumps(doc, sort_keys=True)
