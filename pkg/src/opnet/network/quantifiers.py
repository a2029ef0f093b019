"""Entropy quantifiers of ordinal partition networks.

All entropies are in nats with 0 ln 0 = 0 (``scipy.special.entr``).
"""

import logging
from collections.abc import Iterable, Sequence
from typing import Literal, Optional, Union

import numpy as np
from joblib import Parallel, delayed
from scipy import sparse
from scipy.special import entr

from opnet.models import (
    Direction,
    EmbeddingParams,
    QuantifierTriple,
    Statistic,
    Sweep,
    TimeSeries,
)
from opnet.network.graph import OrdinalNetwork, build_network
from opnet.network.patterns import PatternSequence, extract_patterns

logger = logging.getLogger(__name__)

SelfLoops = Literal["exclude", "include"]


def _entropy_of_counts(counts: np.ndarray) -> float:
    # Sorted so any permutation of the same counts sums identically
    counts = np.sort(np.asarray(counts, dtype=np.float64))
    total = counts.sum()
    if total <= 0:
        return 0.0
    return float(entr(counts / total).sum())


def _row_entropies(matrix: sparse.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    """Shannon entropy of every row-normalized row, plus the row sums.

    Empty rows get entropy 0.
    """
    n_rows = matrix.shape[0]
    row_sums = np.asarray(matrix.sum(axis=1), dtype=np.float64).ravel()
    rows = np.repeat(np.arange(n_rows), np.diff(matrix.indptr))
    probabilities = matrix.data / row_sums[rows]
    entropies = np.bincount(rows, weights=entr(probabilities), minlength=n_rows)
    return entropies, row_sums


def permutation_entropy(symbols: PatternSequence) -> float:
    """h_PE = -sum p_i ln p_i over the relative symbol frequencies."""
    if len(symbols) < 1:
        raise ValueError("permutation entropy needs at least one symbol")
    _, counts = np.unique(symbols.codes, return_counts=True)
    return _entropy_of_counts(counts)


def conditional_entropy(symbols: PatternSequence, network: OrdinalNetwork) -> float:
    """h_CPE = sum_i p_i H(row i of the transition matrix).

    p_i counts every symbol of the sequence, the terminal one included;
    rows keep their self-loops. A node without outgoing edges adds 0.
    """
    if len(symbols) < 2:
        raise ValueError("conditional entropy needs at least two symbols")
    node_index = network.index_of(symbols.codes)
    frequencies = np.bincount(node_index, minlength=network.n_nodes) / len(symbols)
    entropies, _ = _row_entropies(network.adjacency)
    return float(np.dot(frequencies, entropies))


def local_node_entropies(network: OrdinalNetwork) -> np.ndarray:
    """h_LNE per node from the self-loop-free transition rows (0 for dead ends)."""
    entropies, _ = _row_entropies(network.without_self_loops())
    return entropies


def global_node_entropy(network: OrdinalNetwork, self_loops: SelfLoops = "exclude") -> float:
    """h_GNE = sum_i p*_i h_LNE_i.

    With ``self_loops="exclude"`` p*_i is node i's self-loop-free out-weight
    over the total self-loop-free weight, so loop-only nodes carry no
    weight. ``"include"`` takes p*_i from the full out-weights instead. A
    network with no edge between distinct nodes gives 0.
    """
    if network.n_nodes < 1:
        raise ValueError("global node entropy needs at least one node")
    if self_loops not in ("exclude", "include"):
        raise ValueError(f"self_loops must be 'exclude' or 'include', got {self_loops!r}")

    entropies, strengths = _row_entropies(network.without_self_loops())
    if strengths.sum() == 0:
        return 0.0
    if self_loops == "include":
        strengths = network.out_strength(include_self_loops=True)
    return float(np.dot(strengths / strengths.sum(), entropies))


def quantify(
    series: Union[TimeSeries, np.ndarray],
    params: EmbeddingParams,
    direction: Direction = Direction.FORWARD,
    self_loops: SelfLoops = "exclude",
) -> QuantifierTriple:
    """Patterns, network and all three quantifiers of one series."""
    symbols = extract_patterns(series, params, direction)
    network = build_network(symbols)
    return QuantifierTriple(
        series_id=symbols.series_id,
        params=params,
        direction=symbols.direction,
        h_pe=permutation_entropy(symbols),
        h_cpe=conditional_entropy(symbols, network),
        h_gne=global_node_entropy(network, self_loops),
        n_nodes=network.n_nodes,
        n_edges=network.n_edges,
        self_loop_weight=network.self_loop_weight,
        forbidden_patterns=network.forbidden_patterns,
    )


def quantify_series(
    series: TimeSeries,
    pairs: Iterable[EmbeddingParams],
    directions: Sequence[Direction] = (Direction.FORWARD, Direction.REVERSE),
    self_loops: SelfLoops = "exclude",
) -> list[QuantifierTriple]:
    """Quantify one series over many (m, tau) pairs, skipping invalid ones."""
    triples = []
    for params in pairs:
        if not params.is_valid_for(len(series)):
            logger.debug("Skipping %s for %s: series too short", params, series.id)
            continue
        for direction in directions:
            triples.append(quantify(series, params, direction, self_loops))
    return triples


class QuantifierTable:
    """Quantifier triples indexed by (series id, m, tau, direction)."""

    def __init__(self, triples: Iterable[QuantifierTriple] = ()) -> None:
        self._triples: dict[tuple[str, int, int, Direction], QuantifierTriple] = {}
        for triple in triples:
            self.add(triple)

    def add(self, triple: QuantifierTriple) -> None:
        key = (triple.series_id, triple.params.m, triple.params.tau, triple.direction)
        self._triples[key] = triple

    def get(
        self, series_id: str, params: EmbeddingParams, direction: Direction
    ) -> Optional[QuantifierTriple]:
        return self._triples.get((series_id, params.m, params.tau, Direction(direction)))

    def values(
        self,
        series_ids: Iterable[str],
        params: EmbeddingParams,
        direction: Direction,
        statistic: Statistic,
    ) -> Optional[list[float]]:
        """One statistic for several series; None if any of them is missing."""
        values = []
        for series_id in series_ids:
            triple = self.get(series_id, params, direction)
            if triple is None:
                return None
            values.append(triple.value(statistic))
        return values

    def __iter__(self):
        return iter(self._triples.values())

    def __len__(self) -> int:
        return len(self._triples)


def quantify_many(
    series: Sequence[TimeSeries],
    sweep: Sweep,
    directions: Sequence[Direction] = (Direction.FORWARD, Direction.REVERSE),
    self_loops: SelfLoops = "exclude",
    n_jobs: int = 1,
) -> QuantifierTable:
    """Quantify every series over a sweep, one joblib task per series.

    Results come back in input order whatever ``n_jobs`` is.
    """
    pairs = sweep.pairs()
    logger.info(
        "Quantifying %d series over %d (m, tau) pairs with n_jobs=%d",
        len(series),
        len(pairs),
        n_jobs,
    )
    per_series = Parallel(n_jobs=n_jobs)(
        delayed(quantify_series)(s, pairs, directions, self_loops) for s in series
    )
    return QuantifierTable(t for triples in per_series for t in triples)
