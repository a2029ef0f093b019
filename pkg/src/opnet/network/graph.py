"""Ordinal partition network: observed patterns as nodes, transitions as edges."""

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Union

import numpy as np
from scipy import sparse

from opnet.errors import EmbeddingError
from opnet.models import Direction, EmbeddingParams
from opnet.network.patterns import OrdinalPattern, PatternSequence, decode_pattern


@dataclass(frozen=True, eq=False)
class OrdinalNetwork:
    """Directed weighted graph over the patterns observed in one sequence.

    ``node_codes`` is sorted; row/column i of ``adjacency`` belongs to
    ``node_codes[i]``. Weights are transition counts, self-loops included,
    and sum to len(sequence) - 1.
    """

    node_codes: np.ndarray
    adjacency: sparse.csr_matrix
    params: EmbeddingParams
    direction: Direction = Direction.FORWARD
    series_id: str = ""

    @property
    def n_nodes(self) -> int:
        return int(self.node_codes.size)

    @property
    def n_edges(self) -> int:
        """Distinct directed edges, self-loops included."""
        return int(self.adjacency.nnz)

    @property
    def total_weight(self) -> int:
        return int(self.adjacency.sum())

    @property
    def self_loop_weight(self) -> int:
        return int(self.adjacency.diagonal().sum())

    @property
    def forbidden_patterns(self) -> int:
        """Patterns of length m never observed (m! minus the node count)."""
        return math.factorial(self.params.m) - self.n_nodes

    @property
    def nodes(self) -> frozenset[OrdinalPattern]:
        m = self.params.m
        return frozenset(decode_pattern(int(c), m) for c in self.node_codes)

    @property
    def code_weights(self) -> dict[tuple[int, int], int]:
        """Edge weights keyed by (source code, target code)."""
        return {(i, j): w for i, j, w in self.edges()}

    @property
    def weights(self) -> dict[tuple[OrdinalPattern, OrdinalPattern], int]:
        """Edge weights keyed by (source pattern, target pattern)."""
        m = self.params.m
        return {
            (decode_pattern(i, m), decode_pattern(j, m)): w for i, j, w in self.edges()
        }

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """(source code, target code, weight), sorted by source then target."""
        coo = self.adjacency.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for r, c, w in zip(coo.row[order], coo.col[order], coo.data[order]):
            yield int(self.node_codes[r]), int(self.node_codes[c]), int(w)

    def index_of(self, codes: np.ndarray) -> np.ndarray:
        """Node indices of the given pattern codes.

        Raises:
            ValueError: a code is not a node of this network
        """
        codes = np.asarray(codes, dtype=np.int64)
        index = np.searchsorted(self.node_codes, codes)
        found = index < self.n_nodes
        found[found] = self.node_codes[index[found]] == codes[found]
        if not found.all():
            raise ValueError("pattern codes not present in the network")
        return index

    def out_strength(self, include_self_loops: bool = True) -> np.ndarray:
        """Total outgoing weight per node."""
        matrix = self.adjacency if include_self_loops else self.without_self_loops()
        return np.asarray(matrix.sum(axis=1), dtype=np.float64).ravel()

    def without_self_loops(self) -> sparse.csr_matrix:
        """Adjacency with the diagonal removed and no explicit zeros left."""
        coo = self.adjacency.tocoo()
        off_diagonal = coo.row != coo.col
        matrix = sparse.csr_matrix(
            (coo.data[off_diagonal], (coo.row[off_diagonal], coo.col[off_diagonal])),
            shape=self.adjacency.shape,
        )
        matrix.eliminate_zeros()
        matrix.sort_indices()
        return matrix


def build_network(symbols: PatternSequence) -> OrdinalNetwork:
    """Count the transitions s_i -> s_{i+1} of a pattern sequence.

    Raises:
        EmbeddingError: fewer than 2 symbols, so no transition exists
    """
    if len(symbols) < 2:
        raise EmbeddingError(f"need at least 2 symbols to build a network, got {len(symbols)}")

    node_codes, inverse = np.unique(symbols.codes, return_inverse=True)
    inverse = inverse.ravel()
    k = node_codes.size
    counts = np.ones(inverse.size - 1, dtype=np.int64)
    adjacency = sparse.coo_matrix((counts, (inverse[:-1], inverse[1:])), shape=(k, k)).tocsr()
    adjacency.sum_duplicates()
    adjacency.sort_indices()
    node_codes.setflags(write=False)
    return OrdinalNetwork(
        node_codes=node_codes,
        adjacency=adjacency,
        params=symbols.params,
        direction=symbols.direction,
        series_id=symbols.series_id,
    )


def write_edge_list(network: OrdinalNetwork, path: Union[str, Path]) -> Path:
    """Write the network as a CSV edge list (codes, patterns, weight)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    m = network.params.m
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["code_i", "code_j", "pattern_i", "pattern_j", "weight"])
        for i, j, w in network.edges():
            writer.writerow([i, j, str(decode_pattern(i, m)), str(decode_pattern(j, m)), w])
    return path
