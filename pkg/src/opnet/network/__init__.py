"""Ordinal patterns, transition networks and their entropy quantifiers."""

from opnet.network.graph import OrdinalNetwork, build_network, write_edge_list
from opnet.network.patterns import (
    OrdinalPattern,
    PatternSequence,
    decode_pattern,
    encode_pattern,
    encode_windows,
    extract_patterns,
)
from opnet.network.quantifiers import (
    QuantifierTable,
    conditional_entropy,
    global_node_entropy,
    local_node_entropies,
    permutation_entropy,
    quantify,
    quantify_many,
    quantify_series,
)

__all__ = [
    "OrdinalNetwork",
    "OrdinalPattern",
    "PatternSequence",
    "QuantifierTable",
    "build_network",
    "conditional_entropy",
    "decode_pattern",
    "encode_pattern",
    "encode_windows",
    "extract_patterns",
    "global_node_entropy",
    "local_node_entropies",
    "permutation_entropy",
    "quantify",
    "quantify_many",
    "quantify_series",
    "write_edge_list",
]
