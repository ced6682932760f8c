"""Code property graph model."""

from .graph import (
    DECLARATION_KINDS,
    EDGE_KINDS,
    NODE_KINDS,
    CpgEdge,
    CpgGraph,
    CpgNode,
    FrozenGraphError,
    MissingRequiredProperty,
    TranslationStats,
    UnknownNode,
)

__all__ = [
    "DECLARATION_KINDS", "EDGE_KINDS", "NODE_KINDS", "CpgEdge", "CpgGraph", "CpgNode",
    "FrozenGraphError", "MissingRequiredProperty", "TranslationStats", "UnknownNode",
]
