"""Exact computation around Chio condensation of sign matrices."""

from .matrix_core import (
    IndexSet,
    IntMatrix,
    PartialTernaryMatrix,
    SignMatrix,
    abs_condense,
    chio_condense,
    chio_extend,
    det_int,
    full_inner_box,
    is_chio_set,
    rank_int,
)
from .measures import (
    DyadicProb,
    Event,
    cover_height,
    fibre_cardinality,
    p_chio,
    p_chio_abs,
    p_chio_averaged,
    p_lcf,
    ratio_chio_lcf,
    recipe_p_chio,
)
from .signed_graph import (
    BettiData,
    Coloring,
    IsoType,
    SignedBipartiteGraph,
    betti,
    build_graph,
    classify_isotype,
    count_balanced_signings,
    count_colorings,
    enumerate_circuits,
    is_balanced,
    is_matrix_circuit,
)

__version__ = "0.1.0"

__all__ = [
    "IndexSet",
    "IntMatrix",
    "PartialTernaryMatrix",
    "SignMatrix",
    "abs_condense",
    "chio_condense",
    "chio_extend",
    "det_int",
    "full_inner_box",
    "is_chio_set",
    "rank_int",
    "DyadicProb",
    "Event",
    "cover_height",
    "fibre_cardinality",
    "p_chio",
    "p_chio_abs",
    "p_chio_averaged",
    "p_lcf",
    "ratio_chio_lcf",
    "recipe_p_chio",
    "BettiData",
    "Coloring",
    "IsoType",
    "SignedBipartiteGraph",
    "betti",
    "build_graph",
    "classify_isotype",
    "count_balanced_signings",
    "count_colorings",
    "enumerate_circuits",
    "is_balanced",
    "is_matrix_circuit",
    "__version__",
]
