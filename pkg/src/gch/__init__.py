"""Exact homology of unordered configuration spaces of graphs."""

from .graph import (
    EdgePartition,
    Graph,
    GraphError,
    GraphFormatError,
    component_partition,
    disjoint_union,
    essential_vertices,
    explode,
    first_betti,
    is_well_separating,
    load_graph,
    parse_graph,
    ramos_number,
    subdivide,
    tails,
)
from .linalg import GF, QQ, ZZ, Field, SparseMatrix, parse_field
from .complex import FULL, REDUCED, ChainVector, ComplexVariant, encode_chain
from .homology import BettiTable, betti, betti_table, integral_homology, is_boundary

__version__ = "0.1.0"
