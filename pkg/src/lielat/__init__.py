"""Exact computations for classical groups and Lie lattices over finite local rings."""
from .counting import (
    brute_count,
    brute_count_Cn,
    complete_to_orthogonal,
    formula_Cn,
    formula_order,
    orbit_count,
    stabilizer_element,
)
from .endo import d_infinity, diag_weights, domain, escape_sweep, escape_witness, index
from .lattice import GradedLattice, bracket, build_family, is_powerful, verify_structure
from .linalg import Mat, gram, is_member
from .ring import RingElem, RingSpec, make_ring, parse_ring
from .ssindex import FieldParams, IndexQuery, check_preconditions, dims, min_index_bound, ss_index

__version__ = "0.1.0"
