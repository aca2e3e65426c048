"""Exact combinatorics of sandwiched surface singularities.

Decorated plane-curve germs, their resolution and sandwiched graphs,
plumbing calculus with certificates, incidence-matrix enumeration up to
column permutation, and the Milnor-fiber distinguishing data derived
from each matrix.
"""

from .germs import (
    Branch,
    DecoratedGerm,
    GermError,
    InvalidGerm,
    Point,
    ProximityCluster,
    are_topologically_equivalent,
    branch_multiplicities,
    delta_branch,
    delta_curve,
    embedded_total_multiplicity,
    format_germ,
    germ_invariants,
    is_standard,
    pairwise_intersection,
    parse_germ,
    total_multiplicity,
    validate_cluster,
    validate_germ,
)
from .resolution import (
    exceptional_graph,
    extend_cluster,
    marking,
    sandwiched_graph,
)
from .plumbing import (
    Certificate,
    UnknownWithinBound,
    WeightedTree,
    blow_down_step,
    is_negative_definite,
    recognize_sandwiched,
    reduce_tree,
    trees_isomorphic,
    verify_certificate,
)
from .incidence import (
    ConstraintSet,
    IncidenceMatrix,
    canonicalize,
    constraints_of,
    enumerate_matrices,
    enumerate_realizable,
    realizable_by_translated_lines,
    validate_matrix,
)
from .fillings import (
    cap_description,
    distinguish,
    euler_number,
    filling_lower_bound,
    filling_report,
    kernel_lattice,
    sphere_gram,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
