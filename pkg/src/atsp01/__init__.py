"""Combinatorial 3/4-approximation for Max (0,1)-ATSP.

The solver combines a maximum matching with a maximum-weight cycle cover
relaxed by half-edges, merges them into a degree-3 multigraph, splits that
multigraph into two path systems by a 2-coloring, and patches the heavier
system into a tour.  Exact oracles and structural verifiers accompany
every stage.
"""

from .assembly import AssembledMultigraph, build_gm, replace_half_arc_pairs
from .coloring import ColoringResult, path_two_color, verify_coloring
from .errors import InternalInvariantError, MalformedInputError, VerificationError
from .evading import (DirectedMatching, EvadingCover, GadgetGraph,
                      build_gprime, compute_m_max, extract_cover,
                      m_hit_pairs, verify_evading)
from .instances import (Instance, Tour, gen_planted, gen_random, make_tour,
                        parse_instance, tour_weight, write_instance)
from .matching import (UGraph, UMatching, max_cardinality_matching,
                       max_weight_perfect_matching, maximum_weight_matching)
from .oracle import (OracleResult, brute_evading_cover, brute_path2color,
                     held_karp_max, held_karp_min12)
from .tour import (Certificate, SolveOptions, certificate_to_text,
                   patch_paths, select_class, solve, solve_min12,
                   verify_certificate)

__version__ = "0.1.0"

__all__ = [
    "AssembledMultigraph", "Certificate", "ColoringResult",
    "DirectedMatching", "EvadingCover", "GadgetGraph", "Instance",
    "InternalInvariantError", "MalformedInputError", "OracleResult",
    "SolveOptions", "Tour", "UGraph", "UMatching", "VerificationError",
    "brute_evading_cover", "brute_path2color", "build_gm", "build_gprime",
    "certificate_to_text", "compute_m_max", "extract_cover", "gen_planted",
    "gen_random", "held_karp_max", "held_karp_min12", "m_hit_pairs",
    "make_tour", "max_cardinality_matching", "max_weight_perfect_matching",
    "maximum_weight_matching", "parse_instance", "patch_paths",
    "path_two_color", "replace_half_arc_pairs", "select_class", "solve",
    "solve_min12", "tour_weight", "verify_certificate", "verify_coloring",
    "verify_evading", "write_instance",
]
