"""Finite vertex-transitive graph families, their coarse geometry, and
certified Gromov-Hausdorff bounds against circle and flat torus models."""

from .discretize import (NetGraph, QIBounds, discretize, max_separated_net, net_graph,
                         sample_space, verify_qi)
from .families import FamilySpec
from .gh import (CertificationError, CircleCertificate, GHEstimate, certify_family,
                 circle_certificate, gh_bruteforce, gh_estimate, gh_lower_bounds, map_distortion)
from .graph import LabeledGraph, read_vtg, write_vtg
from .groups import (AbelianQuotient, CyclicPower, Dihedral, GenSet, Heisenberg, Permutation,
                     build_cayley, build_cayley_abels, make_genset)
from .limits import (ConvergenceReport, PolyhedralNorm, TorusModel, circle_model,
                     convergence_table, l1_torus_model, norm_from_generators)
from .metric import (DoublingReport, FiniteMetricSpace, GrowthProfile, covering_number, diameter,
                     doubling_report, growth_profile, radius_of_freedom)
from .structure import (Caret3, GeodesicCycle, NetDecomposition, find_fat_triangle,
                        max_caret_branch, net_decomposition, shortest_winding_loop)

__version__ = "0.1.0"

__all__ = [
    "AbelianQuotient", "Caret3", "CertificationError", "CircleCertificate",
    "ConvergenceReport", "CyclicPower", "Dihedral", "DoublingReport", "FamilySpec",
    "FiniteMetricSpace", "GHEstimate", "GenSet", "GeodesicCycle", "GrowthProfile",
    "Heisenberg", "LabeledGraph", "NetDecomposition", "NetGraph", "Permutation",
    "PolyhedralNorm", "QIBounds", "TorusModel", "build_cayley", "build_cayley_abels",
    "certify_family", "circle_certificate", "circle_model", "convergence_table",
    "covering_number", "diameter", "discretize", "doubling_report", "find_fat_triangle",
    "gh_bruteforce", "gh_estimate", "gh_lower_bounds", "growth_profile", "l1_torus_model",
    "make_genset", "map_distortion", "max_caret_branch", "max_separated_net",
    "net_decomposition", "net_graph", "norm_from_generators", "radius_of_freedom", "read_vtg",
    "sample_space", "shortest_winding_loop", "verify_qi", "write_vtg",
]
