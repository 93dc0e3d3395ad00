"""Exact arithmetic for the space of complete tetrahedra and its core."""

from .combinatorics import Face, SymmetryElement, all_edges, all_faces, gamma_components, gamma_pairs
from .config import TetraConfig, config_from_matrix, degenerate_and_limit, normalize, sample_config
from .core import CorePoint, core_from_chart, enumerate_special, jacobian_certificate, propagation_bound
from .relations import Relation, u_relations, z_relations

__version__ = "0.1.0"

__all__ = [
    "CorePoint",
    "Face",
    "Relation",
    "SymmetryElement",
    "TetraConfig",
    "all_edges",
    "all_faces",
    "config_from_matrix",
    "core_from_chart",
    "degenerate_and_limit",
    "enumerate_special",
    "gamma_components",
    "gamma_pairs",
    "jacobian_certificate",
    "normalize",
    "propagation_bound",
    "sample_config",
    "u_relations",
    "z_relations",
]
