"""Rigidity, flexes and bellows-type invariants of closed triangulated polyhedra."""

from .mesh import (
    EdgeRecord,
    Mesh,
    MetricSummary,
    build_mesh,
    cayley_menger_volume,
    dihedral_angle,
    edge_records,
    metric_summary,
    oriented_volume,
    subdivide_face,
    three_incident_edges_coplanar,
    total_mean_curvature,
    vertex_star_coplanar,
)
from .rigidity import (
    FlexBasis,
    extend_field,
    flex_space,
    flux,
    rigidity_matrix,
    tmc_directional_derivative,
    trivial_motion_basis,
    volume_derivative,
)

__version__ = "0.1.0"

__all__ = [
    "EdgeRecord", "FlexBasis", "Mesh", "MetricSummary", "build_mesh", "cayley_menger_volume",
    "dihedral_angle", "edge_records", "extend_field", "flex_space", "flux", "metric_summary",
    "oriented_volume", "rigidity_matrix", "subdivide_face", "three_incident_edges_coplanar",
    "tmc_directional_derivative", "total_mean_curvature", "trivial_motion_basis",
    "vertex_star_coplanar", "volume_derivative",
]
