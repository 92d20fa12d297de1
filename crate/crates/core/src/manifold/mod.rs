//! Discrete metric box, staggered fields, mimetic operators, boundary patches
//! and boundary distance functions.

mod calculus;
mod field;
mod geodesic;
mod grid;
mod patch;
mod sparse;

pub use calculus::{metric_inner, scale_edges, vector_product, Calculus};
pub use field::{nodes_to_edges, Placement, ScalarField, VectorField};
pub use geodesic::{distance_from_nodes, eikonal_function, geodesic_distance, influence_mask, truncate, InfluenceMask};
pub use grid::{det3, inv3, shift, Lattice, MetricGrid, MetricSpec, Tensor, UNIT};
pub use patch::{BoundaryPatch, PatchSpec, Rect, Side};
pub use sparse::Csr;
