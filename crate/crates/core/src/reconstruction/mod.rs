//! Ground-truth boundary-distance embedding, Hausdorff comparison and the
//! separation and density audits.

mod audit;
mod embedding;

pub use audit::{density_audit, separation_audit, DensityReport, SeparationReport};
pub use embedding::{
    check_horizon, depth, distance_fields, embed, ground_truth_embedding, hausdorff, ComparisonReport, EmbeddingImage,
};
