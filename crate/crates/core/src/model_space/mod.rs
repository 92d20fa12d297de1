//! Nested reachable subspaces, their projections and operator eikonals, on
//! the data side (model space) and on the oracle side (solver snapshots).

mod chain;
mod oracle;

pub use chain::{eikonal, projection, reachable_subspace, spectral_norm, EikonalOperator, ProjectionOperator, SubspaceChain};
pub use oracle::{mult_project, oracle_eikonal, primary_values, OracleSpace};
