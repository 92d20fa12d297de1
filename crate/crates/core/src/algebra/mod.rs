//! Commutator and compact-defect diagnostics, generated-family closure, and
//! joint diagonalization of the eikonal family into a spectrum cloud.

mod defect;
mod jad;
mod profile;

pub use defect::{compact_defect, DefectReport};
pub use jad::{joint_diagonalize, spectrum_cloud, JointDiagonalization, SpectrumCloud};
pub use profile::{algebra_closure, commutator, commutator_profile, CommutatorProfile};
