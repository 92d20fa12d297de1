//! Boundary-control reconstruction of the boundary layer of a Riemannian box
//! from simulated electromagnetic response data.
//!
//! Numerical code is generic over [`scalar::Real`]; the aliases below fix the
//! `f64` instantiation used by the command-line tool and the acceptance runs.

pub mod algebra;
pub mod error;
pub mod forward;
pub mod io;
pub mod manifold;
pub mod model_space;
pub mod pipeline;
pub mod reconstruction;
pub mod response;
pub mod scalar;

pub use error::{Error, Result};

pub type Grid = manifold::MetricGrid<f64>;
pub type Patch = manifold::BoundaryPatch<f64>;
pub type Field = manifold::VectorField<f64>;
