//! Control family, response matrix, connecting form and the model operator
//! `|W^T|`.

mod assemble;
mod basis;

pub use assemble::{
    assemble_response, cholesky, connecting_form, gram_matrix, lower_solve, odd_continuation, odd_continuation_adjoint,
    simulate, sorted_eigen, sqrt_operator, GramMatrix, ModelOperator, ResponseData, ResponseMatrix,
};
pub use basis::{BasisControl, BasisSpec, ControlBasis};
