//! Scalar special functions and matrix kernels.

pub mod caputo;
pub mod gamma;
pub mod matrix;
pub mod ml;

pub use caputo::{caputo_numeric, caputo_numeric_matrix};
pub use gamma::{gamma, rgamma};
pub use matrix::{matrix_exp, ml_matrix, solve_linear, solve_linear_left};
pub use ml::{ml_scalar, ml_scalar_with, MlOptions, MlParams};
