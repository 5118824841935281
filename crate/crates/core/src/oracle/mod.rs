//! Reference solutions of the model boundary problem and error measurement.

mod airy;
mod bvp2d;
mod measure;
mod mode_ode;
mod norm;

pub use airy::{airy_dn, airy_log_derivative, airy_series};
pub use bvp2d::{dn_matrix_2d, dn_matrix_block, solve_bvp_2d, solve_bvp_block, BlockModel, BvpOptions, DnMatrix};
pub use measure::{
    airy_coefficient, bound_value, measure_block, measure_diagonal, oracle_dn_values, DNMeasurement, ModeOracle,
};
pub use mode_ode::{
    design_grid, mode_dn, model_profile, solve_mode_ode, solve_mode_ode_on, ModeODEProblem, ModeSolution, Profile,
    StretchedGrid,
};
pub use norm::{op_norm_estimate, DiagonalOperator, FnOperator, GridOperator, MatrixOperator, NormEstimate};

#[cfg(test)]
mod tests;
