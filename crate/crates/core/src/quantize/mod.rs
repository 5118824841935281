//! Semiclassical quantization on the torus: grids, cutoffs, the parametrix and
//! the truncated DN symbols.

mod cutoff;
mod grid;
mod parametrix;

pub use cutoff::{bump, bump_jet, cutoff_Phi, cutoff_jet, CutoffSpec};
pub use grid::{composition_defect, op_apply, op_apply_adjoint, symbol_matrix, GridFn, Symbol, TorusGrid, WINDOW};
pub use parametrix::{
    dn_symbol, dn_symbol_exact, dn_symbol_value, evaluate_parametrix, evaluate_parametrix_with,
    parametrix_residual_norm, DNSymbol, NumericJets, PointJets, TPoly,
};

#[cfg(test)]
mod tests;
