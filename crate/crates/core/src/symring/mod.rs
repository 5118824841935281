//! Exact symbolic ring for jet coefficients.

mod expr;
mod intform;
mod jet;
mod scalar;
mod text;

pub use expr::{
    diff_eta, diff_y, eval_numeric, rho_degree, rho_value, ring_add, ring_mul, CompiledExpr, Ctx, EvalPoint, Monomial,
    SymExpr, C64, MAX_DIM,
};
pub use jet::{sum_exprs, JetSeries};
pub use scalar::{ComplexRational, Rat};
pub use text::parse_expr;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("mu mismatch: {0}")]
    MuMismatch(String),
    #[error("axis {0} out of range for d = {1}")]
    Axis(usize, usize),
    #[error("mu = 0: the branch of rho is ill-conditioned")]
    ZeroMu,
    #[error("parse error: {0}")]
    Parse(String),
}
