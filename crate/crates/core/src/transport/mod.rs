//! Amplitude jets a_{k,j} from the transport recursion, and the exponential
//! derivative coefficients G_k^{(β)} they are built from.

mod checks;
mod gtable;
mod solve;
mod wop;

pub use checks::{
    amp_response, check_amp_grading, check_amp_scaling_numeric, check_amp_structure, loglog_slope, ScalingReport,
};
pub use gtable::{build_g, GTable};
pub(crate) use gtable::{binom_multi, factorial};
pub use solve::{build_e_table, solve_transport, transport_residual, transport_residuals, AmplitudeJet};
pub use wop::WOperator;

#[cfg(test)]
mod tests;
