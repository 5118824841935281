//! Phase jet φ = Σ t^k φ_k solving (∂_tφ)² + ∂_{y₁}φ − ϱ² + g_M(m₀, φ) = O(t^M).

mod checks;
mod model;
mod solve;

pub use checks::{
    check_im_phase, check_im_phase_template, check_phase_grading, check_phase_perturbation, largest_passing_delta,
    sample_mu, GradeEntry, GradingReport, ImPhaseReport, ImSample, PerturbReport,
};
pub use model::{multi_indices, perturb_m_k0, random_template, ModelSpec, ModelTemplate, MultiIndex};
pub use solve::{eikonal_residual, solve_eikonal, PhaseJet};
pub(crate) use solve::eikonal_lhs as eikonal_lhs_series;

#[cfg(test)]
mod tests;
