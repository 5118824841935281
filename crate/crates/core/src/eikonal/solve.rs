use std::sync::Arc;

use super::model::ModelSpec;
use crate::error::Result;
use crate::symring::{ComplexRational, Ctx, JetSeries, Rat, SymExpr};
use crate::transport::GTable;

/// Phase jet φ = Σ_{k=1}^M t^k φ_k; `phis[0]` is φ₁ = ϱ.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseJet {
    model: Arc<ModelSpec>,
    phis: Vec<SymExpr>,
}

impl PhaseJet {
    pub fn from_parts(model: Arc<ModelSpec>, phis: Vec<SymExpr>) -> Self {
        Self { model, phis }
    }

    pub fn model(&self) -> &Arc<ModelSpec> {
        &self.model
    }

    pub fn ctx(&self) -> &Arc<Ctx> {
        self.model.ctx()
    }

    /// φ_k for k ≥ 1 (zero beyond the computed range).
    pub fn phi(&self, k: usize) -> SymExpr {
        if k == 0 || k > self.phis.len() {
            return SymExpr::zero(self.ctx());
        }
        self.phis[k - 1].clone()
    }

    pub fn phis(&self) -> &[SymExpr] {
        &self.phis
    }

    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }

    /// Σ t^k φ_k mod t^t_trunc.
    pub fn series(&self, t_trunc: u32) -> JetSeries {
        let mut s = JetSeries::zero(self.ctx(), t_trunc, 1);
        for (i, p) in self.phis.iter().enumerate() {
            s.set(i as u32 + 1, 0, p.clone());
        }
        s
    }

    /// Copy with φ_k replaced (used for negative controls).
    pub fn with_phi(&self, k: usize, value: SymExpr) -> Self {
        let mut phis = self.phis.clone();
        phis[k - 1] = value;
        Self { model: self.model.clone(), phis }
    }
}

/// (∂_tφ)² + ∂_{y₁}φ − ϱ² + g_M(m₀, φ) mod t^t_trunc.
pub(crate) fn eikonal_lhs(phase: &PhaseJet, t_trunc: u32) -> Result<JetSeries> {
    let model = phase.model();
    let ctx = phase.ctx();
    let phi = phase.series(t_trunc + 1);
    let phi_t = phi.dt().with_trunc(t_trunc, 1);
    let mut lhs = phi_t.try_mul(&phi_t)?;
    lhs = lhs.try_add(&phi.diff_y(1)?.with_trunc(t_trunc, 1))?;
    lhs.add_at(0, 0, &SymExpr::rho_pow(ctx, 2, ComplexRational::from_int(-1)));
    let derivs = model.eta_derivatives(t_trunc)?;
    let beta_max = derivs.iter().map(|(a, _)| a.iter().sum::<u32>()).max().unwrap_or(0);
    let g = GTable::build(phase, beta_max, t_trunc)?;
    for (alpha, per_j) in &derivs {
        let Some(m0) = per_j.get(&0) else { continue };
        let size: u32 = alpha.iter().sum();
        if let Some(gs) = g.get(size, alpha) {
            lhs = lhs.try_add(&m0.try_mul(gs)?)?;
        }
    }
    Ok(lhs)
}

/// φ₁ = ϱ, then for K = 1..M−1 the t^K identity fixes φ_{K+1} through the
/// single term 2(K+1)ϱφ_{K+1}.
pub fn solve_eikonal(model: &ModelSpec) -> Result<PhaseJet> {
    let model = Arc::new(model.clone());
    let ctx = model.ctx().clone();
    let m = model.order();
    let mut phase = PhaseJet { model: model.clone(), phis: vec![SymExpr::rho(&ctx)] };
    for k in 1..m {
        let lhs = eikonal_lhs(&phase, k as u32 + 1)?;
        let r = lhs.coeff(k as u32, 0);
        let next = r.mul_rho(-1).scale(&ComplexRational::from_rat(Rat::new(-1, 2 * (k as i64 + 1))));
        phase.phis.push(next);
    }
    Ok(phase)
}

/// Left side of the eikonal equation as a t-series through order M.
pub fn eikonal_residual(phase: &PhaseJet) -> Result<JetSeries> {
    eikonal_lhs(phase, phase.model().order() as u32 + 1)
}
