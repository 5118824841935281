use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gtable::factorial;
use super::solve::{solve_transport, AmplitudeJet};
use crate::eikonal::{multi_indices, solve_eikonal, GradingReport, ModelSpec, ModelTemplate, PerturbReport};
use crate::error::{Error, Result};
use crate::symring::{rho_value, ComplexRational, Rat, SymExpr};

/// a_{k,j} and ∂_y^α a_{k,j} (|α| ≤ 3) against ϱ^{−2k−3j}.
pub fn check_amp_grading(amps: &AmplitudeJet) -> Result<GradingReport> {
    let mut rep = GradingReport::default();
    let n = amps.phase().model().d() - 1;
    for (&(k, j), a) in amps.iter() {
        let bound = -2 * k as i32 - 3 * j as i32;
        for alpha in multi_indices(n, 3) {
            let mut e = a.clone();
            for (i, &c) in alpha.iter().enumerate() {
                for _ in 0..c {
                    e = e.diff_y(i + 1)?;
                }
            }
            rep.record(format!("a[{k},{j}] d_y^{alpha:?}"), &e, bound);
        }
    }
    Ok(rep)
}

/// −((k+j)!/k!)·δ/(−2iϱ)^{j+2}.
pub fn amp_response(delta: &SymExpr, k: usize, j: usize) -> Result<SymExpr> {
    let base = ComplexRational::new(Rat::zero(), Rat::from_int(-2)).pow(-(j as i32 + 2))?;
    let c = base.scale(&Rat::new(-factorial((k + j) as u32) / factorial(k as u32), 1));
    Ok(delta.mul_rho(-(j as i32) - 2).scale(&c))
}

/// Perturbs m_{k+j,0} by δ and re-solves. Every a_{k',j'} with k'+j' < k+j must
/// be unchanged; for k'+j' = k+j, k' ≥ 1 the change must equal the exact response.
pub fn check_amp_structure(model: &ModelSpec, k: usize, j: usize, delta: &SymExpr) -> Result<PerturbReport> {
    if k == 0 {
        return Err(Error::InvalidModel("amplitude structure check needs k >= 1".into()));
    }
    let n = k + j;
    let base = solve_transport(&solve_eikonal(model)?)?;
    let pert = solve_transport(&solve_eikonal(&model.perturb_m_k0(n, delta)?)?)?;
    let mut rep = PerturbReport::default();
    for (&(kk, jj), a) in base.iter() {
        if kk + jj > n {
            continue;
        }
        rep.checked += 1;
        let diff = pert.a(kk, jj).try_sub(a)?;
        let expect = if kk + jj == n && kk >= 1 { amp_response(delta, kk, jj)? } else { SymExpr::zero(a.ctx()) };
        if diff != expect {
            rep.violations.push(format!("a[{kk},{jj}] response {diff} != {expect}"));
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub k: usize,
    pub j: usize,
    /// (μ, max |a_{k,j}| over sampled y at η₁ = 0).
    pub points: Vec<(f64, f64)>,
    pub fitted_exponent: f64,
    pub predicted_exponent: f64,
}

impl ScalingReport {
    /// Decay in μ no worse than predicted, with slack `tol`.
    pub fn pass(&self, tol: f64) -> bool {
        self.fitted_exponent >= self.predicted_exponent - tol
    }
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    num / den
}

/// Samples |a_{k,j}| at η₁ = 0 over log-spaced μ ∈ [0.05, 1] and fits the exponent
/// against the predicted |μ|^{−k−3j/2}.
pub fn check_amp_scaling_numeric(
    template: &ModelTemplate,
    k: usize,
    j: usize,
    n_mu: usize,
    seed: u64,
) -> Result<ScalingReport> {
    let mut t = template.clone();
    t.order = t.order.max(k.max(j));
    let mut points = Vec::new();
    for i in 0..n_mu {
        let x = (0.05f64.ln() + (i as f64 + 0.5) / n_mu as f64 * (1.0f64.ln() - 0.05f64.ln())).exp();
        let mu = Rat::approximate(x, 10_000);
        let phase = solve_eikonal(&t.instantiate(mu.clone())?)?;
        let amps = solve_transport(&phase)?;
        let c = amps.a(k, j).compile();
        let rho = rho_value(0.0, mu.to_f64())?;
        let n_y = phase.ctx().n_y();
        let n_tail = phase.ctx().n_eta_tail();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: f64 = 0.0;
        for s in 0..16 {
            let y: Vec<f64> = (0..n_y).map(|_| if s == 0 { 0.0 } else { rng.gen_range(-1.0..=1.0) }).collect();
            let tail: Vec<f64> = (0..n_tail).map(|_| if s == 0 { 0.0 } else { rng.gen_range(-0.5..=0.5) }).collect();
            best = best.max(c.eval(rho, &y, &tail).norm());
        }
        points.push((mu.to_f64(), best));
    }
    Ok(ScalingReport {
        k,
        j,
        fitted_exponent: loglog_slope(&points),
        predicted_exponent: -(k as f64) - 1.5 * j as f64,
        points,
    })
}
