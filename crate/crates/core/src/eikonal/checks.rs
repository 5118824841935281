use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{multi_indices, ModelSpec, ModelTemplate};
use super::solve::{solve_eikonal, PhaseJet};
use crate::error::Result;
use crate::symring::{rho_value, ComplexRational, Rat, SymExpr};

/// One graded quantity: `order` is the lowest ϱ exponent present, `degree` the highest.
#[derive(Clone, Debug, PartialEq)]
pub struct GradeEntry {
    pub label: String,
    pub order: Option<i32>,
    pub degree: Option<i32>,
    pub bound: i32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradingReport {
    pub entries: Vec<GradeEntry>,
    pub violations: Vec<String>,
}

impl GradingReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    /// Record `e` against the bound. Decay as |ϱ| → ∞ is governed by the
    /// lowest exponent: ϱ is small near the glancing set, so a term ϱ^e with
    /// e below the bound dominates there.
    pub(crate) fn record(&mut self, label: String, e: &SymExpr, bound: i32) {
        let order = e.rho_order();
        if let Some(o) = order {
            if o < bound {
                self.violations.push(format!("{label}: lowest rho power {o} < {bound}"));
            }
        }
        self.entries.push(GradeEntry { label, order, degree: e.rho_degree(), bound });
    }

    pub fn merge(&mut self, other: GradingReport) {
        self.entries.extend(other.entries);
        self.violations.extend(other.violations);
    }
}

/// φ_k and ∂_y^α φ_k for |α| ≤ 3 against ϱ^{3−2k}.
pub fn check_phase_grading(phase: &PhaseJet) -> Result<GradingReport> {
    let mut rep = GradingReport::default();
    let n = phase.model().d() - 1;
    for k in 1..=phase.len() {
        let bound = 3 - 2 * k as i32;
        for alpha in multi_indices(n, 3) {
            let mut e = phase.phi(k);
            for (i, &a) in alpha.iter().enumerate() {
                for _ in 0..a {
                    e = e.diff_y(i + 1)?;
                }
            }
            rep.record(format!("phi[{k}] d_y^{alpha:?}"), &e, bound);
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImSample {
    pub t: f64,
    pub y: Vec<f64>,
    pub eta1: f64,
    pub eta_tail: Vec<f64>,
    pub mu: f64,
    pub im_phi: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ImPhaseReport {
    pub samples: usize,
    pub violations: usize,
    pub first_violation: Option<ImSample>,
}

impl ImPhaseReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }

    pub fn merge(&mut self, o: ImPhaseReport) {
        self.samples += o.samples;
        self.violations += o.violations;
        if self.first_violation.is_none() {
            self.first_violation = o.first_violation;
        }
    }
}

/// Samples 0 < t ≤ 2δ|ϱ|², y ∈ [−1,1]^{d−1}, η₁ ∈ [−1/2,1/2], η_j ∈ [−1/2,1/2]
/// at the phase's own μ and tests Im φ ≥ t·Im ϱ/2.
pub fn check_im_phase(phase: &PhaseJet, delta: f64, n_samples: usize, seed: u64) -> Result<ImPhaseReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = phase.ctx();
    let mu = ctx.mu().to_f64();
    let compiled: Vec<_> = phase.phis().iter().map(|p| p.compile()).collect();
    let mut rep = ImPhaseReport::default();
    for _ in 0..n_samples {
        let y: Vec<f64> = (0..ctx.n_y()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let eta_tail: Vec<f64> = (0..ctx.n_eta_tail()).map(|_| rng.gen_range(-0.5..=0.5)).collect();
        let eta1 = rng.gen_range(-0.5..=0.5);
        let rho = rho_value(eta1, mu)?;
        let u: f64 = 1.0 - rng.gen::<f64>();
        let t = 2.0 * delta * rho.norm_sqr() * u;
        let mut phi = num::Complex::new(0.0, 0.0);
        let mut tk = 1.0;
        for c in &compiled {
            tk *= t;
            phi += c.eval(rho, &y, &eta_tail) * tk;
        }
        let bound = t * rho.im / 2.0;
        rep.samples += 1;
        if phi.im < bound {
            rep.violations += 1;
            if rep.first_violation.is_none() {
                rep.first_violation = Some(ImSample { t, y, eta1, eta_tail, mu, im_phi: phi.im, bound });
            }
        }
    }
    Ok(rep)
}

/// Log-uniform rational μ in [lo, hi].
pub fn sample_mu(rng: &mut impl Rng, lo: f64, hi: f64) -> Rat {
    let x = (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp();
    Rat::approximate(x, 1000)
}

/// Splits `n_samples` across `n_mu` log-uniform values of μ ∈ [0.05, 1],
/// re-solving the phase for each.
pub fn check_im_phase_template(
    template: &ModelTemplate,
    delta: f64,
    n_samples: usize,
    n_mu: usize,
    seed: u64,
) -> Result<ImPhaseReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = ImPhaseReport::default();
    let n_mu = n_mu.max(1);
    for i in 0..n_mu {
        let mu = sample_mu(&mut rng, 0.05, 1.0);
        let model = template.instantiate(mu)?;
        let phase = solve_eikonal(&model)?;
        let count = n_samples / n_mu + usize::from(i < n_samples % n_mu);
        rep.merge(check_im_phase(&phase, delta, count, rng.gen())?);
    }
    Ok(rep)
}

/// Largest δ from `candidates` (sorted ascending) such that it and every
/// smaller candidate pass. `None` when the smallest already fails.
pub fn largest_passing_delta(
    template: &ModelTemplate,
    candidates: &[f64],
    n_samples: usize,
    n_mu: usize,
    seed: u64,
) -> Result<Option<f64>> {
    let mut best = None;
    for &d in candidates {
        if check_im_phase_template(template, d, n_samples, n_mu, seed)?.pass() {
            best = Some(d);
        } else {
            break;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PerturbReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl PerturbReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, o: PerturbReport) {
        self.checked += o.checked;
        self.violations.extend(o.violations);
    }
}

/// m_{K,0} → m_{K,0} + δ must leave φ_k (k ≤ K) unchanged and shift φ_{K+1}
/// by exactly −δ/(2(K+1)ϱ).
pub fn check_phase_perturbation(model: &ModelSpec, k: usize, delta: &SymExpr) -> Result<PerturbReport> {
    let base = solve_eikonal(model)?;
    let pert = solve_eikonal(&model.perturb_m_k0(k, delta)?)?;
    let mut rep = PerturbReport::default();
    for kk in 1..=k.min(base.len()) {
        rep.checked += 1;
        if base.phi(kk) != pert.phi(kk) {
            rep.violations.push(format!("phi[{kk}] moved under m[{k},0] perturbation"));
        }
    }
    if k < base.len() {
        rep.checked += 1;
        let diff = pert.phi(k + 1).try_sub(&base.phi(k + 1))?;
        let expect = delta.mul_rho(-1).scale(&ComplexRational::from_rat(Rat::new(-1, 2 * (k as i64 + 1))));
        if diff != expect {
            rep.violations.push(format!("phi[{}] response {} != {}", k + 1, diff, expect));
        }
    }
    Ok(rep)
}
