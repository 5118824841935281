//! h-graded pieces of b ↦ e^{−iφ/h}E_M(m, e^{iφ/h}b) = Σ_n h^n W_n(b), with
//! W_n(b) = Σ_β K^{(n)}_β ∂_y^β b.

use std::collections::BTreeMap;

use super::gtable::{binom_multi, factorial, GTable};
use crate::eikonal::{MultiIndex, PhaseJet};
use crate::error::Result;
use crate::symring::{ComplexRational, JetSeries, Rat};

#[derive(Clone, Debug)]
pub struct WOperator {
    t_trunc: u32,
    kernels: BTreeMap<u32, Vec<(MultiIndex, JetSeries)>>,
}

fn sub(a: &[u32], b: &[u32]) -> Option<MultiIndex> {
    a.iter().zip(b).map(|(x, y)| x.checked_sub(*y)).collect()
}

impl WOperator {
    /// Kernels K^{(n)}_β for 1 ≤ n ≤ n_max, as t-series mod t^t_trunc.
    pub fn build(phase: &PhaseJet, n_max: u32, t_trunc: u32) -> Result<Self> {
        let model = phase.model();
        let derivs = model.eta_derivatives(t_trunc)?;
        let amax = derivs.iter().map(|(a, _)| a.iter().sum::<u32>()).max().unwrap_or(0);
        let g = GTable::build(phase, amax, t_trunc)?;
        let mut acc: BTreeMap<(u32, MultiIndex), JetSeries> = BTreeMap::new();
        let mut push = |n: u32, beta: MultiIndex, s: JetSeries| -> Result<()> {
            match acc.get_mut(&(n, beta.clone())) {
                Some(e) => *e = e.try_add(&s)?,
                None => {
                    acc.insert((n, beta), s);
                }
            }
            Ok(())
        };
        for (alpha, per_l) in &derivs {
            let asz: u32 = alpha.iter().sum();
            for (&l, dm) in per_l {
                let l = l as u32;
                // ℓ = n, β = 0: the top G_{|α|}^{(α)} term carried by m_n.
                if l >= 1 && l <= n_max {
                    let gs = g.get(asz, alpha).expect("G table covers |alpha|");
                    push(l, vec![0; alpha.len()], dm.try_mul(gs)?)?;
                }
                for n in (l + 1)..=n_max {
                    let gap = n - l;
                    if gap > asz {
                        break;
                    }
                    for beta in crate::eikonal::multi_indices(alpha.len(), gap) {
                        let Some(rest) = sub(alpha, &beta) else { continue };
                        let bsz: u32 = beta.iter().sum();
                        let Some(gs) = g.get(asz - gap, &rest) else { continue };
                        let c = ComplexRational::from_rat(Rat::new(
                            binom_multi(alpha, &beta) * factorial(asz - bsz),
                            factorial(asz),
                        ))
                        .mul_i_pow(-(bsz as i32));
                        push(n, beta, dm.try_mul(gs)?.scale(&c))?;
                    }
                }
            }
        }
        let mut kernels: BTreeMap<u32, Vec<(MultiIndex, JetSeries)>> = BTreeMap::new();
        for ((n, beta), s) in acc {
            if !s.is_zero() {
                kernels.entry(n).or_default().push((beta, s));
            }
        }
        Ok(Self { t_trunc, kernels })
    }

    pub fn t_trunc(&self) -> u32 {
        self.t_trunc
    }

    pub fn kernels(&self, n: u32) -> &[(MultiIndex, JetSeries)] {
        self.kernels.get(&n).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Pairs (K^{(n)}_β, ∂_y^β b) whose products sum to W_n(b).
    pub(crate) fn factors(&self, n: u32, b: &JetSeries) -> Result<Vec<(&JetSeries, JetSeries)>> {
        let mut out = Vec::new();
        for (beta, k) in self.kernels(n) {
            let mut db = b.clone();
            for (i, &e) in beta.iter().enumerate() {
                for _ in 0..e {
                    db = db.diff_y(i + 1)?;
                }
            }
            if !db.is_zero() {
                out.push((k, db));
            }
        }
        Ok(out)
    }

    /// W_n(b), truncated to the smaller of the kernel and `b` truncations.
    pub fn apply(&self, n: u32, b: &JetSeries) -> Result<JetSeries> {
        let f = self.factors(n, b)?;
        if f.is_empty() {
            return Ok(JetSeries::zero(b.ctx(), b.t_trunc().min(self.t_trunc), b.h_trunc()));
        }
        let pairs: Vec<(&JetSeries, &JetSeries)> = f.iter().map(|(k, d)| (*k, d)).collect();
        Ok(JetSeries::sum_of_products(b.ctx(), &pairs)?)
    }
}
