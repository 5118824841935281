//! The coefficients G_k^{(β)}(φ) of
//! ((−i)^{|β|}/|β|!)·∂_y^β e^{iφ/h} = e^{iφ/h}·Σ_k h^{−k} G_k^{(β)}(φ).

use std::collections::BTreeMap;

use crate::eikonal::{multi_indices, MultiIndex, PhaseJet};
use crate::error::Result;
use crate::symring::{ComplexRational, JetSeries, Rat};

#[derive(Clone, Debug)]
pub struct GTable {
    beta_max: u32,
    t_trunc: u32,
    entries: BTreeMap<(u32, MultiIndex), JetSeries>,
}

pub(crate) fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

pub(crate) fn binom_multi(a: &[u32], b: &[u32]) -> i64 {
    a.iter().zip(b).map(|(&x, &y)| binom(x, y)).product()
}

fn binom(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

impl GTable {
    /// Expand the exponential derivatives for all |β| ≤ beta_max from the phase
    /// series Σ_{k≤M} t^k φ_k, keeping t-orders below `t_trunc`.
    pub fn build(phase: &PhaseJet, beta_max: u32, t_trunc: u32) -> Result<GTable> {
        let ctx = phase.ctx().clone();
        let n = phase.model().d() - 1;
        let phi = phase.series(t_trunc);
        let dphi: Vec<JetSeries> = (1..=n).map(|i| phi.diff_y(i)).collect::<std::result::Result<_, _>>()?;
        // D_γ = e^{−iφ/h} ∂^γ e^{iφ/h} = Σ_k h^{−k} D_{γ,k}.
        let mut d: BTreeMap<MultiIndex, Vec<JetSeries>> = BTreeMap::new();
        let mut one = JetSeries::zero(&ctx, t_trunc, 1);
        one.set(0, 0, crate::symring::SymExpr::one(&ctx));
        d.insert(vec![0; n], vec![one]);
        let idx = multi_indices(n, beta_max);
        for g in idx.iter().skip(1) {
            let i = g.iter().position(|&x| x > 0).unwrap();
            let mut prev = g.clone();
            prev[i] -= 1;
            let pd = d[&prev].clone();
            let top = g.iter().sum::<u32>() as usize;
            let mut cur = Vec::with_capacity(top + 1);
            for k in 0..=top {
                let mut s = JetSeries::zero(&ctx, t_trunc, 1);
                if k < pd.len() {
                    s = s.try_add(&pd[k].diff_y(i + 1)?)?;
                }
                if k >= 1 && k - 1 < pd.len() {
                    let prod = dphi[i].try_mul(&pd[k - 1])?.scale(&ComplexRational::i());
                    s = s.try_add(&prod)?;
                }
                cur.push(s);
            }
            d.insert(g.clone(), cur);
        }
        let mut entries = BTreeMap::new();
        for (g, parts) in d {
            let size: u32 = g.iter().sum();
            let pref = ComplexRational::one().mul_i_pow(-(size as i32)).scale(&Rat::new(1, factorial(size)));
            for (k, s) in parts.into_iter().enumerate() {
                entries.insert((k as u32, g.clone()), s.scale(&pref));
            }
        }
        Ok(GTable { beta_max, t_trunc, entries })
    }

    pub fn beta_max(&self) -> u32 {
        self.beta_max
    }

    pub fn t_trunc(&self) -> u32 {
        self.t_trunc
    }

    /// G_k^{(β)}; `None` when k > |β| (those vanish identically) or |β| exceeds the table.
    pub fn get(&self, k: u32, beta: &[u32]) -> Option<&JetSeries> {
        self.entries.get(&(k, beta.to_vec()))
    }

    /// Θ_ν^{(k,β)}: the t^ν coefficient of G_k^{(β)}.
    pub fn theta(&self, nu: u32, k: u32, beta: &[u32]) -> Option<crate::symring::SymExpr> {
        self.get(k, beta).map(|s| s.coeff(nu, 0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, MultiIndex), &JetSeries)> {
        self.entries.iter()
    }
}

pub fn build_g(phase: &PhaseJet, beta_max: u32, m_order: u32) -> Result<GTable> {
    GTable::build(phase, beta_max, m_order)
}
