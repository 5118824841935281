use serde::Serialize;

use crate::eikonal::{multi_indices, MultiIndex, PhaseJet};
use crate::error::{Error, Result};
use crate::symring::{ComplexRational, JetSeries, Rat, SymExpr};
use crate::transport::{binom_multi, factorial, transport_residuals, AmplitudeJet, GTable};

#[derive(Clone, Debug, PartialEq)]
pub struct CompositionExpansion {
    pub result: JetSeries,
    pub m: usize,
}

fn minus_i_h(s: &JetSeries, times: u32) -> JetSeries {
    s.shift_h(times).scale(&ComplexRational::one().mul_i_pow(-(times as i32)))
}

fn diff_y_multi(s: &JetSeries, beta: &[u32]) -> Result<JetSeries> {
    let mut out = s.clone();
    for (i, &b) in beta.iter().enumerate() {
        for _ in 0..b {
            out = out.diff_y(i + 1)?;
        }
    }
    Ok(out)
}

fn diff_eta_multi(s: &JetSeries, alpha: &[u32]) -> Result<JetSeries> {
    let mut out = s.clone();
    for (i, &a) in alpha.iter().enumerate() {
        for _ in 0..a {
            out = out.diff_eta(i + 1)?;
        }
    }
    Ok(out)
}

/// Σ_{|α|≤M} ((−ih)^{|α|}/|α|!)·∂_η^α a·∂_y^α b, kept to the smaller truncation.
pub fn compose_em(a: &JetSeries, b: &JetSeries, m: usize) -> Result<CompositionExpansion> {
    if a.ctx().d() != b.ctx().d() {
        return Err(Error::Sym(crate::symring::SymError::Dimension("compose_em: dimensions differ".into())));
    }
    let n = a.ctx().n_y();
    let (tt, ht) = (a.t_trunc().min(b.t_trunc()), a.h_trunc().min(b.h_trunc()));
    let mut out = JetSeries::zero(a.ctx(), tt, ht);
    for alpha in multi_indices(n, m as u32) {
        let size: u32 = alpha.iter().sum();
        let da = diff_eta_multi(a, &alpha)?;
        if da.is_zero() {
            continue;
        }
        let db = diff_y_multi(b, &alpha)?;
        if db.is_zero() {
            continue;
        }
        let term = minus_i_h(&da.try_mul(&db)?, size).scale(&ComplexRational::from_rat(Rat::new(1, factorial(size))));
        out = out.try_add(&term)?;
    }
    Ok(CompositionExpansion { result: out, m })
}

/// How the conjugated composition e^{−iφ/h}E_M(m, e^{iφ/h}a) is expanded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AssemblyPath {
    /// Leibniz rule on ∂_y^α(e^{iφ/h}a) with the exponential derivatives read
    /// from the G table.
    Direct,
    /// Y_0 = a, Y_{α+e_i} = −ih∂_iY_α + ∂_iφ·Y_α; no G table involved.
    Recursive,
    /// Eikonal left side times a plus Σ_j h^{j+1}·(row-j transport identity).
    Regrouped,
}

/// The full symbol m = Σ t^k h^j m_{k,j} as a (t, h) series.
fn m_full(phase: &PhaseJet, tt: u32, ht: u32) -> JetSeries {
    let model = phase.model();
    let mut s = JetSeries::zero(phase.ctx(), tt, ht);
    for (&(k, j), e) in model.entries() {
        s.set(k as u32, j as u32, e.clone());
    }
    s
}

/// e^{−iφ/h}E_M(m, e^{iφ/h}a) mod (t^tt, h^ht).
fn conjugated_composition(phase: &PhaseJet, a: &JetSeries, tt: u32, ht: u32, path: AssemblyPath) -> Result<JetSeries> {
    let ctx = phase.ctx();
    let model = phase.model();
    let n = ctx.n_y();
    let amax = model.order().min(model.eta_degree()) as u32;
    let m = m_full(phase, tt, ht);
    let dm: Vec<(MultiIndex, JetSeries)> = multi_indices(n, amax)
        .into_iter()
        .map(|al| diff_eta_multi(&m, &al).map(|s| (al, s)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|(_, s)| !s.is_zero())
        .collect();
    let mut out = JetSeries::zero(ctx, tt, ht);
    match path {
        AssemblyPath::Direct => {
            let g = GTable::build(phase, amax, tt)?;
            let mut factors: Vec<(JetSeries, JetSeries)> = Vec::new();
            // Q_β = Σ_{α≥β} (C(α,β)|α−β|!/|α|!)·∂_η^α m·Σ_k h^{|α−β|−k}G_k^{(α−β)}
            for beta in multi_indices(n, amax) {
                let bsz: u32 = beta.iter().sum();
                let mut q = JetSeries::zero(ctx, tt, ht);
                for (alpha, dma) in &dm {
                    let Some(gamma): Option<MultiIndex> =
                        alpha.iter().zip(&beta).map(|(x, y)| x.checked_sub(*y)).collect()
                    else {
                        continue;
                    };
                    let asz: u32 = alpha.iter().sum();
                    let gsz = asz - bsz;
                    let mut pg = JetSeries::zero(ctx, tt, ht);
                    for k in 0..=gsz {
                        if let Some(gk) = g.get(k, &gamma) {
                            pg = pg.try_add(&gk.with_trunc(tt, ht).shift_h(gsz - k))?;
                        }
                    }
                    let c = Rat::new(binom_multi(alpha, &beta) * factorial(gsz), factorial(asz));
                    q = q.try_add(&dma.try_mul(&pg)?.scale(&ComplexRational::from_rat(c)))?;
                }
                if q.is_zero() {
                    continue;
                }
                let db = minus_i_h(&diff_y_multi(a, &beta)?, bsz);
                factors.push((q, db));
            }
            let pairs: Vec<(&JetSeries, &JetSeries)> = factors.iter().map(|(q, d)| (q, d)).collect();
            if !pairs.is_empty() {
                out = out.try_add(&JetSeries::sum_of_products(ctx, &pairs)?)?;
            }
        }
        AssemblyPath::Recursive => {
            let phi = phase.series(tt).with_trunc(tt, ht);
            let dphi: Vec<JetSeries> = (1..=n).map(|i| phi.diff_y(i)).collect::<std::result::Result<_, _>>()?;
            let mut y: std::collections::BTreeMap<MultiIndex, JetSeries> = std::collections::BTreeMap::new();
            y.insert(vec![0; n], a.with_trunc(tt, ht));
            for alpha in multi_indices(n, amax).into_iter().skip(1) {
                let i = alpha.iter().position(|&x| x > 0).expect("nonzero index");
                let mut prev = alpha.clone();
                prev[i] -= 1;
                let p = &y[&prev];
                let next = minus_i_h(&p.diff_y(i + 1)?, 1).try_add(&dphi[i].try_mul(p)?)?;
                y.insert(alpha, next);
            }
            for (alpha, dma) in &dm {
                let asz: u32 = alpha.iter().sum();
                let term = dma.try_mul(&y[alpha])?.scale(&ComplexRational::from_rat(Rat::new(1, factorial(asz))));
                out = out.try_add(&term)?;
            }
        }
        AssemblyPath::Regrouped => unreachable!("regrouped assembly does not expand the composition"),
    }
    Ok(out)
}

/// A_M = ((∂_tφ)² + ∂_{y₁}φ − ϱ² − ih∂_t²φ)a − 2ih∂_tφ∂_ta − ih∂_{y₁}a − h²∂_t²a
///       + e^{−iφ/h}E_M(m, e^{iφ/h}a), mod (t^tt, h^ht).
pub fn assemble_am_with(amps: &AmplitudeJet, tt: u32, ht: u32, path: AssemblyPath) -> Result<JetSeries> {
    let phase = amps.phase();
    let ctx = phase.ctx();
    if path == AssemblyPath::Regrouped {
        return assemble_regrouped(amps, tt, ht);
    }
    let ni = ComplexRational::new(Rat::zero(), Rat::from_int(-1));
    let phi = phase.series(tt + 2).with_trunc(tt + 2, ht);
    let phi_t = phi.dt();
    let phi_tt = phi_t.dt();
    let phi_t = phi_t.with_trunc(tt, ht);
    let a = amps.full_series(tt + 2, ht);
    let a_t = a.dt();
    let a_tt = a_t.dt();
    let a_t = a_t.with_trunc(tt, ht);
    let a = a.with_trunc(tt, ht);

    let mut coef = phi_t.try_mul(&phi_t)?;
    coef = coef.try_add(&phi.diff_y(1)?.with_trunc(tt, ht))?;
    coef.add_at(0, 0, &SymExpr::rho_pow(ctx, 2, ComplexRational::from_int(-1)));
    coef = coef.try_add(&phi_tt.shift_h(1).scale(&ni))?;
    let c1 = phi_t.shift_h(1).scale(&ni.scale(&Rat::from_int(2)));
    let mut out = JetSeries::sum_of_products(ctx, &[(&coef, &a), (&c1, &a_t)])?;
    out = out.try_add(&a.diff_y(1)?.shift_h(1).scale(&ni))?;
    out = out.try_sub(&a_tt.with_trunc(tt, ht).shift_h(2))?;
    out.try_add(&conjugated_composition(phase, &a, tt, ht, path)?).map_err(Into::into)
}

fn assemble_regrouped(amps: &AmplitudeJet, tt: u32, ht: u32) -> Result<JetSeries> {
    let phase = amps.phase();
    let m = amps.order();
    if tt > m as u32 + 1 || ht > m as u32 + 2 {
        return Err(Error::InvalidModel(format!(
            "regrouped assembly covers t < {} and h < {}, asked for t < {tt}, h < {ht}",
            m + 1,
            m + 2
        )));
    }
    let lhs = crate::eikonal::eikonal_lhs_series(phase, tt)?;
    let mut out = JetSeries::zero(phase.ctx(), tt, ht);
    for j in 0..ht {
        let row = amps.row(j as usize, tt);
        out = out.try_add(&lhs.try_mul(&row)?.shift_h(j).with_trunc(tt, ht))?;
    }
    let rs = transport_residuals(amps)?;
    for j in 0..ht.saturating_sub(1) {
        out = out.try_add(&rs[j as usize].with_trunc(tt, ht).shift_h(j + 1))?;
    }
    Ok(out)
}

/// A_M through the forbidden window t < M, h < M+2 (direct expansion).
pub fn assemble_am(amps: &AmplitudeJet) -> Result<JetSeries> {
    let m = amps.order() as u32;
    assemble_am_with(amps, m, m + 2, AssemblyPath::Direct)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidualReport {
    pub model_id: String,
    /// Highest t- and h-orders inspected inside the window.
    pub max_t_order: u32,
    pub max_h_order: u32,
    /// (t-order, h-order) of every nonzero forbidden coefficient.
    pub nonzero: Vec<(u32, u32)>,
}

impl ResidualReport {
    pub fn pass(&self) -> bool {
        self.nonzero.is_empty()
    }
}

/// Every nonzero coefficient must have t-order ≥ M or h-order ≥ M+2.
pub fn verify_am_structure(am: &JetSeries, m: usize) -> ResidualReport {
    let (tw, hw) = (m as u32, m as u32 + 2);
    let nonzero = am.iter().filter(|((t, h), c)| *t < tw && *h < hw && !c.is_zero()).map(|(k, _)| *k).collect();
    ResidualReport {
        model_id: String::new(),
        max_t_order: tw.min(am.t_trunc()).saturating_sub(1),
        max_h_order: hw.min(am.h_trunc()).saturating_sub(1),
        nonzero,
    }
}
