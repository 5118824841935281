use std::collections::{BTreeMap, HashMap};

use super::wop::WOperator;
use crate::eikonal::{MultiIndex, PhaseJet};
use crate::error::{Error, Result};
use crate::symring::{ComplexRational, JetSeries, Rat, SymExpr};

/// Amplitude jets a_{k,j}, 0 ≤ k, j ≤ M. A partially known jet simply lacks entries.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeJet {
    phase: PhaseJet,
    amps: BTreeMap<(usize, usize), SymExpr>,
}

impl AmplitudeJet {
    /// Only the boundary data a_{0,0} = 1, a_{0,j} = 0.
    pub fn boundary(phase: &PhaseJet) -> Self {
        let m = phase.model().order();
        let ctx = phase.ctx();
        let mut amps = BTreeMap::new();
        for j in 0..=m {
            amps.insert((0, j), if j == 0 { SymExpr::one(ctx) } else { SymExpr::zero(ctx) });
        }
        Self { phase: phase.clone(), amps }
    }

    pub fn phase(&self) -> &PhaseJet {
        &self.phase
    }

    pub fn order(&self) -> usize {
        self.phase.model().order()
    }

    pub fn is_known(&self, k: usize, j: usize) -> bool {
        self.amps.contains_key(&(k, j))
    }

    pub fn get(&self, k: usize, j: usize) -> Result<&SymExpr> {
        self.amps.get(&(k, j)).ok_or(Error::MissingAmplitude { k, j })
    }

    /// a_{k,j}, zero when not stored.
    pub fn a(&self, k: usize, j: usize) -> SymExpr {
        self.amps.get(&(k, j)).cloned().unwrap_or_else(|| SymExpr::zero(self.phase.ctx()))
    }

    pub fn set(&mut self, k: usize, j: usize, v: SymExpr) {
        self.amps.insert((k, j), v);
    }

    /// Copy with one entry overwritten (negative controls).
    pub fn with_amp(&self, k: usize, j: usize, v: SymExpr) -> Self {
        let mut c = self.clone();
        c.set(k, j, v);
        c
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &SymExpr)> {
        self.amps.iter()
    }

    /// a_j(t) = Σ_k t^k a_{k,j} mod t^t_trunc; entries not stored count as zero.
    pub fn row(&self, j: usize, t_trunc: u32) -> JetSeries {
        let mut s = JetSeries::zero(self.phase.ctx(), t_trunc, 1);
        for ((k, jj), e) in self.amps.range((0, j)..) {
            if *jj == j {
                s.set(*k as u32, 0, e.clone());
            }
        }
        s
    }

    /// Like `row` but fails when any of a_{0..=kmax, j} is unknown.
    pub fn row_checked(&self, j: usize, kmax: usize, t_trunc: u32) -> Result<JetSeries> {
        for k in 0..=kmax.min(t_trunc as usize - 1) {
            self.get(k, j)?;
        }
        Ok(self.row(j, t_trunc))
    }

    /// Σ_j h^j a_j(t) as a (t, h) series.
    pub fn full_series(&self, t_trunc: u32, h_trunc: u32) -> JetSeries {
        let mut s = JetSeries::zero(self.phase.ctx(), t_trunc, h_trunc);
        for ((k, j), e) in &self.amps {
            s.set(*k as u32, *j as u32, e.clone());
        }
        s
    }
}

pub(crate) struct Context {
    pub t_trunc: u32,
    pub w: WOperator,
    pub phi_t: JetSeries,
    pub phi_tt: JetSeries,
}

impl Context {
    pub fn new(phase: &PhaseJet) -> Result<Self> {
        let m = phase.model().order() as u32;
        let t_trunc = m + 1;
        let phi = phase.series(t_trunc + 2);
        let phi_t = phi.dt();
        let phi_tt = phi_t.dt().with_trunc(t_trunc, 1);
        let phi_t = phi_t.with_trunc(t_trunc, 1);
        let w = WOperator::build(phase, m + 1, t_trunc)?;
        Ok(Self { t_trunc, w, phi_t, phi_tt })
    }
}

/// E_j = Σ_{n=1}^{j+1} W_n(a_{j+1−n}).
pub(crate) fn e_series(cx: &Context, amps: &AmplitudeJet, j: usize, kmax: usize) -> Result<JetSeries> {
    let mut s = JetSeries::zero(amps.phase().ctx(), (kmax + 1) as u32, 1);
    for n in 1..=(j + 1) {
        if cx.w.kernels(n as u32).is_empty() {
            continue;
        }
        let row = amps.row_checked(j + 1 - n, kmax, (kmax + 1) as u32)?;
        s = s.try_add(&cx.w.apply(n as u32, &row)?)?;
    }
    Ok(s)
}

/// Row j of E_{k,j}^{(M)}, k ≤ kmax (capped at M). Requires a_{k',j'} for k' ≤ kmax, j' ≤ j.
pub fn build_e_table(phase: &PhaseJet, partial: &AmplitudeJet, j: usize, kmax: usize) -> Result<Vec<SymExpr>> {
    let kmax = kmax.min(phase.model().order());
    let cx = Context::new(phase)?;
    let s = e_series(&cx, partial, j, kmax)?;
    Ok((0..=kmax).map(|k| s.coeff(k as u32, 0)).collect())
}

/// For each j ascending and k ascending, the t^k part of the row-j transport
/// identity determines a_{k+1,j} through the term −2i(k+1)ϱ·a_{k+1,j}.
pub fn solve_transport(phase: &PhaseJet) -> Result<AmplitudeJet> {
    let ctx = phase.ctx().clone();
    let m = phase.model().order();
    let cx = Context::new(phase)?;
    let tt = cx.t_trunc;
    let mut amps = AmplitudeJet::boundary(phase);

    // Operator acting on the unknown row: (coefficient, ∂_y^β, ∂_t order).
    let n = phase.model().d() - 1;
    let mut e1 = vec![0u32; n];
    e1[0] = 1;
    let mut ops: Vec<(JetSeries, MultiIndex, u32)> = vec![
        (cx.phi_tt.scale(&ComplexRational::new(Rat::zero(), Rat::from_int(-1))), vec![0; n], 0),
        (cx.phi_t.scale(&ComplexRational::new(Rat::zero(), Rat::from_int(-2))), vec![0; n], 1),
    ];
    let mut c_y = JetSeries::zero(&ctx, tt, 1);
    c_y.set(0, 0, SymExpr::constant(&ctx, ComplexRational::new(Rat::zero(), Rat::from_int(-1))));
    ops.push((c_y, e1, 0));
    for (beta, k) in cx.w.kernels(1) {
        ops.push((k.clone(), beta.clone(), 0));
    }

    for j in 0..=m {
        // Forcing from rows already solved.
        let mut forcing = JetSeries::zero(&ctx, tt, 1);
        for nn in 2..=(j + 1) {
            if cx.w.kernels(nn as u32).is_empty() {
                continue;
            }
            forcing = forcing.try_add(&cx.w.apply(nn as u32, &amps.row(j + 1 - nn, tt))?)?;
        }
        if j >= 1 {
            let prev = amps.row(j - 1, tt + 2);
            forcing = forcing.try_sub(&prev.dt().dt())?;
        }

        let mut dcache: HashMap<(usize, MultiIndex), SymExpr> = HashMap::new();
        for k in 0..m {
            // (coefficient, key into dcache, falling factorial from ∂_t^r)
            let mut terms: Vec<(&SymExpr, (usize, MultiIndex), i64)> = Vec::new();
            for (coef, beta, r) in &ops {
                for (&(p, _), c) in coef.iter() {
                    let p = p as usize;
                    if p > k {
                        continue;
                    }
                    let q = k - p + *r as usize;
                    if !amps.is_known(q, j) {
                        continue;
                    }
                    let key = (q, beta.clone());
                    if !dcache.contains_key(&key) {
                        let mut e = amps.a(q, j);
                        for (i, &b) in beta.iter().enumerate() {
                            for _ in 0..b {
                                e = e.diff_y(i + 1)?;
                            }
                        }
                        dcache.insert(key.clone(), e);
                    }
                    let fall: i64 = ((k - p + 1)..=q).map(|x| x as i64).product();
                    terms.push((c, key, fall));
                }
            }
            let items: Vec<(&SymExpr, &SymExpr, i64)> = terms.iter().map(|(c, key, f)| (*c, &dcache[key], *f)).collect();
            let r = SymExpr::sum_of_products(&ctx, &items).try_add(&forcing.coeff(k as u32, 0))?;
            let denom = ComplexRational::new(Rat::zero(), Rat::from_int(2 * (k as i64 + 1)));
            let next = r.mul_rho(-1).scale(&denom.recip()?);
            amps.set(k + 1, j, next);
        }
    }
    Ok(amps)
}

/// Left side of the row-j transport identity
/// −i∂_t²φ·a_j − 2i∂_tφ·∂_ta_j − i∂_{y₁}a_j − ∂_t²a_{j−1} + E_j, mod t^{M+1}.
pub fn transport_residual(amps: &AmplitudeJet, j: usize) -> Result<JetSeries> {
    let cx = Context::new(amps.phase())?;
    row_residual(&cx, amps, j)
}

/// `transport_residual` for every row j = 0..=M, sharing one operator build.
pub fn transport_residuals(amps: &AmplitudeJet) -> Result<Vec<JetSeries>> {
    let cx = Context::new(amps.phase())?;
    (0..=amps.order()).map(|j| row_residual(&cx, amps, j)).collect()
}

fn row_residual(cx: &Context, amps: &AmplitudeJet, j: usize) -> Result<JetSeries> {
    let ctx = amps.phase().ctx().clone();
    let tt = cx.t_trunc;
    let ni = ComplexRational::new(Rat::zero(), Rat::from_int(-1));
    let aj = amps.row(j, tt + 1);
    let aj_t = aj.dt();
    let c0 = cx.phi_tt.scale(&ni);
    let c1 = cx.phi_t.scale(&ni.scale(&Rat::from_int(2)));
    let rows: Vec<JetSeries> = (1..=(j + 1)).map(|n| amps.row(j + 1 - n, tt)).collect();
    let mut factors = Vec::new();
    for n in 1..=(j + 1) {
        factors.extend(cx.w.factors(n as u32, &rows[n - 1])?);
    }
    let mut pairs: Vec<(&JetSeries, &JetSeries)> = vec![(&c0, &aj), (&c1, &aj_t)];
    pairs.extend(factors.iter().map(|(k, d)| (*k, d)));
    let mut s = JetSeries::sum_of_products(&ctx, &pairs)?;
    s = s.try_add(&aj.diff_y(1)?.scale(&ni))?;
    if j >= 1 {
        s = s.try_sub(&amps.row(j - 1, tt + 2).dt().dt())?;
    }
    Ok(s)
}
