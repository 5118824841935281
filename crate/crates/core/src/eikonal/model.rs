//! Model data m ∼ Σ t^k h^j m_{k,j} and seeded random model families.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::symring::{parse_expr, ComplexRational, Ctx, JetSeries, Rat, SymExpr};

/// Multi-index over the d−1 tangential directions.
pub type MultiIndex = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    ctx: Arc<Ctx>,
    m_order: usize,
    table: BTreeMap<(usize, usize), SymExpr>,
}

impl ModelSpec {
    /// Validates m_{0,0} = 0 and that every entry is a polynomial in (y, η):
    /// after η₁ = iμ − ϱ² that means only even, nonnegative ϱ exponents.
    pub fn new(ctx: &Arc<Ctx>, m_order: usize, entries: BTreeMap<(usize, usize), SymExpr>) -> Result<Self> {
        if m_order < 2 {
            return Err(Error::InvalidModel(format!("truncation order M = {m_order} < 2")));
        }
        if ctx.mu().is_zero() {
            return Err(Error::InvalidModel("mu must be nonzero".into()));
        }
        let mut table = BTreeMap::new();
        for ((k, j), e) in entries {
            if e.ctx() != ctx {
                return Err(Error::InvalidModel(format!("m[{k},{j}] built over a different context")));
            }
            if e.monomials().any(|m| m.rho_exp < 0 || m.rho_exp % 2 != 0) {
                return Err(Error::InvalidModel(format!("m[{k},{j}] = {e} is not polynomial in eta")));
            }
            if k == 0 && j == 0 && !e.is_zero() {
                return Err(Error::InvalidModel("m[0,0] must vanish".into()));
            }
            if !e.is_zero() {
                table.insert((k, j), e);
            }
        }
        Ok(Self { ctx: ctx.clone(), m_order, table })
    }

    /// m = c·t, the Airy-type model.
    pub fn airy(d: usize, mu: Rat, c: ComplexRational, m_order: usize) -> Result<Self> {
        let ctx = Ctx::new(d, mu)?;
        let mut e = BTreeMap::new();
        e.insert((1, 0), SymExpr::constant(&ctx, c));
        Self::new(&ctx, m_order, e)
    }

    pub fn zero(d: usize, mu: Rat, m_order: usize) -> Result<Self> {
        let ctx = Ctx::new(d, mu)?;
        Self::new(&ctx, m_order, BTreeMap::new())
    }

    pub fn ctx(&self) -> &Arc<Ctx> {
        &self.ctx
    }

    pub fn d(&self) -> usize {
        self.ctx.d()
    }

    pub fn mu(&self) -> &Rat {
        self.ctx.mu()
    }

    /// Truncation order M.
    pub fn order(&self) -> usize {
        self.m_order
    }

    pub fn with_order(&self, m_order: usize) -> Result<Self> {
        Self::new(&self.ctx, m_order, self.table.clone())
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), SymExpr> {
        &self.table
    }

    pub fn m(&self, k: usize, j: usize) -> SymExpr {
        self.table.get(&(k, j)).cloned().unwrap_or_else(|| SymExpr::zero(&self.ctx))
    }

    pub fn max_j(&self) -> usize {
        self.table.keys().map(|(_, j)| *j).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.table.is_empty()
    }

    /// True when no entry depends on y.
    pub fn is_y_independent(&self) -> bool {
        self.table.values().all(|e| !e.depends_on_y())
    }

    /// Largest total η-degree over the table.
    pub fn eta_degree(&self) -> usize {
        self.table.values().filter_map(|e| e.eta_degree()).max().unwrap_or(0) as usize
    }

    /// m_j(t) = Σ_k t^k m_{k,j} as a t-series mod t^t_trunc.
    pub fn m_series(&self, j: usize, t_trunc: u32) -> JetSeries {
        let mut s = JetSeries::zero(&self.ctx, t_trunc, 1);
        for ((k, jj), e) in &self.table {
            if *jj == j {
                s.set(*k as u32, 0, e.clone());
            }
        }
        s
    }

    /// For every multi-index α with |α| ≤ M and ∂_η^α m ≠ 0, the series
    /// ∂_η^α m_j(t) for each j. Entry α = 0 comes first.
    pub fn eta_derivatives(&self, t_trunc: u32) -> Result<Vec<(MultiIndex, BTreeMap<usize, JetSeries>)>> {
        let n = self.d() - 1;
        let mut out = Vec::new();
        for alpha in multi_indices(n, self.m_order.min(self.eta_degree()) as u32) {
            let mut per_j = BTreeMap::new();
            for j in 0..=self.max_j() {
                let mut s = self.m_series(j, t_trunc);
                for (i, &a) in alpha.iter().enumerate() {
                    for _ in 0..a {
                        s = s.diff_eta(i + 1)?;
                    }
                }
                if !s.is_zero() {
                    per_j.insert(j, s);
                }
            }
            if !per_j.is_empty() {
                out.push((alpha, per_j));
            }
        }
        Ok(out)
    }

    /// Replace m_{k,0} by m_{k,0} + δ.
    pub fn perturb_m_k0(&self, k: usize, delta: &SymExpr) -> Result<Self> {
        self.perturb(k, 0, delta)
    }

    /// Replace m_{k,j} by m_{k,j} + δ.
    pub fn perturb(&self, k: usize, j: usize, delta: &SymExpr) -> Result<Self> {
        if k == 0 && j == 0 {
            return Err(Error::InvalidModel("m[0,0] must stay zero".into()));
        }
        let mut t = self.table.clone();
        let v = &self.m(k, j) + &delta.with_ctx(&self.ctx)?;
        t.insert((k, j), v);
        Self::new(&self.ctx, self.m_order, t)
    }

    /// Keep only entries with k ≤ kmax and j ≤ jmax.
    pub fn truncated(&self, kmax: usize, jmax: usize) -> Result<Self> {
        let t = self.table.iter().filter(|((k, j), _)| *k <= kmax && *j <= jmax).map(|(a, b)| (*a, b.clone())).collect();
        Self::new(&self.ctx, self.m_order, t)
    }
}

pub fn perturb_m_k0(model: &ModelSpec, k: usize, delta: &SymExpr) -> Result<ModelSpec> {
    model.perturb_m_k0(k, delta)
}

/// All multi-indices of length n with total degree ≤ max, graded then lexicographic.
pub fn multi_indices(n: usize, max: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for total in 0..=max {
        let mut cur = vec![0u32; n];
        fill(&mut out, &mut cur, 0, total);
    }
    out
}

fn fill(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for a in (0..=left).rev() {
        cur[pos] = a;
        fill(out, cur, pos + 1, left - a);
    }
    cur[pos] = 0;
}

/// A model stated as text in which μ appears through the token `mu`, so it
/// can be instantiated at any rational μ.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelTemplate {
    pub d: usize,
    pub order: usize,
    pub entries: BTreeMap<(usize, usize), String>,
}

impl ModelTemplate {
    pub fn instantiate(&self, mu: Rat) -> Result<ModelSpec> {
        let ctx = Ctx::new(self.d, mu)?;
        let mut t = BTreeMap::new();
        for (key, s) in &self.entries {
            t.insert(*key, parse_expr(&ctx, s)?);
        }
        ModelSpec::new(&ctx, self.order, t)
    }

    pub fn airy(d: usize, c: &str, order: usize) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert((1, 0), c.to_string());
        Self { d, order, entries }
    }
}

const COEFFS: [(i64, i64); 8] = [(1, 1), (-1, 1), (1, 2), (-1, 2), (3, 4), (-3, 4), (1, 4), (2, 1)];

/// Seeded random model: sparse real polynomials of degree ≤ 2 in (y, η) for
/// m_{1,0}, m_{2,0}, m_{0,1} and m_{1,1}.
pub fn random_template(seed: u64, d: usize, order: usize) -> ModelTemplate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vars: Vec<String> = (1..d).map(|i| format!("y{i}")).collect();
    vars.push("(i*mu - rho^2)".to_string());
    for i in 2..d {
        vars.push(format!("eta{i}"));
    }
    let mut entries = BTreeMap::new();
    for key in [(1usize, 0usize), (2, 0), (0, 1), (1, 1)] {
        let n_terms = rng.gen_range(1..=3);
        let mut terms = Vec::new();
        for _ in 0..n_terms {
            let (p, q) = COEFFS[rng.gen_range(0..COEFFS.len())];
            let deg = rng.gen_range(0..=2);
            let mut factors = vec![format!("({p}/{q})")];
            for _ in 0..deg {
                factors.push(vars[rng.gen_range(0..vars.len())].clone());
            }
            terms.push(factors.join("*"));
        }
        entries.insert(key, terms.join(" + "));
    }
    ModelTemplate { d, order, entries }
}
