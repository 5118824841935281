//! The full model problem with y-dependent m: spectral in y, block Numerov in t.

use nalgebra::DMatrix;

use super::mode_ode::{scan_potential, StretchedGrid, D1};
use crate::eikonal::ModelSpec;
use crate::error::{Error, Result};
use crate::quantize::{symbol_matrix, GridFn, Symbol, TorusGrid};
use crate::symring::{rho_value, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct BvpOptions {
    pub t_max: f64,
    pub beta: f64,
    /// Lower bound on the number of t-steps.
    pub min_points: usize,
}

impl Default for BvpOptions {
    fn default() -> Self {
        Self { t_max: 1.0, beta: 0.04, min_points: 0 }
    }
}

/// DN operator on normalized Fourier coefficients.
#[derive(Clone, Debug)]
pub struct DnMatrix {
    pub matrix: DMatrix<C64>,
    pub coarse: DMatrix<C64>,
    pub grid: StretchedGrid,
}

/// Numeric model data for the block solver: μ and the pieces of
/// m(t, y, η) = Σ t^p σ_p(y, η), with h already folded into each σ_p.
pub struct BlockModel {
    pub d: usize,
    pub mu: f64,
    pub terms: Vec<(usize, Symbol<'static>)>,
}

impl BlockModel {
    /// The exact model at the given h.
    pub fn from_model(model: &ModelSpec, h: f64) -> Self {
        let mu = model.mu().to_f64();
        let terms = model
            .entries()
            .iter()
            .map(|(&(k, j), e)| {
                let c = e.compile();
                let hj = h.powi(j as i32);
                let sym = Symbol::full(move |y: &[f64], eta: &[f64]| {
                    rho_value(eta[0], mu).map(|r| c.eval(r, y, &eta[1..]) * hj).unwrap_or(C64::new(f64::NAN, 0.0))
                });
                (k, sym)
            })
            .collect();
        Self { d: model.d(), mu, terms }
    }

    /// m = t·(c₀ + c₁cos y₁) in d = 2.
    pub fn airy_cosine(mu: f64, c0: C64, c1: C64) -> Self {
        let sym = Symbol::full(move |y: &[f64], _: &[f64]| c0 + c1 * y[0].cos());
        Self { d: 2, mu, terms: vec![(1, sym)] }
    }
}

/// Coefficient matrices of t ↦ Op_h(m(t)) in powers of t.
fn m_matrices(model: &BlockModel, grid: &TorusGrid) -> Result<Vec<DMatrix<C64>>> {
    let n = grid.len();
    let kmax = model.terms.iter().map(|t| t.0).max().unwrap_or(0);
    let mut out = vec![DMatrix::from_element(n, n, C64::new(0.0, 0.0)); kmax + 1];
    for (k, sym) in &model.terms {
        out[*k] += symbol_matrix(grid, sym)?;
    }
    Ok(out)
}

struct Block {
    base: DMatrix<C64>,
    terms: Vec<DMatrix<C64>>,
}

impl Block {
    /// η₁ − iμ + Op(m(t)) on coefficients.
    fn at(&self, t: f64) -> DMatrix<C64> {
        let mut out = self.base.clone();
        let mut tk = 1.0;
        for m in &self.terms {
            out += m * C64::new(tk, 0.0);
            tk *= t;
        }
        out
    }
}

fn block_numerov(blk: &Block, g: &StretchedGrid, h: f64, w0: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = g.n;
    let dim = w0.nrows();
    let id = DMatrix::<C64>::identity(dim, dim);
    let s2 = g.sigma() * g.sigma();
    let quarter = g.alpha * g.alpha / 4.0;
    let f = |i: usize| -> DMatrix<C64> {
        let gp = g.g1(i);
        blk.at(g.t(i)) * C64::new(gp * gp / (h * h), 0.0) + &id * C64::new(quarter, 0.0)
    };
    let side = |fi: &DMatrix<C64>| &id - fi * C64::new(s2 / 12.0, 0.0);
    let diag = |fi: &DMatrix<C64>| (&id + fi * C64::new(5.0 * s2 / 12.0, 0.0)) * C64::new(-2.0, 0.0);
    let scale0 = 1.0 / g.g1(0).sqrt();
    let w0 = w0 * C64::new(scale0, 0.0);
    let m = n - 1;
    let mut cp: Vec<DMatrix<C64>> = Vec::with_capacity(m);
    let mut dp: Vec<DMatrix<C64>> = Vec::with_capacity(m);
    let mut f_prev = f(0);
    let mut f_cur = f(1);
    for k in 0..m {
        let i = k + 1;
        let f_next = f(i + 1);
        let a = side(&f_prev);
        let c = side(&f_next);
        let mut bb = diag(&f_cur);
        let mut d = if k == 0 { -(&a * &w0) } else { DMatrix::zeros(dim, w0.ncols()) };
        if k > 0 {
            bb -= &a * &cp[k - 1];
            d -= &a * &dp[k - 1];
        }
        let lu = bb.lu();
        let cpk = lu
            .solve(&c)
            .ok_or_else(|| Error::Oracle(format!("singular block system at t = {}", g.t(i))))?;
        let dpk = lu.solve(&d).expect("same factorization");
        cp.push(cpk);
        dp.push(dpk);
        f_prev = f_cur;
        f_cur = f_next;
    }
    // Back substitution keeping only W_1..W_4.
    let mut w_next = DMatrix::zeros(dim, w0.ncols());
    let mut first: Vec<DMatrix<C64>> = vec![DMatrix::zeros(dim, w0.ncols()); 5];
    first[0] = w0.clone();
    for k in (0..m).rev() {
        let w = &dp[k] - &cp[k] * &w_next;
        if k < 4 {
            first[k + 1] = w.clone();
        }
        w_next = w;
    }
    let mut ws = DMatrix::zeros(dim, w0.ncols());
    for (c, w) in D1.iter().zip(&first) {
        ws += w * C64::new(*c, 0.0);
    }
    ws /= C64::new(12.0 * g.sigma(), 0.0);
    let du = (&w0 * C64::new(g.alpha / 2.0, 0.0) + ws) / C64::new(g.g1(0).sqrt(), 0.0);
    if du.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Oracle("block solve produced non-finite values".into()));
    }
    Ok(du * C64::new(0.0, -h))
}

fn setup(model: &BlockModel, grid: &TorusGrid, opts: &BvpOptions) -> Result<(Block, StretchedGrid)> {
    if grid.dims() + 1 != model.d {
        return Err(Error::Oracle(format!("grid has {} axes, model d = {}", grid.dims(), model.d)));
    }
    let mu = model.mu;
    if mu == 0.0 {
        return Err(Error::Oracle("mu = 0".into()));
    }
    if !(opts.beta > 0.0 && opts.beta <= 0.2) || !(opts.t_max > 0.0) {
        return Err(Error::Oracle(format!("bad options {opts:?}")));
    }
    let n = grid.len();
    let terms = m_matrices(model, grid)?;
    if terms.first().map_or(false, |m0| m0.iter().any(|z| z.norm() > 1e-12)) {
        return Err(Error::Oracle("m(0) must vanish".into()));
    }
    let base = DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(grid.frequency(i)[0], -mu) } else { C64::new(0.0, 0.0) });
    let blk = Block { base, terms };
    let h = grid.h();
    let mut t_star: f64 = 0.0;
    let mut kmax: f64 = 0.0;
    for i in 0..n {
        let diag = |t: f64| {
            let mut acc = blk.base[(i, i)];
            let mut tk = 1.0;
            for m in &blk.terms {
                acc += m[(i, i)] * tk;
                tk *= t;
            }
            acc
        };
        let off: f64 = blk
            .terms
            .iter()
            .enumerate()
            .map(|(k, m)| opts.t_max.powi(k as i32) * (0..n).filter(|&j| j != i).map(|j| m[(i, j)].norm()).sum::<f64>())
            .sum();
        let (ts, km) = scan_potential(diag, opts.t_max, h);
        t_star = t_star.max(ts);
        kmax = kmax.max((km * km + off).sqrt());
    }
    let mut g = StretchedGrid::design(opts.t_max, t_star, kmax, h, opts.beta);
    if g.n < opts.min_points {
        g.n = opts.min_points;
    }
    Ok((blk, g))
}

/// DN matrix: column k holds the coefficients of N e^{i⟨y,k⟩}.
pub fn dn_matrix_2d(model: &ModelSpec, grid: &TorusGrid, opts: &BvpOptions) -> Result<DnMatrix> {
    dn_matrix_block(&BlockModel::from_model(model, grid.h()), grid, opts)
}

pub fn dn_matrix_block(model: &BlockModel, grid: &TorusGrid, opts: &BvpOptions) -> Result<DnMatrix> {
    let (blk, g) = setup(model, grid, opts)?;
    let id = DMatrix::<C64>::identity(grid.len(), grid.len());
    let coarse = block_numerov(&blk, &g, grid.h(), &id)?;
    let fine = block_numerov(&blk, &g.refined(), grid.h(), &id)?;
    let matrix = (fine * C64::new(16.0, 0.0) - &coarse) / C64::new(15.0, 0.0);
    Ok(DnMatrix { matrix, coarse, grid: g })
}

/// 𝒟_t u|_{t=0} for the solution with u(0) = f, on grid values.
pub fn solve_bvp_2d(model: &ModelSpec, f: &[C64], grid: &TorusGrid, t_points: usize) -> Result<GridFn> {
    solve_bvp_block(&BlockModel::from_model(model, grid.h()), f, grid, t_points)
}

pub fn solve_bvp_block(model: &BlockModel, f: &[C64], grid: &TorusGrid, t_points: usize) -> Result<GridFn> {
    let opts = BvpOptions { min_points: t_points, ..BvpOptions::default() };
    let (blk, g) = setup(model, grid, &opts)?;
    let fhat = DMatrix::from_column_slice(grid.len(), 1, &grid.forward(f)?);
    let coarse = block_numerov(&blk, &g, grid.h(), &fhat)?;
    let fine = block_numerov(&blk, &g.refined(), grid.h(), &fhat)?;
    let out: Vec<C64> = fine.iter().zip(coarse.iter()).map(|(a, b)| (a * 16.0 - b) / 15.0).collect();
    grid.inverse(&out)
}
