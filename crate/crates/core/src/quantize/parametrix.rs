//! Numeric evaluation of the parametrix ũ and of the truncated DN symbols Ñ_{s,k}.

use crate::error::{Error, Result};
use crate::symring::{rho_value, CompiledExpr, ComplexRational, Rat, SymExpr, C64};
use crate::transport::AmplitudeJet;

use super::cutoff::{bump, cutoff_jet, CutoffSpec};
use super::grid::{op_apply, GridFn, Symbol, TorusGrid};

/// Polynomial in t with complex coefficients, lowest power first.
#[derive(Clone, Debug, PartialEq)]
pub struct TPoly(pub Vec<C64>);

impl TPoly {
    /// (p, p′, p″) at t.
    pub fn jet(&self, t: f64) -> (C64, C64, C64) {
        let z = C64::new(0.0, 0.0);
        let (mut p, mut d1, mut d2) = (z, z, z);
        for c in self.0.iter().rev() {
            d2 = d2 * t + d1 * 2.0;
            d1 = d1 * t + p;
            p = p * t + c;
        }
        (p, d1, d2)
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.jet(t).0
    }
}

/// Floating-point images of the phase and amplitude jets.
#[derive(Clone, Debug)]
pub struct NumericJets {
    mu: f64,
    d: usize,
    phis: Vec<CompiledExpr>,
    amps: Vec<Vec<(i32, CompiledExpr)>>,
    model: Vec<(usize, i32, CompiledExpr)>,
    y_dependent: bool,
}

/// Jets at one phase-space point: φ(t) and a(t) = Σ_j h^j a_j(t) as t-polynomials.
#[derive(Clone, Debug)]
pub struct PointJets {
    pub rho: C64,
    pub phi: TPoly,
    pub amp: TPoly,
}

impl NumericJets {
    pub fn new(amps: &AmplitudeJet) -> Self {
        let phase = amps.phase();
        let model = phase.model();
        let m = amps.order();
        let mut by_k: Vec<Vec<(i32, CompiledExpr)>> = vec![Vec::new(); m + 1];
        let mut y_dep = phase.phis().iter().any(|p| p.depends_on_y());
        for (&(k, j), a) in amps.iter() {
            y_dep |= a.depends_on_y();
            if !a.is_zero() && k <= m {
                by_k[k].push((j as i32, a.compile()));
            }
        }
        let model_terms = model.entries().iter().map(|(&(k, j), e)| (k, j as i32, e.compile())).collect();
        Self {
            mu: model.mu().to_f64(),
            d: model.d(),
            phis: phase.phis().iter().map(|p| p.compile()).collect(),
            amps: by_k,
            model: model_terms,
            y_dependent: y_dep || !model.is_y_independent(),
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn y_dependent(&self) -> bool {
        self.y_dependent
    }

    pub fn at(&self, y: &[f64], eta: &[f64], h: f64) -> Result<PointJets> {
        let rho = rho_value(eta[0], self.mu)?;
        let tail = &eta[1..];
        let mut phi = vec![C64::new(0.0, 0.0)];
        phi.extend(self.phis.iter().map(|c| c.eval(rho, y, tail)));
        let amp = self
            .amps
            .iter()
            .map(|row| row.iter().map(|(j, c)| c.eval(rho, y, tail) * h.powi(*j)).sum())
            .collect();
        Ok(PointJets { rho, phi: TPoly(phi), amp: TPoly(amp) })
    }

    /// m(t, y, η) = Σ t^k h^j m_{k,j}(y, η) as a t-polynomial.
    pub fn model_at(&self, y: &[f64], eta: &[f64], h: f64) -> Result<TPoly> {
        let rho = rho_value(eta[0], self.mu)?;
        let kmax = self.model.iter().map(|m| m.0).max().unwrap_or(0);
        let mut c = vec![C64::new(0.0, 0.0); kmax + 1];
        for (k, j, e) in &self.model {
            c[*k] += e.eval(rho, y, &eta[1..]) * h.powi(*j);
        }
        Ok(TPoly(c))
    }
}

fn check_grid(jets: &NumericJets, grid: &TorusGrid) -> Result<()> {
    if grid.dims() + 1 != jets.d {
        return Err(Error::Quantize(format!("grid has {} axes but the model has d = {}", grid.dims(), jets.d)));
    }
    Ok(())
}

/// ũ(t,·) = Op_h(e^{iφ/h}Φ_{ε,δ}φ(η₁)a)f.
pub fn evaluate_parametrix(
    amps: &AmplitudeJet,
    spec: &CutoffSpec,
    grid: &TorusGrid,
    f: &[C64],
    t: f64,
) -> Result<GridFn> {
    let jets = NumericJets::new(amps);
    evaluate_parametrix_with(&jets, spec, grid, f, t)
}

pub fn evaluate_parametrix_with(
    jets: &NumericJets,
    spec: &CutoffSpec,
    grid: &TorusGrid,
    f: &[C64],
    t: f64,
) -> Result<GridFn> {
    check_grid(jets, grid)?;
    if jets.mu == 0.0 {
        return Err(Error::Quantize("mu = 0".into()));
    }
    let h = grid.h();
    let y0 = vec![0.0; grid.dims()];
    let sym = |y: &[f64], eta: &[f64]| -> C64 {
        let cut = bump(eta[0]);
        if cut == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let p = jets.at(y, eta, h).expect("mu checked above");
        let (phi_c, _, _) = cutoff_jet(t, eta[0], h, jets.mu, spec).expect("h, mu checked above");
        if phi_c == 0.0 {
            return C64::new(0.0, 0.0);
        }
        (C64::i() * p.phi.eval(t) / h).exp() * phi_c * cut * p.amp.eval(t)
    };
    if jets.y_dependent {
        op_apply(grid, &Symbol::full(sym).supported_in(2.0), f)
    } else {
        op_apply(grid, &Symbol::multiplier(|eta: &[f64]| sym(&y0, eta)).supported_in(2.0), f)
    }
}

/// Exact coefficients of Ñ_{s,k} in powers of h, with the cutoff φ(η₁) ≡ 1:
/// entry 0 is ϱ^{k+1}, entry j+1 is −iϱ^k a_{1,j}.
pub fn dn_symbol_exact(amps: &AmplitudeJet, s: usize, k: usize) -> Result<Vec<SymExpr>> {
    check_sk(amps, s, k)?;
    let ctx = amps.phase().ctx();
    let mut out = vec![SymExpr::rho_pow(ctx, k as i32 + 1, ComplexRational::one())];
    let mi = ComplexRational::new(Rat::zero(), Rat::from_int(-1));
    for j in 0..s {
        out.push(amps.get(1, j)?.mul_rho(k as i32).scale(&mi));
    }
    Ok(out)
}

fn check_sk(amps: &AmplitudeJet, s: usize, k: usize) -> Result<()> {
    if k > 3 * s + 2 {
        return Err(Error::Quantize(format!("k = {k} > 3s+2 = {}", 3 * s + 2)));
    }
    if s > amps.order() + 1 {
        return Err(Error::Quantize(format!("s = {s} needs amplitudes beyond M = {}", amps.order())));
    }
    Ok(())
}

/// Sampled Ñ_{s,k} = ϱ^{k+1}φ − iΣ_{j<s} h^{j+1}ϱ^k a_{1,j}φ on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DNSymbol {
    pub s: usize,
    pub k: usize,
    pub h: f64,
    y_dependent: bool,
    n: usize,
    values: Vec<C64>,
}

impl DNSymbol {
    pub fn is_multiplier(&self) -> bool {
        !self.y_dependent
    }

    /// Value at grid node `node` and frequency index `freq`.
    pub fn value(&self, node: usize, freq: usize) -> C64 {
        if self.y_dependent {
            self.values[node * self.n + freq]
        } else {
            self.values[freq]
        }
    }

    /// Per-frequency values of a multiplier symbol.
    pub fn multiplier_values(&self) -> Option<&[C64]> {
        (!self.y_dependent).then_some(&self.values[..])
    }

    /// Matrix on normalized Fourier coefficients, as `symbol_matrix` would give.
    pub fn coefficient_matrix(&self, grid: &TorusGrid) -> Result<nalgebra::DMatrix<C64>> {
        if grid.len() != self.n {
            return Err(Error::Quantize("symbol was sampled on a different grid".into()));
        }
        let mut m = nalgebra::DMatrix::from_element(self.n, self.n, C64::new(0.0, 0.0));
        if !self.y_dependent {
            for i in 0..self.n {
                m[(i, i)] = self.values[i];
            }
            return Ok(m);
        }
        for col in 0..self.n {
            let k = grid.wavevector(col);
            let v: GridFn = (0..self.n)
                .map(|node| {
                    let y = grid.node(node);
                    let ph: f64 = y.iter().zip(&k).map(|(a, b)| a * *b as f64).sum();
                    C64::from_polar(1.0, ph) * self.value(node, col)
                })
                .collect();
            for (row, x) in grid.forward(&v)?.into_iter().enumerate() {
                m[(row, col)] = x;
            }
        }
        Ok(m)
    }

    pub fn apply(&self, grid: &TorusGrid, f: &[C64]) -> Result<GridFn> {
        if self.y_dependent {
            grid.check_len(f)?;
            let fhat = grid.forward(f)?;
            let waves: Vec<Vec<i64>> = (0..self.n).map(|i| grid.wavevector(i)).collect();
            Ok((0..self.n)
                .map(|node| {
                    let y = grid.node(node);
                    let mut acc = C64::new(0.0, 0.0);
                    for (i, c) in fhat.iter().enumerate() {
                        let ph: f64 = y.iter().zip(&waves[i]).map(|(a, b)| a * *b as f64).sum();
                        acc += C64::from_polar(1.0, ph) * self.value(node, i) * c;
                    }
                    acc
                })
                .collect())
        } else {
            let g = grid.forward(f)?;
            grid.inverse(&g.iter().zip(&self.values).map(|(a, b)| a * b).collect::<Vec<_>>())
        }
    }
}

/// Numeric Ñ_{s,k} at one point.
pub fn dn_symbol_value(jets: &NumericJets, amps_1: &[(usize, CompiledExpr)], k: usize, h: f64, y: &[f64], eta: &[f64]) -> Result<C64> {
    let rho = rho_value(eta[0], jets.mu)?;
    let cut = bump(eta[0]);
    let rk = rho.powi(k as i32);
    let mut v = rk * rho;
    for (j, a) in amps_1 {
        v -= C64::i() * h.powi(*j as i32 + 1) * rk * a.eval(rho, y, &eta[1..]);
    }
    Ok(v * cut)
}

pub fn dn_symbol(amps: &AmplitudeJet, s: usize, k: usize, grid: &TorusGrid) -> Result<DNSymbol> {
    check_sk(amps, s, k)?;
    let jets = NumericJets::new(amps);
    check_grid(&jets, grid)?;
    let a1: Vec<(usize, CompiledExpr)> = (0..s).map(|j| Ok((j, amps.get(1, j)?.compile()))).collect::<Result<_>>()?;
    let y_dep = (0..s).any(|j| amps.a(1, j).depends_on_y());
    let n = grid.len();
    let h = grid.h();
    let freqs = grid.frequencies();
    let values = if y_dep {
        let mut v = Vec::with_capacity(n * n);
        for node in grid.nodes() {
            for eta in &freqs {
                v.push(dn_symbol_value(&jets, &a1, k, h, &node, eta)?);
            }
        }
        v
    } else {
        let y0 = vec![0.0; grid.dims()];
        freqs.iter().map(|eta| dn_symbol_value(&jets, &a1, k, h, &y0, eta)).collect::<Result<_>>()?
    };
    Ok(DNSymbol { s, k, h, y_dependent: y_dep, n, values })
}

/// Residual P₀ũ for a y-independent model, mode by mode. Returns
/// max_k (∫₀¹ |P₀ũ_k(t)|² dt)^{1/2} over unit plane waves, which is the norm
/// of f ↦ P₀ũ from L²(Y) to L²((0,1)×Y).
pub fn parametrix_residual_norm(amps: &AmplitudeJet, spec: &CutoffSpec, grid: &TorusGrid) -> Result<f64> {
    let jets = NumericJets::new(amps);
    check_grid(&jets, grid)?;
    if jets.y_dependent {
        return Err(Error::Quantize("residual norm is implemented for y-independent models".into()));
    }
    let h = grid.h();
    let mu = jets.mu;
    let y0 = vec![0.0; grid.dims()];
    let mut best: f64 = 0.0;
    for eta in grid.frequencies() {
        let cut = bump(eta[0]);
        if cut == 0.0 {
            continue;
        }
        let p = jets.at(&y0, &eta, h)?;
        let m = jets.model_at(&y0, &eta, h)?;
        let rho2 = p.rho * p.rho;
        let tsup = spec.t_support(eta[0], h, mu).min(1.0);
        let decay = (p.rho.im / h).max(1.0);
        let n = ((tsup * decay * 40.0) as usize + 400).min(40_000) & !1;
        let dt = tsup / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let t = i as f64 * dt;
            let (ph, ph1, ph2) = p.phi.jet(t);
            let (a, a1, a2) = p.amp.jet(t);
            let (c, c1, c2) = cutoff_jet(t, eta[0], h, mu, spec)?;
            let f = a * c;
            let f1 = a1 * c + a * c1;
            let f2 = a2 * c + 2.0 * a1 * c1 + a * c2;
            let ih = C64::new(0.0, h);
            let bracket = (ph1 * ph1 - ih * ph2 - rho2 + m.eval(t)) * f - 2.0 * ih * ph1 * f1 - h * h * f2;
            let r = ((C64::i() * ph / h).exp() * bracket * cut).norm_sqr();
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * r;
        }
        best = best.max((acc * dt / 3.0).sqrt());
    }
    Ok(best)
}
