//! Periodic grid on [0, 2π)^{d−1} and the quantization Op_h on it.
//!
//! Fourier coefficients are normalized, f̂(k) = N⁻¹ Σ_y f(y)e^{−i⟨y,k⟩}, so that
//! (Op_h σ)f(y) = Σ_k e^{i⟨y,k⟩}σ(y, hk)f̂(k) is the identity for σ ≡ 1.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::{Arc, OnceLock};

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::symring::C64;

pub type GridFn = Vec<C64>;

/// Half-width of the η-window that every grid must cover.
pub const WINDOW: f64 = 4.0;

#[derive(Clone)]
pub struct TorusGrid {
    dims: usize,
    n_modes: usize,
    h: f64,
    plans: Arc<OnceLock<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid").field("dims", &self.dims).field("n_modes", &self.n_modes).field("h", &self.h).finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, o: &Self) -> bool {
        self.dims == o.dims && self.n_modes == o.n_modes && self.h == o.h
    }
}

impl TorusGrid {
    pub fn new(dims: usize, n_modes: usize, h: f64) -> Result<Self> {
        if dims == 0 || dims > 2 {
            return Err(Error::Quantize(format!("grids have 1 or 2 axes, got {dims}")));
        }
        if n_modes < 4 || !n_modes.is_power_of_two() {
            return Err(Error::Quantize(format!("n_modes = {n_modes} is not a power of two >= 4")));
        }
        if !(h > 0.0) {
            return Err(Error::Quantize(format!("h = {h} must be positive")));
        }
        if h * ((n_modes / 2) as f64) < WINDOW {
            return Err(Error::Quantize(format!(
                "frequency window h*n/2 = {} does not cover |eta| <= {WINDOW}",
                h * (n_modes / 2) as f64
            )));
        }
        Ok(Self { dims, n_modes, h, plans: Arc::new(OnceLock::new()) })
    }

    /// Smallest power of two ≥ `min_modes` whose window covers |η| ≤ 4.
    pub fn covering(dims: usize, min_modes: usize, h: f64) -> Result<Self> {
        let need = (2.0 * WINDOW / h).ceil() as usize;
        Self::new(dims, need.max(min_modes).max(4).next_power_of_two(), h)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n_modes.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest |η| component represented on the grid.
    pub fn eta_max(&self) -> f64 {
        self.h * (self.n_modes / 2) as f64
    }

    fn wave(&self, i: usize) -> i64 {
        let n = self.n_modes as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    fn split(&self, idx: usize) -> [usize; 2] {
        if self.dims == 1 {
            [idx, 0]
        } else {
            [idx / self.n_modes, idx % self.n_modes]
        }
    }

    /// Integer wave vector at flat index `idx` (FFT ordering).
    pub fn wavevector(&self, idx: usize) -> Vec<i64> {
        let s = self.split(idx);
        (0..self.dims).map(|a| self.wave(s[a])).collect()
    }

    /// Flat index of the wave vector `k`, if it is on the grid.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        let n = self.n_modes as i64;
        let mut idx = 0usize;
        for &c in k {
            if c < -n / 2 || c >= n / 2 {
                return None;
            }
            idx = idx * self.n_modes + c.rem_euclid(n) as usize;
        }
        Some(idx)
    }

    /// η = hk at flat index `idx`.
    pub fn frequency(&self, idx: usize) -> Vec<f64> {
        self.wavevector(idx).into_iter().map(|k| self.h * k as f64).collect()
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        let s = self.split(idx);
        (0..self.dims).map(|a| 2.0 * PI * s[a] as f64 / self.n_modes as f64).collect()
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.frequency(i)).collect()
    }

    fn plans(&self) -> &(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        self.plans.get_or_init(|| {
            let mut p = FftPlanner::new();
            (p.plan_fft_forward(self.n_modes), p.plan_fft_inverse(self.n_modes))
        })
    }

    fn transform(&self, data: &mut [C64], forward: bool) {
        let plan = if forward { &self.plans().0 } else { &self.plans().1 };
        let n = self.n_modes;
        if self.dims == 1 {
            plan.process(data);
            return;
        }
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        let mut col = vec![C64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                col[r] = data[r * n + c];
            }
            plan.process(&mut col);
            for r in 0..n {
                data[r * n + c] = col[r];
            }
        }
    }

    /// Normalized Fourier coefficients f̂.
    pub fn forward(&self, f: &[C64]) -> Result<GridFn> {
        self.check_len(f)?;
        let mut v = f.to_vec();
        self.transform(&mut v, true);
        let s = 1.0 / self.len() as f64;
        v.iter_mut().for_each(|x| *x *= s);
        Ok(v)
    }

    /// Grid values from coefficients: f(y) = Σ_k e^{i⟨y,k⟩} f̂(k).
    pub fn inverse(&self, fhat: &[C64]) -> Result<GridFn> {
        self.check_len(fhat)?;
        let mut v = fhat.to_vec();
        self.transform(&mut v, false);
        Ok(v)
    }

    pub(crate) fn check_len(&self, f: &[C64]) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::Quantize(format!("grid function has {} values, grid has {}", f.len(), self.len())));
        }
        Ok(())
    }

    /// Discrete L² norm with the (2π)^{d−1}/N quadrature weight.
    pub fn l2_norm(&self, f: &[C64]) -> f64 {
        let w = (2.0 * PI).powi(self.dims as i32) / self.len() as f64;
        (f.iter().map(|z| z.norm_sqr()).sum::<f64>() * w).sqrt()
    }

    /// Plane wave e^{i⟨y,k⟩} sampled on the nodes.
    pub fn plane_wave(&self, k: &[i64]) -> GridFn {
        (0..self.len())
            .map(|i| {
                let y = self.node(i);
                let phase: f64 = y.iter().zip(k).map(|(a, b)| a * *b as f64).sum();
                C64::from_polar(1.0, phase)
            })
            .collect()
    }

    /// Debug dump: a text header line then row-major (re, im) little-endian f64 pairs.
    pub fn write_dump(&self, f: &[C64], w: &mut impl Write) -> Result<()> {
        self.check_len(f)?;
        writeln!(w, "torusgrid dims={} n_modes={} h={:e}", self.dims, self.n_modes, self.h)?;
        for z in f {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump(r: &mut impl BufRead) -> Result<(TorusGrid, GridFn)> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let bad = || Error::Quantize(format!("bad dump header: {}", header.trim()));
        let mut dims = None;
        let mut n = None;
        let mut h = None;
        let mut words = header.split_whitespace();
        if words.next() != Some("torusgrid") {
            return Err(bad());
        }
        for w in words {
            let (k, v) = w.split_once('=').ok_or_else(bad)?;
            match k {
                "dims" => dims = v.parse().ok(),
                "n_modes" => n = v.parse().ok(),
                "h" => h = v.parse().ok(),
                _ => return Err(bad()),
            }
        }
        let grid = TorusGrid::new(dims.ok_or_else(bad)?, n.ok_or_else(bad)?, h.ok_or_else(bad)?)?;
        let mut buf = vec![0u8; 16 * grid.len()];
        r.read_exact(&mut buf)?;
        let f = buf
            .chunks_exact(16)
            .map(|c| {
                C64::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap()))
            })
            .collect();
        Ok((grid, f))
    }
}

type EtaFn<'a> = Box<dyn Fn(&[f64]) -> C64 + Sync + 'a>;
type FullFn<'a> = Box<dyn Fn(&[f64], &[f64]) -> C64 + Sync + 'a>;

enum Kind<'a> {
    Eta(EtaFn<'a>),
    Full(FullFn<'a>),
}

/// A symbol σ(y, η) for `op_apply`. Symbols without y-dependence are applied
/// as exact Fourier multipliers.
pub struct Symbol<'a> {
    kind: Kind<'a>,
    eta1_support: Option<f64>,
}

impl<'a> Symbol<'a> {
    pub fn multiplier(f: impl Fn(&[f64]) -> C64 + Sync + 'a) -> Self {
        Self { kind: Kind::Eta(Box::new(f)), eta1_support: None }
    }

    pub fn full(f: impl Fn(&[f64], &[f64]) -> C64 + Sync + 'a) -> Self {
        Self { kind: Kind::Full(Box::new(f)), eta1_support: None }
    }

    /// Declare σ = 0 for |η₁| > r; `op_apply` refuses grids whose window is narrower.
    pub fn supported_in(mut self, r: f64) -> Self {
        self.eta1_support = Some(r);
        self
    }

    pub fn is_multiplier(&self) -> bool {
        matches!(self.kind, Kind::Eta(_))
    }

    pub fn eval(&self, y: &[f64], eta: &[f64]) -> C64 {
        match &self.kind {
            Kind::Eta(f) => f(eta),
            Kind::Full(f) => f(y, eta),
        }
    }

    fn guard(&self, grid: &TorusGrid) -> Result<()> {
        if let Some(r) = self.eta1_support {
            if r > grid.eta_max() {
                return Err(Error::Quantize(format!(
                    "symbol support |eta1| <= {r} exceeds the frequency window {}",
                    grid.eta_max()
                )));
            }
        }
        Ok(())
    }
}

/// (Op_h σ)f(y) = Σ_k e^{i⟨y,k⟩}σ(y, hk)f̂(k).
pub fn op_apply(grid: &TorusGrid, symbol: &Symbol<'_>, f: &[C64]) -> Result<GridFn> {
    symbol.guard(grid)?;
    let fhat = grid.forward(f)?;
    match &symbol.kind {
        Kind::Eta(s) => {
            let g: GridFn = fhat.iter().enumerate().map(|(i, c)| c * s(&grid.frequency(i))).collect();
            grid.inverse(&g)
        }
        Kind::Full(s) => {
            let waves: Vec<Vec<i64>> = (0..grid.len()).map(|i| grid.wavevector(i)).collect();
            let etas = grid.frequencies();
            let out = (0..grid.len())
                .map(|n| {
                    let y = grid.node(n);
                    let mut acc = C64::new(0.0, 0.0);
                    for (i, c) in fhat.iter().enumerate() {
                        if *c == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let ph: f64 = y.iter().zip(&waves[i]).map(|(a, b)| a * *b as f64).sum();
                        acc += C64::from_polar(1.0, ph) * s(&y, &etas[i]) * c;
                    }
                    acc
                })
                .collect();
            Ok(out)
        }
    }
}

/// Adjoint of `op_apply` for the discrete inner product Σ_y f(y)ḡ(y).
pub fn op_apply_adjoint(grid: &TorusGrid, symbol: &Symbol<'_>, g: &[C64]) -> Result<GridFn> {
    symbol.guard(grid)?;
    grid.check_len(g)?;
    match &symbol.kind {
        Kind::Eta(s) => {
            let ghat = grid.forward(g)?;
            let h: GridFn = ghat.iter().enumerate().map(|(i, c)| c * s(&grid.frequency(i)).conj()).collect();
            grid.inverse(&h)
        }
        Kind::Full(s) => {
            let nodes = grid.nodes();
            let n = grid.len() as f64;
            let c: GridFn = (0..grid.len())
                .map(|i| {
                    let k = grid.wavevector(i);
                    let eta = grid.frequency(i);
                    let mut acc = C64::new(0.0, 0.0);
                    for (y, gv) in nodes.iter().zip(g) {
                        let ph: f64 = y.iter().zip(&k).map(|(a, b)| a * *b as f64).sum();
                        acc += C64::from_polar(1.0, -ph) * s(y, &eta).conj() * gv;
                    }
                    acc / n
                })
                .collect();
            grid.inverse(&c)
        }
    }
}

/// Matrix of Op_h σ acting on normalized Fourier coefficients:
/// column k holds the coefficients of Op_h σ e^{i⟨y,k⟩}.
pub fn symbol_matrix(grid: &TorusGrid, symbol: &Symbol<'_>) -> Result<nalgebra::DMatrix<C64>> {
    symbol.guard(grid)?;
    let n = grid.len();
    let mut m = nalgebra::DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    match &symbol.kind {
        Kind::Eta(s) => {
            for i in 0..n {
                m[(i, i)] = s(&grid.frequency(i));
            }
        }
        Kind::Full(s) => {
            let nodes = grid.nodes();
            for col in 0..n {
                let k = grid.wavevector(col);
                let eta = grid.frequency(col);
                let v: GridFn = nodes
                    .iter()
                    .map(|y| {
                        let ph: f64 = y.iter().zip(&k).map(|(a, b)| a * *b as f64).sum();
                        C64::from_polar(1.0, ph) * s(y, &eta)
                    })
                    .collect();
                let c = grid.forward(&v)?;
                for (row, x) in c.into_iter().enumerate() {
                    m[(row, col)] = x;
                }
            }
        }
    }
    Ok(m)
}

/// Numeric check of the finite composition expansion on a 1-axis grid, for
/// a = a(η) and b = e^{i l y}: Op(a)Op(b)f against Op(Σ_{n≤M} hⁿ/n!·∂ⁿa·lⁿ·b)f.
/// `a_derivs(n, η)` returns ∂_ηⁿa. `f` should be band-limited so the shift by
/// l modes does not wrap around. Returns the relative L² defect on `f`.
pub fn composition_defect(
    grid: &TorusGrid,
    a_derivs: &(dyn Fn(usize, f64) -> C64 + Sync),
    l: i64,
    order: usize,
    f: &[C64],
) -> Result<f64> {
    if grid.dims() != 1 {
        return Err(Error::Quantize("composition check runs on one axis".into()));
    }
    let h = grid.h();
    let a = Symbol::multiplier(|eta: &[f64]| a_derivs(0, eta[0]));
    let b = Symbol::full(|y: &[f64], _: &[f64]| C64::from_polar(1.0, l as f64 * y[0]));
    let lhs = op_apply(grid, &a, &op_apply(grid, &b, f)?)?;
    let c = Symbol::full(|y: &[f64], eta: &[f64]| {
        let mut acc = C64::new(0.0, 0.0);
        let mut w = 1.0;
        for n in 0..=order {
            acc += a_derivs(n, eta[0]) * w;
            w *= h * l as f64 / (n + 1) as f64;
        }
        acc * C64::from_polar(1.0, l as f64 * y[0])
    });
    let rhs = op_apply(grid, &c, f)?;
    let diff: GridFn = lhs.iter().zip(&rhs).map(|(x, y)| x - y).collect();
    Ok(grid.l2_norm(&diff) / grid.l2_norm(&lhs).max(f64::MIN_POSITIVE))
}
