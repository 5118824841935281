//! Per-frequency two-point problem −h²u″ + (η₁ − iμ + m(t))u = 0, u(0) = b, u(T) = 0,
//! solved by Numerov on an exponentially stretched grid.

use std::fmt;
use std::sync::Arc;

use crate::eikonal::ModelSpec;
use crate::error::{Error, Result};
use crate::quantize::TPoly;
use crate::symring::{rho_value, C64};

pub type Profile = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

const DECAY_CUT: f64 = 40.0;

#[derive(Clone)]
pub struct ModeODEProblem {
    pub eta1: f64,
    pub mu: f64,
    pub h: f64,
    pub m_profile: Profile,
    /// Right end T of the t-interval.
    pub t_max: f64,
    /// Bound on (local step)·|local wavenumber|/h.
    pub beta: f64,
}

impl fmt::Debug for ModeODEProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModeODEProblem")
            .field("eta1", &self.eta1)
            .field("mu", &self.mu)
            .field("h", &self.h)
            .field("t_max", &self.t_max)
            .field("beta", &self.beta)
            .finish()
    }
}

impl ModeODEProblem {
    pub fn new(eta1: f64, mu: f64, h: f64, m_profile: Profile) -> Self {
        Self { eta1, mu, h, m_profile, t_max: 1.0, beta: 0.04 }
    }

    pub fn free(eta1: f64, mu: f64, h: f64) -> Self {
        Self::new(eta1, mu, h, Arc::new(|_| C64::new(0.0, 0.0)))
    }

    /// m(t) = ct.
    pub fn airy(eta1: f64, mu: f64, h: f64, c: C64) -> Self {
        Self::new(eta1, mu, h, Arc::new(move |t| c * t))
    }

    /// m(t) = Σ t^k h^j m_{k,j}(η) for a y-independent model at the frequency η.
    pub fn from_model(model: &ModelSpec, eta: &[f64], h: f64) -> Result<Self> {
        if !model.is_y_independent() {
            return Err(Error::Oracle("per-mode solve needs a y-independent model".into()));
        }
        if eta.len() + 1 != model.d() {
            return Err(Error::Oracle(format!("frequency has {} components, model d = {}", eta.len(), model.d())));
        }
        let poly = model_profile(model, eta, h)?;
        Ok(Self::new(eta[0], model.mu().to_f64(), h, Arc::new(move |t| poly.eval(t))))
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    fn potential(&self, t: f64) -> C64 {
        C64::new(self.eta1, -self.mu) + (self.m_profile)(t)
    }

    fn validate(&self) -> Result<()> {
        if self.mu == 0.0 {
            return Err(Error::Oracle("mu = 0".into()));
        }
        if !(self.h > 0.0 && self.t_max > 0.0) {
            return Err(Error::Oracle(format!("need h > 0 and T > 0 (h = {}, T = {})", self.h, self.t_max)));
        }
        if !(self.beta > 0.0 && self.beta <= 0.2) {
            return Err(Error::Oracle(format!("resolution beta = {} outside (0, 0.2]", self.beta)));
        }
        let m0 = (self.m_profile)(0.0);
        if m0.norm() > 1e-12 {
            return Err(Error::Oracle(format!("m(0) = {m0} must vanish")));
        }
        Ok(())
    }
}

/// m(t) at one frequency (y = 0) as a t-polynomial with h folded in.
pub fn model_profile(model: &ModelSpec, eta: &[f64], h: f64) -> Result<TPoly> {
    let rho = rho_value(eta[0], model.mu().to_f64())?;
    let y0 = vec![0.0; model.d() - 1];
    let kmax = model.entries().keys().map(|k| k.0).max().unwrap_or(0);
    let mut c = vec![C64::new(0.0, 0.0); kmax + 1];
    for (&(k, j), e) in model.entries() {
        c[k] += e.compile().eval(rho, &y0, &eta[1..]) * h.powi(j as i32);
    }
    Ok(TPoly(c))
}

/// t = A(e^{αs} − 1) on s ∈ [0, 1] with n uniform steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StretchedGrid {
    pub a: f64,
    pub alpha: f64,
    pub n: usize,
}

impl StretchedGrid {
    pub fn sigma(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        self.a * ((self.alpha * i as f64 * self.sigma()).exp() - 1.0)
    }

    /// dt/ds at node i.
    pub fn g1(&self, i: usize) -> f64 {
        self.a * self.alpha * (self.alpha * i as f64 * self.sigma()).exp()
    }

    pub fn first_step(&self) -> f64 {
        self.t(1)
    }

    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n, ..*self }
    }

    /// Grid for wavenumber bound `kmax` (in units of 1/h) on [0, t_star] and
    /// first step at most `dt0`.
    pub fn design(t_max: f64, t_star: f64, kmax: f64, h: f64, beta: f64) -> Self {
        let kmax = kmax.max(1e-3);
        let dt0 = (h / 10.0).min(0.5 * beta * h / kmax);
        let t_star = t_star.min(t_max);
        let alpha_sigma = (beta * h / kmax - dt0) / t_star;
        let a = dt0 / alpha_sigma;
        let alpha = (1.0 + t_max / a).ln();
        let n = ((alpha / alpha_sigma).ceil() as usize).max(16);
        Self { a, alpha, n }
    }
}

fn local_rho(q: C64) -> C64 {
    let r = (-q).sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

/// (t*, k_max): where the WKB amplitude for the potential q has decayed by
/// e^{−40} (capped at T), and the largest |√(−q)| on [0, t*].
pub(crate) fn scan_potential(q: impl Fn(f64) -> C64, t_max: f64, h: f64) -> (f64, f64) {
    let samples = 400;
    let dt = t_max / samples as f64;
    let mut decay = 0.0;
    let mut kmax: f64 = 0.0;
    for i in 0..=samples {
        let t = i as f64 * dt;
        let r = local_rho(q(t));
        kmax = kmax.max(r.norm());
        decay += r.im * dt / h;
        if decay > DECAY_CUT {
            return (t.max(dt), kmax);
        }
    }
    (t_max, kmax)
}

/// Grid for a mode: resolve the local wavelength up to where the WKB
/// amplitude has decayed by e^{−40}.
pub fn design_grid(p: &ModeODEProblem) -> StretchedGrid {
    let (t_star, kmax) = scan_potential(|t| p.potential(t), p.t_max, p.h);
    StretchedGrid::design(p.t_max, t_star, kmax, p.h, p.beta)
}

#[derive(Clone, Debug)]
pub struct ModeSolution {
    pub t: Vec<f64>,
    pub u: Vec<C64>,
    /// −ih·u′(0) after Richardson extrapolation over the grid and its refinement.
    pub dn_value: C64,
    /// The same quantity on the unrefined grid.
    pub dn_coarse: C64,
    pub grid: StretchedGrid,
}

/// One-sided fourth-order derivative weights at the left end.
pub(crate) const D1: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];

fn numerov(p: &ModeODEProblem, g: &StretchedGrid, b: C64) -> Result<(Vec<C64>, C64)> {
    let n = g.n;
    let s2 = g.sigma() * g.sigma();
    let quarter = g.alpha * g.alpha / 4.0;
    let f: Vec<C64> = (0..=n)
        .map(|i| {
            let gp = g.g1(i);
            p.potential(g.t(i)) * (gp * gp / (p.h * p.h)) + quarter
        })
        .collect();
    let side = |i: usize| C64::new(1.0, 0.0) - f[i] * (s2 / 12.0);
    let diag = |i: usize| -(C64::new(1.0, 0.0) + f[i] * (5.0 * s2 / 12.0)) * 2.0;
    let w0 = b / g.g1(0).sqrt();
    // Thomas on unknowns W_1..W_{n−1}; W_n = 0.
    let m = n - 1;
    let mut cp = vec![C64::new(0.0, 0.0); m];
    let mut dp = vec![C64::new(0.0, 0.0); m];
    for k in 0..m {
        let i = k + 1;
        let a = side(i - 1);
        let c = side(i + 1);
        let mut bb = diag(i);
        let mut d = if k == 0 { -a * w0 } else { C64::new(0.0, 0.0) };
        if k > 0 {
            bb -= a * cp[k - 1];
            d -= a * dp[k - 1];
        }
        if bb.norm() < 1e-300 || !bb.re.is_finite() {
            return Err(Error::Oracle(format!("singular two-point system at t = {}", g.t(i))));
        }
        cp[k] = c / bb;
        dp[k] = d / bb;
    }
    let mut w = vec![C64::new(0.0, 0.0); n + 1];
    w[0] = w0;
    for k in (0..m).rev() {
        w[k + 1] = dp[k] - if k + 1 < m { cp[k] * w[k + 2] } else { C64::new(0.0, 0.0) };
    }
    let ws: C64 = D1.iter().zip(&w).map(|(c, x)| x * *c).sum::<C64>() / (12.0 * g.sigma());
    let gp0 = g.g1(0);
    let du = (w0 * (g.alpha / 2.0) + ws) / gp0.sqrt();
    if !(du.re.is_finite() && du.im.is_finite()) {
        return Err(Error::Oracle("two-point solve produced non-finite values".into()));
    }
    let u = w.iter().enumerate().map(|(i, x)| x * g.g1(i).sqrt()).collect();
    Ok((u, C64::new(0.0, -p.h) * du))
}

pub fn solve_mode_ode_on(p: &ModeODEProblem, grid: StretchedGrid, b: C64) -> Result<ModeSolution> {
    p.validate()?;
    if grid.first_step() > p.h / 10.0 * (1.0 + 1e-12) {
        return Err(Error::Oracle(format!("first step {} exceeds h/10", grid.first_step())));
    }
    let (u, coarse) = numerov(p, &grid, b)?;
    let (_, fine) = numerov(p, &grid.refined(), b)?;
    let t = (0..=grid.n).map(|i| grid.t(i)).collect();
    Ok(ModeSolution { t, u, dn_value: (fine * 16.0 - coarse) / 15.0, dn_coarse: coarse, grid })
}

/// Solve with u(0) = `boundary_value`; `dn_value` is −ih·u′(0).
pub fn solve_mode_ode(p: &ModeODEProblem, boundary_value: C64) -> Result<ModeSolution> {
    p.validate()?;
    solve_mode_ode_on(p, design_grid(p), boundary_value)
}

/// The DN multiplier at this mode: −ih·u′(0)/u(0).
pub fn mode_dn(p: &ModeODEProblem) -> Result<C64> {
    Ok(solve_mode_ode(p, C64::new(1.0, 0.0))?.dn_value)
}
