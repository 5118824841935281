//! The bump φ and the normal cutoff Φ_{ε,δ}(t, η₁) = φ(t/h^ε)φ(t/(δ|ϱ|²)).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn g(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// φ(σ) = g(2−|σ|)/(g(2−|σ|) + g(|σ|−1)), g(x) = e^{−1/x} for x > 0.
pub fn bump(sigma: f64) -> f64 {
    let s = sigma.abs();
    if s <= 1.0 {
        return 1.0;
    }
    if s >= 2.0 {
        return 0.0;
    }
    let a = g(2.0 - s);
    a / (a + g(s - 1.0))
}

/// (φ, φ′, φ″) at σ. Inside (1, 2) the bump is the logistic 1/(1 + e^w)
/// with w = 1/(2−s) − 1/(s−1), which keeps the derivatives finite.
pub fn bump_jet(sigma: f64) -> (f64, f64, f64) {
    let s = sigma.abs();
    if s <= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    if s >= 2.0 {
        return (0.0, 0.0, 0.0);
    }
    let v = bump(sigma);
    let (a, b) = (2.0 - s, s - 1.0);
    let w1 = 1.0 / (a * a) + 1.0 / (b * b);
    let w2 = 2.0 / (a * a * a) - 2.0 / (b * b * b);
    let q = v * (1.0 - v);
    let d1 = -q * w1;
    let d2 = q * (1.0 - 2.0 * v) * w1 * w1 - q * w2;
    (v, sigma.signum() * d1, d2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub eps: f64,
    pub delta: f64,
}

impl CutoffSpec {
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 2.0 / 3.0) {
            return Err(Error::Quantize(format!("eps = {eps} is outside (0, 2/3)")));
        }
        if !(delta > 0.0) {
            return Err(Error::Quantize(format!("delta = {delta} must be positive")));
        }
        Ok(Self { eps, delta })
    }

    /// Right end of supp Φ in t: 2·min{h^ε, δ|ϱ|²}.
    pub fn t_support(&self, eta1: f64, h: f64, mu: f64) -> f64 {
        2.0 * h.powf(self.eps).min(self.delta * eta1.hypot(mu))
    }
}

fn check(h: f64, mu: f64) -> Result<()> {
    if !(h > 0.0) || mu == 0.0 {
        return Err(Error::Quantize(format!("cutoff needs h > 0 and mu != 0 (h = {h}, mu = {mu})")));
    }
    Ok(())
}

#[allow(non_snake_case)]
pub fn cutoff_Phi(t: f64, eta1: f64, h: f64, mu: f64, spec: &CutoffSpec) -> Result<f64> {
    check(h, mu)?;
    let r2 = eta1.hypot(mu);
    Ok(bump(t / h.powf(spec.eps)) * bump(t / (r2 * spec.delta)))
}

/// (Φ, ∂_tΦ, ∂_t²Φ).
pub fn cutoff_jet(t: f64, eta1: f64, h: f64, mu: f64, spec: &CutoffSpec) -> Result<(f64, f64, f64)> {
    check(h, mu)?;
    let l1 = h.powf(spec.eps);
    let l2 = eta1.hypot(mu) * spec.delta;
    let (a, a1, a2) = bump_jet(t / l1);
    let (b, b1, b2) = bump_jet(t / l2);
    let (a1, a2) = (a1 / l1, a2 / (l1 * l1));
    let (b1, b2) = (b1 / l2, b2 / (l2 * l2));
    Ok((a * b, a1 * b + a * b1, a2 * b + 2.0 * a1 * b1 + a * b2))
}
