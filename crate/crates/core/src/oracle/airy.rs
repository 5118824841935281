//! Ai′/Ai for complex arguments and the closed-form DN value of the model m = ct.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::symring::{rho_value, C64};

const SERIES_R: f64 = 3.0;
const ASYMP_R: f64 = 9.0;

/// Ai(0), Ai′(0).
const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = -0.258_819_403_792_806_8;

/// (Ai(z), Ai′(z)) from the Maclaurin series; accurate for |z| ≲ 3.
pub fn airy_series(z: C64) -> (C64, C64) {
    // Ai = c1·f − c2·g with f = Σ 3^k (1/3)_k z^{3k}/(3k)!, g = Σ 3^k (2/3)_k z^{3k+1}/(3k+1)!.
    if z.norm() < 1e-150 {
        return (C64::new(AI0, 0.0), C64::new(AIP0, 0.0));
    }
    let z3 = z * z * z;
    let (mut f, mut g) = (C64::new(1.0, 0.0), z);
    let (mut fp, mut gp) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let (mut tf, mut tg) = (C64::new(1.0, 0.0), z);
    // derivative terms: f′ = Σ t_f,k·3k/z, g′ = Σ t_g,k·(3k+1)/z
    for k in 1..200 {
        let kf = k as f64;
        tf = tf * z3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg = tg * z3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        f += tf;
        g += tg;
        fp += tf * (3.0 * kf) / z;
        gp += tg * (3.0 * kf + 1.0) / z;
        if tf.norm() + tg.norm() < 1e-18 * (f.norm() + g.norm()) {
            break;
        }
    }
    (f * AI0 + g * AIP0, fp * AI0 + gp * AIP0)
}

/// ln Ai(w), ln Ai′(w) from the large-|w| expansion, |arg w| ≤ 2π/3.
fn airy_asymptotic_log(w: C64) -> (C64, C64) {
    let zeta = w.powf(1.5) * (2.0 / 3.0);
    let inv = -1.0 / zeta;
    let (mut su, mut sv) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    let mut u = 1.0f64;
    let mut p = C64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..120 {
        let kf = k as f64;
        u *= (3.0 * kf - 0.5) * (3.0 * kf - 1.5) * (3.0 * kf - 2.5) / (54.0 * kf * (kf - 0.5));
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        p *= inv;
        let size = (u * p.norm()).abs();
        if size > last || size < 1e-17 {
            break;
        }
        last = size;
        su += p * u;
        sv += p * v;
    }
    let l = -zeta - (2.0 * PI.sqrt()).ln();
    let q = w.powf(0.25).ln();
    (l - q + su.ln(), l + q + sv.ln() + C64::new(0.0, PI))
}

/// Combine two terms given as logarithms: ln(e^a + e^b).
fn log_add(a: C64, b: C64) -> C64 {
    let (hi, lo) = if a.re >= b.re { (a, b) } else { (b, a) };
    hi + (C64::new(1.0, 0.0) + (lo - hi).exp()).ln()
}

fn large(z: C64) -> (C64, C64) {
    if z.arg().abs() <= 2.0 * PI / 3.0 {
        return airy_asymptotic_log(z);
    }
    // Ai(z) = −ωAi(ωz) − ω²Ai(ω²z),  Ai′(z) = −ω²Ai′(ωz) − ωAi′(ω²z),  ω = e^{2πi/3}.
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let (a1, d1) = airy_asymptotic_log(w * z);
    let (a2, d2) = airy_asymptotic_log(w * w * z);
    let lw = C64::new(0.0, 2.0 * PI / 3.0);
    let ipi = C64::new(0.0, PI);
    (log_add(ipi + lw + a1, ipi + 2.0 * lw + a2), log_add(ipi + 2.0 * lw + d1, ipi + lw + d2))
}

/// Integrate w″ = zw along the straight path from `from` to `to` with Taylor steps.
fn taylor_path(from: C64, to: C64, mut w: C64, mut dw: C64) -> (C64, C64) {
    let n = ((to - from).norm() / 0.25).ceil().max(1.0) as usize;
    let step = (to - from) / n as f64;
    let mut p = from;
    for _ in 0..n {
        // a_{n+2} = (p·a_n + a_{n−1})/((n+1)(n+2))
        let (mut a_prev, mut a0, mut a1) = (C64::new(0.0, 0.0), w, dw);
        let (mut val, mut der) = (a0 + a1 * step, a1);
        let mut tp = step;
        let mut i = 0usize;
        loop {
            let a2 = (p * a0 + a_prev) / (((i + 1) * (i + 2)) as f64);
            let tnext = tp * step;
            val += a2 * tnext;
            der += a2 * ((i + 2) as f64) * tp;
            tp = tnext;
            a_prev = a0;
            a0 = a1;
            a1 = a2;
            i += 1;
            if i > 80 || (i > 6 && (a2 * tnext).norm() < 1e-18 * val.norm() && (a0 * tp).norm() < 1e-18 * val.norm()) {
                break;
            }
        }
        w = val;
        dw = der;
        p += step;
    }
    (w, dw)
}

/// Ai′(z)/Ai(z).
pub fn airy_log_derivative(z: C64) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Oracle(format!("non-finite Airy argument {z}")));
    }
    if z.im < 0.0 {
        return airy_log_derivative(z.conj()).map(|r| r.conj());
    }
    let r = z.norm();
    let out = if r <= SERIES_R {
        let (a, d) = airy_series(z);
        d / a
    } else if r >= ASYMP_R {
        let (la, ld) = large(z);
        (ld - la).exp()
    } else if z.arg().abs() <= PI / 3.0 {
        // Ai grows toward the origin here: integrate inward from |z| = 9.
        let start = z * (ASYMP_R / r);
        let (la, ld) = large(start);
        let (w, dw) = taylor_path(start, z, C64::new(1.0, 0.0), (ld - la).exp());
        dw / w
    } else {
        // Ai grows away from the origin here: integrate outward from |z| = 3.
        let start = z * (SERIES_R / r);
        let (a, d) = airy_series(start);
        let (w, dw) = taylor_path(start, z, a, d);
        dw / w
    };
    if !(out.re.is_finite() && out.im.is_finite()) {
        return Err(Error::Oracle(format!("Ai(z) vanishes or overflows at z = {z}")));
    }
    Ok(out)
}

/// DN value −ih·w′(0)/w(0) for −h²w″ + (η₁ − iμ + ct)w = 0 with w decaying in t,
/// w(t) = Ai(α(η₁ − iμ + ct)), (αc)³ = c/h², arg(αc) ∈ [−π/3, π/3].
pub fn airy_dn(eta1: f64, mu: f64, c: C64, h: f64) -> Result<C64> {
    if mu == 0.0 {
        return Err(Error::Oracle("mu = 0".into()));
    }
    if c == C64::new(0.0, 0.0) || !(h > 0.0) {
        return Err(Error::Oracle(format!("airy_dn needs c != 0 and h > 0 (c = {c}, h = {h})")));
    }
    let base = (c / (h * h)).powf(1.0 / 3.0);
    let rho = rho_value(eta1, mu)?;
    let mut best: Option<C64> = None;
    for j in -1..=1 {
        let ac = base * C64::from_polar(1.0, 2.0 * PI * j as f64 / 3.0);
        if ac.arg().abs() > PI / 3.0 + 1e-9 {
            continue;
        }
        let alpha = ac / c;
        let r = airy_log_derivative(alpha * C64::new(eta1, -mu))?;
        let dn = C64::new(0.0, -h) * ac * r;
        if best.map_or(true, |b| (dn - rho).norm() < (b - rho).norm()) {
            best = Some(dn);
        }
    }
    best.ok_or_else(|| Error::Oracle("no decaying Airy branch".into()))
}
