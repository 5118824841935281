use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Flat-chart symplectomorphism (x′, ξ′) ↦ (y, η) on the branch ξ₁ > 0,
/// generated by S(x, η) = x₁√(n₀(1+η₁) − |η″|²) + Σ_{j≥2} x_jη_j:
/// η₁ = |ξ′|²/n₀ − 1, η_j = ξ_j, y₁ = n₀x₁/(2ξ₁), y_j = x_j − x₁ξ_j/ξ₁.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatKappa {
    pub n0: f64,
    pub dim: usize,
}

/// κ at a point with the full Jacobian ∂(y, η)/∂(x′, ξ′).
#[derive(Clone, Debug, PartialEq)]
pub struct KappaPoint {
    pub y: Vec<f64>,
    pub eta: Vec<f64>,
    pub jacobian: DMatrix<f64>,
}

impl KappaPoint {
    pub fn eta1(&self) -> f64 {
        self.eta[0]
    }
}

impl FlatKappa {
    pub fn new(n0: f64, dim: usize) -> Result<Self> {
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(Error::Reduction(format!("n0 = {n0} must be positive")));
        }
        if dim == 0 {
            return Err(Error::Reduction("tangential dimension must be positive".into()));
        }
        Ok(Self { n0, dim })
    }

    fn check(&self, a: &[f64], b: &[f64]) -> Result<()> {
        if a.len() != self.dim || b.len() != self.dim {
            return Err(Error::Reduction(format!("expected {} tangential components", self.dim)));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64], xi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(x, xi)?;
        if xi.iter().all(|&v| v == 0.0) {
            return Err(Error::Reduction("kappa is undefined at xi' = 0".into()));
        }
        if xi[0] <= 0.0 {
            return Err(Error::Reduction(format!("xi_1 = {} is off the branch xi_1 > 0", xi[0])));
        }
        let r0: f64 = xi.iter().map(|v| v * v).sum();
        let mut eta = xi.to_vec();
        eta[0] = r0 / self.n0 - 1.0;
        let mut y = vec![0.0; self.dim];
        y[0] = self.n0 * x[0] / (2.0 * xi[0]);
        for j in 1..self.dim {
            y[j] = x[j] - x[0] * xi[j] / xi[0];
        }
        Ok((y, eta))
    }

    /// κ⁻¹: ξ₁ = √(n₀(1+η₁) − |η″|²), x₁ = 2ξ₁y₁/n₀, x_j = y_j + 2y₁η_j/n₀.
    pub fn inverse(&self, y: &[f64], eta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(y, eta)?;
        let tail: f64 = eta[1..].iter().map(|v| v * v).sum();
        let xi1_sq = self.n0 * (1.0 + eta[0]) - tail;
        if xi1_sq <= 0.0 {
            return Err(Error::Reduction(format!("eta = {eta:?} has no preimage with xi_1 > 0")));
        }
        let mut xi = eta.to_vec();
        xi[0] = xi1_sq.sqrt();
        let mut x = vec![0.0; self.dim];
        x[0] = 2.0 * xi[0] * y[0] / self.n0;
        for j in 1..self.dim {
            x[j] = y[j] + 2.0 * y[0] * eta[j] / self.n0;
        }
        Ok((x, xi))
    }

    /// Fourth-order central differences (Richardson on steps s and s/2).
    pub fn jacobian(&self, x: &[f64], xi: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dim;
        let mut z: Vec<f64> = x.iter().chain(xi).copied().collect();
        let f = |z: &[f64]| -> Result<Vec<f64>> {
            let (y, eta) = self.forward(&z[..n], &z[n..])?;
            Ok(y.into_iter().chain(eta).collect())
        };
        let mut jac = DMatrix::zeros(2 * n, 2 * n);
        for c in 0..2 * n {
            // Steps stay well inside the branch ξ₁ > 0.
            let s = 1e-3 * xi[0].min(1.0);
            let mut diff = |step: f64| -> Result<Vec<f64>> {
                let z0 = z[c];
                z[c] = z0 + step;
                let p = f(&z)?;
                z[c] = z0 - step;
                let m = f(&z)?;
                z[c] = z0;
                Ok(p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * step)).collect())
            };
            let d1 = diff(s)?;
            let d2 = diff(s / 2.0)?;
            for r in 0..2 * n {
                jac[(r, c)] = (4.0 * d2[r] - d1[r]) / 3.0;
            }
        }
        Ok(jac)
    }

    /// max |JᵀΩJ − Ω| with Ω the standard form in (position, momentum) order.
    pub fn symplectic_defect(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        let j = self.jacobian(x, xi)?;
        let n = self.dim;
        let mut omega = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            omega[(i, n + i)] = 1.0;
            omega[(n + i, i)] = -1.0;
        }
        let pull = j.transpose() * &omega * &j;
        Ok((pull - omega).abs().max())
    }
}

/// η₁ and the Jacobian of κ at (x′ = 0, ξ′).
pub fn flat_kappa(xi_prime: &[f64], n0: f64) -> Result<KappaPoint> {
    let k = FlatKappa::new(n0, xi_prime.len())?;
    let x = vec![0.0; xi_prime.len()];
    let (y, eta) = k.forward(&x, xi_prime)?;
    let jacobian = k.jacobian(&x, xi_prime)?;
    Ok(KappaPoint { y, eta, jacobian })
}
