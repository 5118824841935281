//! DN error measurements ‖N·Op(φϱ^k) − Ñ_{s,k}‖ against the oracles.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::airy::airy_dn;
use super::mode_ode::{mode_dn, ModeODEProblem};
use super::norm::{op_norm_estimate, DiagonalOperator, MatrixOperator};
use crate::eikonal::ModelSpec;
use crate::error::{Error, Result};
use crate::quantize::{bump, dn_symbol, TorusGrid};
use crate::symring::{rho_value, SymExpr, C64};
use crate::transport::AmplitudeJet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DNMeasurement {
    pub h: f64,
    pub mu: f64,
    pub s: usize,
    pub k: usize,
    pub error_norm: f64,
    pub bound_value: f64,
    pub converged: bool,
}

impl DNMeasurement {
    pub fn ratio(&self) -> f64 {
        self.error_norm / self.bound_value
    }
}

/// h^{s+1}|μ|^{−(3s+2−k)/2}.
pub fn bound_value(h: f64, mu: f64, s: usize, k: usize) -> f64 {
    h.powi(s as i32 + 1) * mu.abs().powf(-(3.0 * s as f64 + 2.0 - k as f64) / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModeOracle {
    /// m ≡ 0: the half-line DN multiplier is ϱ itself.
    Free,
    /// Closed form for m = ct.
    Airy(C64),
    /// Numerov two-point solve.
    Ode,
}

/// c when the model is exactly m = ct with constant c.
pub fn airy_coefficient(model: &ModelSpec) -> Option<C64> {
    let e = model.entries();
    if e.len() != 1 {
        return None;
    }
    let c = e.get(&(1, 0))?;
    let k = c.constant_term();
    (*c == SymExpr::constant(model.ctx(), k.clone()) && !k.is_zero()).then(|| k.to_c64())
}

/// N at every grid frequency where φ(η₁) ≠ 0; `None` elsewhere.
pub fn oracle_dn_values(model: &ModelSpec, grid: &TorusGrid, oracle: ModeOracle) -> Result<Vec<Option<C64>>> {
    if !model.is_y_independent() {
        return Err(Error::Oracle("mode oracles need a y-independent model".into()));
    }
    let mu = model.mu().to_f64();
    let h = grid.h();
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let eta = grid.frequency(i);
            if bump(eta[0]) == 0.0 {
                return Ok(None);
            }
            let v = match oracle {
                ModeOracle::Free => rho_value(eta[0], mu)?,
                ModeOracle::Airy(c) => airy_dn(eta[0], mu, c, h)?,
                ModeOracle::Ode => mode_dn(&ModeODEProblem::from_model(model, &eta, h)?)?,
            };
            Ok(Some(v))
        })
        .collect()
}

/// Diagonal case: the error operator is a Fourier multiplier, so its norm is the max modulus.
pub fn measure_diagonal(
    amps: &AmplitudeJet,
    s: usize,
    k: usize,
    grid: &TorusGrid,
    dn_values: &[Option<C64>],
) -> Result<DNMeasurement> {
    let model = amps.phase().model();
    let mu = model.mu().to_f64();
    let sym = dn_symbol(amps, s, k, grid)?;
    let vals = sym
        .multiplier_values()
        .ok_or_else(|| Error::Oracle("y-dependent symbol in the diagonal measurement".into()))?;
    if dn_values.len() != grid.len() {
        return Err(Error::Oracle("oracle values do not match the grid".into()));
    }
    let mut err = Vec::with_capacity(grid.len());
    for (i, (v, n)) in vals.iter().zip(dn_values).enumerate() {
        let eta1 = grid.frequency(i)[0];
        let lhs = match n {
            Some(n) => n * rho_value(eta1, mu)?.powi(k as i32) * bump(eta1),
            None => C64::new(0.0, 0.0),
        };
        err.push(lhs - v);
    }
    let est = op_norm_estimate(&DiagonalOperator(err), 0, 0)?;
    Ok(DNMeasurement {
        h: grid.h(),
        mu,
        s,
        k,
        error_norm: est.value,
        bound_value: bound_value(grid.h(), mu, s, k),
        converged: est.converged,
    })
}

/// General case with an oracle DN matrix on normalized coefficients.
pub fn measure_block(
    amps: &AmplitudeJet,
    s: usize,
    k: usize,
    grid: &TorusGrid,
    dn: &DMatrix<C64>,
    seed: u64,
) -> Result<DNMeasurement> {
    let mu = amps.phase().model().mu().to_f64();
    let n = grid.len();
    if dn.nrows() != n || dn.ncols() != n {
        return Err(Error::Oracle("DN matrix does not match the grid".into()));
    }
    let sym = dn_symbol(amps, s, k, grid)?.coefficient_matrix(grid)?;
    let mut comp = dn.clone();
    for j in 0..n {
        let eta1 = grid.frequency(j)[0];
        let w = rho_value(eta1, mu)?.powi(k as i32) * bump(eta1);
        comp.column_mut(j).iter_mut().for_each(|z| *z *= w);
    }
    let est = op_norm_estimate(&MatrixOperator(comp - sym), 300, seed)?;
    Ok(DNMeasurement {
        h: grid.h(),
        mu,
        s,
        k,
        error_norm: est.value,
        bound_value: bound_value(grid.h(), mu, s, k),
        converged: est.converged,
    })
}
