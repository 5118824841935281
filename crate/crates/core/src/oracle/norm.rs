//! Operator norms of linear maps on grid functions.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quantize::GridFn;
use crate::symring::C64;

pub trait GridOperator: Sync {
    fn len(&self) -> usize;
    fn apply(&self, f: &[C64]) -> Result<GridFn>;
    fn apply_adjoint(&self, g: &[C64]) -> Result<GridFn>;
    /// Diagonal in an orthonormal basis, when the operator is one.
    fn diagonal(&self) -> Option<&[C64]> {
        None
    }
}

/// Multiplication by fixed values in an orthonormal basis.
#[derive(Clone, Debug)]
pub struct DiagonalOperator(pub Vec<C64>);

impl GridOperator for DiagonalOperator {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, f: &[C64]) -> Result<GridFn> {
        Ok(f.iter().zip(&self.0).map(|(a, b)| a * b).collect())
    }

    fn apply_adjoint(&self, g: &[C64]) -> Result<GridFn> {
        Ok(g.iter().zip(&self.0).map(|(a, b)| a * b.conj()).collect())
    }

    fn diagonal(&self) -> Option<&[C64]> {
        Some(&self.0)
    }
}

#[derive(Clone, Debug)]
pub struct MatrixOperator(pub DMatrix<C64>);

impl GridOperator for MatrixOperator {
    fn len(&self) -> usize {
        self.0.ncols()
    }

    fn apply(&self, f: &[C64]) -> Result<GridFn> {
        Ok((&self.0 * DVector::from_column_slice(f)).as_slice().to_vec())
    }

    fn apply_adjoint(&self, g: &[C64]) -> Result<GridFn> {
        Ok((self.0.adjoint() * DVector::from_column_slice(g)).as_slice().to_vec())
    }
}

/// A pair of closures (A, A*).
pub struct FnOperator<F, G> {
    pub len: usize,
    pub apply: F,
    pub adjoint: G,
}

impl<F, G> GridOperator for FnOperator<F, G>
where
    F: Fn(&[C64]) -> Result<GridFn> + Sync,
    G: Fn(&[C64]) -> Result<GridFn> + Sync,
{
    fn len(&self) -> usize {
        self.len
    }

    fn apply(&self, f: &[C64]) -> Result<GridFn> {
        (self.apply)(f)
    }

    fn apply_adjoint(&self, g: &[C64]) -> Result<GridFn> {
        (self.adjoint)(g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ‖A‖ by power iteration on A*A from a seeded random start; exact for diagonal operators.
pub fn op_norm_estimate(op: &dyn GridOperator, iters: usize, seed: u64) -> Result<NormEstimate> {
    if let Some(d) = op.diagonal() {
        let value = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
        return Ok(NormEstimate { value, converged: true, iterations: 0 });
    }
    let n = op.len();
    if n == 0 {
        return Err(Error::Oracle("operator on an empty space".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: GridFn = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let mut est = 0.0;
    for it in 1..=iters {
        let nx = norm(&x);
        if nx == 0.0 {
            return Ok(NormEstimate { value: 0.0, converged: true, iterations: it });
        }
        x.iter_mut().for_each(|z| *z /= nx);
        let y = op.apply(&x)?;
        let new = norm(&y);
        let z = op.apply_adjoint(&y)?;
        if new == 0.0 {
            return Ok(NormEstimate { value: 0.0, converged: true, iterations: it });
        }
        if it > 3 && (new - est).abs() <= 1e-12 * new {
            return Ok(NormEstimate { value: new, converged: true, iterations: it });
        }
        est = new;
        x = z;
    }
    Ok(NormEstimate { value: est, converged: false, iterations: iters })
}
