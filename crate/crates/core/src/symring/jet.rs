//! Truncated double series Σ t^a h^b c_{a,b} with `SymExpr` coefficients.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::expr::{Ctx, SymExpr};
use super::scalar::ComplexRational;
use super::SymError;

#[derive(Clone, Debug, PartialEq)]
pub struct JetSeries {
    ctx: Arc<Ctx>,
    coeffs: BTreeMap<(u32, u32), SymExpr>,
    t_trunc: u32,
    h_trunc: u32,
}

impl JetSeries {
    /// Zero series kept modulo (t^t_trunc, h^h_trunc).
    pub fn zero(ctx: &Arc<Ctx>, t_trunc: u32, h_trunc: u32) -> Self {
        Self { ctx: ctx.clone(), coeffs: BTreeMap::new(), t_trunc, h_trunc }
    }

    pub fn from_t_coeffs(ctx: &Arc<Ctx>, cs: &[SymExpr], t_trunc: u32, h_trunc: u32) -> Self {
        let mut s = Self::zero(ctx, t_trunc, h_trunc);
        for (k, c) in cs.iter().enumerate() {
            s.set(k as u32, 0, c.clone());
        }
        s
    }

    pub fn ctx(&self) -> &Arc<Ctx> {
        &self.ctx
    }

    pub fn t_trunc(&self) -> u32 {
        self.t_trunc
    }

    pub fn h_trunc(&self) -> u32 {
        self.h_trunc
    }

    /// Store a coefficient; orders beyond the truncation are dropped.
    pub fn set(&mut self, t: u32, h: u32, c: SymExpr) {
        if t >= self.t_trunc || h >= self.h_trunc || c.is_zero() {
            self.coeffs.remove(&(t, h));
            return;
        }
        self.coeffs.insert((t, h), c);
    }

    pub fn add_at(&mut self, t: u32, h: u32, c: &SymExpr) {
        if t >= self.t_trunc || h >= self.h_trunc || c.is_zero() {
            return;
        }
        let v = match self.coeffs.get(&(t, h)) {
            Some(old) => old + c,
            None => c.clone(),
        };
        self.set(t, h, v);
    }

    pub fn get(&self, t: u32, h: u32) -> Option<&SymExpr> {
        self.coeffs.get(&(t, h))
    }

    pub fn coeff(&self, t: u32, h: u32) -> SymExpr {
        self.get(t, h).cloned().unwrap_or_else(|| SymExpr::zero(&self.ctx))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Nonzero coefficients in ascending (t, h) order.
    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &SymExpr)> {
        self.coeffs.iter()
    }

    pub fn with_trunc(&self, t_trunc: u32, h_trunc: u32) -> Self {
        let mut s = Self::zero(&self.ctx, t_trunc, h_trunc);
        for ((t, h), c) in &self.coeffs {
            s.set(*t, *h, c.clone());
        }
        s
    }

    fn check(&self, o: &JetSeries) -> Result<(), SymError> {
        if self.ctx != o.ctx {
            return Err(SymError::Dimension("jet series over different contexts".into()));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &JetSeries) -> Result<JetSeries, SymError> {
        self.check(o)?;
        let mut s = self.with_trunc(self.t_trunc.min(o.t_trunc), self.h_trunc.min(o.h_trunc));
        for ((t, h), c) in &o.coeffs {
            s.add_at(*t, *h, c);
        }
        Ok(s)
    }

    pub fn try_sub(&self, o: &JetSeries) -> Result<JetSeries, SymError> {
        self.try_add(&o.neg())
    }

    pub fn try_mul(&self, o: &JetSeries) -> Result<JetSeries, SymError> {
        Self::sum_of_products(&self.ctx, &[(self, o)])
    }

    /// Σ_i a_i·b_i, truncated to the smallest truncation among the factors.
    pub fn sum_of_products(ctx: &Arc<Ctx>, pairs: &[(&JetSeries, &JetSeries)]) -> Result<JetSeries, SymError> {
        let mut tt = u32::MAX;
        let mut ht = u32::MAX;
        for (a, b) in pairs {
            a.check(b)?;
            if a.ctx != *ctx {
                return Err(SymError::Dimension("jet series over different contexts".into()));
            }
            tt = tt.min(a.t_trunc).min(b.t_trunc);
            ht = ht.min(a.h_trunc).min(b.h_trunc);
        }
        if pairs.is_empty() {
            return Ok(Self::zero(ctx, 0, 0));
        }
        let mut acc: BTreeMap<(u32, u32), Vec<(&SymExpr, &SymExpr, i64)>> = BTreeMap::new();
        for (a, b) in pairs {
            for ((t1, h1), x) in &a.coeffs {
                for ((t2, h2), y) in &b.coeffs {
                    let (t, h) = (t1 + t2, h1 + h2);
                    if t < tt && h < ht {
                        acc.entry((t, h)).or_default().push((x, y, 1));
                    }
                }
            }
        }
        let mut s = Self::zero(ctx, tt, ht);
        for (k, items) in acc {
            s.set(k.0, k.1, SymExpr::sum_of_products(ctx, &items));
        }
        Ok(s)
    }

    pub fn neg(&self) -> JetSeries {
        self.map(|c| -c)
    }

    pub fn map(&self, f: impl Fn(&SymExpr) -> SymExpr) -> JetSeries {
        let mut s = Self::zero(&self.ctx, self.t_trunc, self.h_trunc);
        for ((t, h), c) in &self.coeffs {
            s.set(*t, *h, f(c));
        }
        s
    }

    pub fn try_map(&self, f: impl Fn(&SymExpr) -> Result<SymExpr, SymError>) -> Result<JetSeries, SymError> {
        let mut s = Self::zero(&self.ctx, self.t_trunc, self.h_trunc);
        for ((t, h), c) in &self.coeffs {
            s.set(*t, *h, f(c)?);
        }
        Ok(s)
    }

    pub fn scale(&self, c: &ComplexRational) -> JetSeries {
        self.map(|e| e.scale(c))
    }

    pub fn scale_expr(&self, e: &SymExpr) -> JetSeries {
        self.map(|c| c * e)
    }

    /// ∂_t; the truncation drops by one since the top coefficient is unknown.
    pub fn dt(&self) -> JetSeries {
        let mut s = Self::zero(&self.ctx, self.t_trunc.saturating_sub(1), self.h_trunc);
        for ((t, h), c) in &self.coeffs {
            if *t > 0 {
                s.set(t - 1, *h, c.scale_int(*t as i64));
            }
        }
        s
    }

    /// Multiply by h^n.
    pub fn shift_h(&self, n: u32) -> JetSeries {
        let mut s = Self::zero(&self.ctx, self.t_trunc, self.h_trunc);
        for ((t, h), c) in &self.coeffs {
            s.set(*t, h + n, c.clone());
        }
        s
    }

    /// Multiply by t^n.
    pub fn shift_t(&self, n: u32) -> JetSeries {
        let mut s = Self::zero(&self.ctx, self.t_trunc, self.h_trunc);
        for ((t, h), c) in &self.coeffs {
            s.set(t + n, *h, c.clone());
        }
        s
    }

    pub fn diff_y(&self, i: usize) -> Result<JetSeries, SymError> {
        self.try_map(|c| c.diff_y(i))
    }

    pub fn diff_eta(&self, i: usize) -> Result<JetSeries, SymError> {
        self.try_map(|c| c.diff_eta(i))
    }
}

/// Sum a batch of expressions over one common denominator.
pub fn sum_exprs(ctx: &Arc<Ctx>, parts: Vec<SymExpr>) -> SymExpr {
    let parts: Vec<SymExpr> = parts.into_iter().filter(|p| !p.is_zero()).collect();
    match parts.len() {
        0 => SymExpr::zero(ctx),
        1 => parts.into_iter().next().unwrap(),
        2 => &parts[0] + &parts[1],
        _ => {
            let refs: Vec<&SymExpr> = parts.iter().collect();
            SymExpr::sum_many(ctx, &refs)
        }
    }
}
