//! Laurent polynomials in the square-root atom ϱ with polynomial dependence on
//! the tangential variables y₁..y_{d−1} and the duals η₂..η_{d−1}.
//!
//! η₁ is never a variable: wherever it occurs it is replaced by iμ − ϱ².

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num::bigint::BigInt;
use num::traits::{One, Zero};
use num::Complex;

use super::intform::{self, Num};
use super::scalar::{ComplexRational, Rat};
use super::SymError;

pub type C64 = Complex<f64>;

/// Largest supported dimension: the packed exponent key has room for
/// `1 + (d−1) + (d−2)` slots.
pub const MAX_DIM: usize = 5;

pub(crate) type Key = [i16; 8];

/// Dimension and the exact parameter μ shared by every expression of a model.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ctx {
    d: usize,
    mu: Rat,
}

impl Ctx {
    pub fn new(d: usize, mu: Rat) -> Result<Arc<Ctx>, SymError> {
        if !(2..=MAX_DIM).contains(&d) {
            return Err(SymError::Dimension(format!("d = {d} outside 2..={MAX_DIM}")));
        }
        Ok(Arc::new(Ctx { d, mu }))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mu(&self) -> &Rat {
        &self.mu
    }

    pub fn n_y(&self) -> usize {
        self.d - 1
    }

    pub fn n_eta_tail(&self) -> usize {
        self.d - 2
    }

    fn y_slot(&self, i: usize) -> usize {
        i
    }

    fn eta_slot(&self, i: usize) -> usize {
        // η_i for i ≥ 2 sits after the y block.
        self.d + i - 2
    }
}

/// Read-only view of one stored term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub rho_exp: i32,
    pub y_exps: Vec<u32>,
    pub eta_exps: Vec<u32>,
    pub coeff: ComplexRational,
}

/// Numerical evaluation point. `mu` fixes the branch ϱ = √(−η₁+iμ), Im ϱ > 0.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalPoint {
    pub y: Vec<f64>,
    pub eta1: f64,
    pub eta_tail: Vec<f64>,
    pub mu: f64,
}

/// Principal root of −η₁ + iμ with positive imaginary part.
pub fn rho_value(eta1: f64, mu: f64) -> Result<C64, SymError> {
    if mu == 0.0 {
        return Err(SymError::ZeroMu);
    }
    let r = C64::new(-eta1, mu).sqrt();
    Ok(if r.im < 0.0 { -r } else { r })
}

/// Terms are sorted by key with nonzero Gaussian-integer numerators over a
/// shared denominator `den > 0`, and gcd(den, numerators) = 1. The form is
/// canonical, so structural equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymExpr {
    ctx: Arc<Ctx>,
    den: BigInt,
    terms: Vec<Num>,
}

fn check_same(a: &Ctx, b: &Ctx) -> Result<(), SymError> {
    if a.d != b.d {
        return Err(SymError::Dimension(format!("d = {} vs d = {}", a.d, b.d)));
    }
    if a.mu != b.mu {
        return Err(SymError::MuMismatch(format!("{} vs {}", a.mu, b.mu)));
    }
    Ok(())
}

impl SymExpr {
    pub fn zero(ctx: &Arc<Ctx>) -> Self {
        Self { ctx: ctx.clone(), den: BigInt::one(), terms: Vec::new() }
    }

    fn single(ctx: &Arc<Ctx>, k: Key, c: &ComplexRational) -> Self {
        if c.is_zero() {
            return Self::zero(ctx);
        }
        let (re, im, den) = intform::lift_scalar(c);
        Self { ctx: ctx.clone(), den, terms: vec![(k, re, im)] }
    }

    pub(crate) fn from_parts(ctx: &Arc<Ctx>, den: BigInt, terms: Vec<Num>, sorted: bool) -> Self {
        let (den, terms) = intform::normalize(den, terms, sorted);
        Self { ctx: ctx.clone(), den, terms }
    }

    pub fn constant(ctx: &Arc<Ctx>, c: ComplexRational) -> Self {
        Self::single(ctx, [0; 8], &c)
    }

    pub fn one(ctx: &Arc<Ctx>) -> Self {
        Self::constant(ctx, ComplexRational::one())
    }

    pub fn int(ctx: &Arc<Ctx>, n: i64) -> Self {
        Self::constant(ctx, ComplexRational::from_int(n))
    }

    /// c·ϱ^e
    pub fn rho_pow(ctx: &Arc<Ctx>, e: i32, c: ComplexRational) -> Self {
        let mut k = [0i16; 8];
        k[0] = e as i16;
        Self::single(ctx, k, &c)
    }

    pub fn rho(ctx: &Arc<Ctx>) -> Self {
        Self::rho_pow(ctx, 1, ComplexRational::one())
    }

    /// The coordinate y_i, 1 ≤ i ≤ d−1.
    pub fn y(ctx: &Arc<Ctx>, i: usize) -> Result<Self, SymError> {
        if i == 0 || i > ctx.n_y() {
            return Err(SymError::Axis(i, ctx.d));
        }
        let mut k = [0i16; 8];
        k[ctx.y_slot(i)] = 1;
        Ok(Self::single(ctx, k, &ComplexRational::one()))
    }

    /// The dual variable η_i. For i = 1 this is the normal form iμ − ϱ².
    pub fn eta(ctx: &Arc<Ctx>, i: usize) -> Result<Self, SymError> {
        if i == 0 || i > ctx.n_y() {
            return Err(SymError::Axis(i, ctx.d));
        }
        if i == 1 {
            let imu = ComplexRational::new(Rat::zero(), ctx.mu.clone());
            return Ok(&Self::constant(ctx, imu) - &Self::rho_pow(ctx, 2, ComplexRational::one()));
        }
        let mut k = [0i16; 8];
        k[ctx.eta_slot(i)] = 1;
        Ok(Self::single(ctx, k, &ComplexRational::one()))
    }

    pub fn from_monomials(ctx: &Arc<Ctx>, monos: impl IntoIterator<Item = Monomial>) -> Result<Self, SymError> {
        let mut acc: HashMap<Key, ComplexRational> = HashMap::new();
        for m in monos {
            if m.y_exps.len() != ctx.n_y() || m.eta_exps.len() != ctx.n_eta_tail() {
                return Err(SymError::Dimension(format!(
                    "monomial with {} y and {} η exponents in d = {}",
                    m.y_exps.len(),
                    m.eta_exps.len(),
                    ctx.d
                )));
            }
            let mut k = [0i16; 8];
            k[0] = m.rho_exp as i16;
            for (i, e) in m.y_exps.iter().enumerate() {
                k[ctx.y_slot(i + 1)] = *e as i16;
            }
            for (i, e) in m.eta_exps.iter().enumerate() {
                k[ctx.eta_slot(i + 2)] = *e as i16;
            }
            let slot = acc.entry(k).or_insert_with(ComplexRational::zero);
            *slot = &*slot + &m.coeff;
        }
        let terms: Vec<(Key, ComplexRational)> = acc.into_iter().collect();
        let (den, nums) = intform::lift(&terms);
        Ok(Self::from_parts(ctx, den, nums, false))
    }

    /// Σ parts, all over the same context.
    pub(crate) fn sum_many(ctx: &Arc<Ctx>, parts: &[&SymExpr]) -> Self {
        let raw: Vec<(&BigInt, &[Num])> = parts.iter().map(|p| (&p.den, p.terms.as_slice())).collect();
        let (den, terms) = intform::sum(&raw);
        Self::from_parts(ctx, den, terms, false)
    }

    pub fn ctx(&self) -> &Arc<Ctx> {
        &self.ctx
    }

    pub fn d(&self) -> usize {
        self.ctx.d
    }

    pub fn mu(&self) -> &Rat {
        &self.ctx.mu
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn coeff_of(&self, t: &Num) -> ComplexRational {
        intform::to_complex(&t.1, &t.2, &self.den)
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        let ctx = &self.ctx;
        self.terms.iter().map(move |t| {
            let k = &t.0;
            Monomial {
                rho_exp: k[0] as i32,
                y_exps: (1..=ctx.n_y()).map(|i| k[ctx.y_slot(i)] as u32).collect(),
                eta_exps: (2..=ctx.n_y()).map(|i| k[ctx.eta_slot(i)] as u32).collect(),
                coeff: self.coeff_of(t),
            }
        })
    }

    /// The constant term (coefficient of ϱ⁰y⁰η⁰).
    pub fn constant_term(&self) -> ComplexRational {
        self.terms
            .iter()
            .find(|t| t.0.iter().all(|&e| e == 0))
            .map(|t| self.coeff_of(t))
            .unwrap_or_else(ComplexRational::zero)
    }

    /// True when the expression has no y or η_tail dependence.
    pub fn is_tangentially_constant(&self) -> bool {
        self.terms.iter().all(|t| t.0[1..].iter().all(|&e| e == 0))
    }

    pub fn depends_on_y(&self) -> bool {
        let n = self.ctx.n_y();
        self.terms.iter().any(|t| (1..=n).any(|i| t.0[self.ctx.y_slot(i)] != 0))
    }

    pub fn try_add(&self, o: &SymExpr) -> Result<SymExpr, SymError> {
        check_same(&self.ctx, &o.ctx)?;
        Ok(self.merge(o, false))
    }

    pub fn try_sub(&self, o: &SymExpr) -> Result<SymExpr, SymError> {
        check_same(&self.ctx, &o.ctx)?;
        Ok(self.merge(o, true))
    }

    pub fn try_mul(&self, o: &SymExpr) -> Result<SymExpr, SymError> {
        check_same(&self.ctx, &o.ctx)?;
        Ok(self.product(o))
    }

    fn merge(&self, o: &SymExpr, negate: bool) -> SymExpr {
        if o.terms.is_empty() {
            return self.clone();
        }
        if self.terms.is_empty() {
            return if negate { -o } else { o.clone() };
        }
        let (den, terms) = intform::merge2(&self.den, &self.terms, &o.den, &o.terms, negate);
        SymExpr::from_parts(&self.ctx, den, terms, true)
    }

    fn product(&self, o: &SymExpr) -> SymExpr {
        if self.terms.is_empty() || o.terms.is_empty() {
            return SymExpr::zero(&self.ctx);
        }
        if self.terms.len() == 1 && self.terms[0].0 == [0; 8] {
            return o.scale(&self.coeff_of(&self.terms[0]));
        }
        if o.terms.len() == 1 && o.terms[0].0 == [0; 8] {
            return self.scale(&o.coeff_of(&o.terms[0]));
        }
        let pair = [(self.terms.as_slice(), o.terms.as_slice())];
        SymExpr::from_parts(&self.ctx, &self.den * &o.den, intform::dot(&pair), false)
    }

    /// Σ_i n_i·a_i·b_i with one normalization at the end. All operands must
    /// share `ctx`.
    pub fn sum_of_products(ctx: &Arc<Ctx>, items: &[(&SymExpr, &SymExpr, i64)]) -> SymExpr {
        let live: Vec<&(&SymExpr, &SymExpr, i64)> =
            items.iter().filter(|(a, b, n)| *n != 0 && !a.is_zero() && !b.is_zero()).collect();
        if live.is_empty() {
            return SymExpr::zero(ctx);
        }
        let dens: Vec<BigInt> = live.iter().map(|(a, b, _)| &a.den * &b.den).collect();
        let mut den = BigInt::one();
        for d in &dens {
            den = intform::lcm_smooth(&den, d);
        }
        // Scale the shorter factor of each pair up to the common denominator.
        let mut scaled: Vec<Option<(bool, Vec<Num>)>> = Vec::with_capacity(live.len());
        for ((a, b, n), d) in live.iter().zip(&dens) {
            let s = (&den / d) * *n;
            if s.is_one() {
                scaled.push(None);
                continue;
            }
            let left = a.terms.len() <= b.terms.len();
            let src = if left { &a.terms } else { &b.terms };
            scaled.push(Some((left, src.iter().map(|(k, r, i)| (*k, r * &s, i * &s)).collect())));
        }
        let pairs: Vec<(&[Num], &[Num])> = live
            .iter()
            .zip(&scaled)
            .map(|((a, b, _), sc)| match sc {
                None => (a.terms.as_slice(), b.terms.as_slice()),
                Some((true, v)) => (v.as_slice(), b.terms.as_slice()),
                Some((false, v)) => (a.terms.as_slice(), v.as_slice()),
            })
            .collect();
        SymExpr::from_parts(ctx, den, intform::dot(&pairs), false)
    }

    /// Numerators times (re + i·im) over `den·q`, keys unchanged or remapped.
    fn map_terms(&self, re: &BigInt, im: &BigInt, q: &BigInt, f: impl Fn(&Key) -> Option<(Key, i64)>) -> SymExpr {
        let mut out = Vec::with_capacity(self.terms.len());
        for (k, a, b) in &self.terms {
            let Some((nk, m)) = f(k) else { continue };
            let (r, i) = if im.is_zero() {
                (a * re, b * re)
            } else if re.is_zero() {
                (-(b * im), a * im)
            } else {
                (a * re - b * im, a * im + b * re)
            };
            let (r, i) = if m == 1 { (r, i) } else { (r * m, i * m) };
            out.push((nk, r, i));
        }
        let sorted = out.windows(2).all(|w| w[0].0 < w[1].0);
        SymExpr::from_parts(&self.ctx, &self.den * q, out, sorted)
    }

    pub fn scale(&self, c: &ComplexRational) -> SymExpr {
        if c.is_zero() || self.terms.is_empty() {
            return SymExpr::zero(&self.ctx);
        }
        if c.is_one() {
            return self.clone();
        }
        let (re, im, q) = intform::lift_scalar(c);
        self.map_terms(&re, &im, &q, |k| Some((*k, 1)))
    }

    pub fn scale_int(&self, n: i64) -> SymExpr {
        self.scale(&ComplexRational::from_int(n))
    }

    /// Exact division by a nonzero scalar.
    pub fn div_scalar(&self, c: &ComplexRational) -> Result<SymExpr, SymError> {
        Ok(self.scale(&c.recip()?))
    }

    /// Multiply by ϱ^e (e may be negative).
    pub fn mul_rho(&self, e: i32) -> SymExpr {
        let mut out = self.clone();
        for t in out.terms.iter_mut() {
            t.0[0] += e as i16;
        }
        out
    }

    /// ∂/∂y_i, 1 ≤ i ≤ d−1.
    pub fn diff_y(&self, i: usize) -> Result<SymExpr, SymError> {
        if i == 0 || i > self.ctx.n_y() {
            return Err(SymError::Axis(i, self.ctx.d));
        }
        Ok(self.diff_slot(self.ctx.y_slot(i)))
    }

    /// ∂/∂η_i. For i = 1 this acts through ϱ: ∂_{η₁}ϱ^e = −(e/2)ϱ^{e−2}.
    pub fn diff_eta(&self, i: usize) -> Result<SymExpr, SymError> {
        if i == 0 || i > self.ctx.n_y() {
            return Err(SymError::Axis(i, self.ctx.d));
        }
        if i >= 2 {
            return Ok(self.diff_slot(self.ctx.eta_slot(i)));
        }
        Ok(self.map_terms(&BigInt::from(-1), &BigInt::zero(), &BigInt::from(2), |k| {
            let e = k[0] as i64;
            let mut nk = *k;
            nk[0] -= 2;
            (e != 0).then_some((nk, e))
        }))
    }

    fn diff_slot(&self, slot: usize) -> SymExpr {
        self.map_terms(&BigInt::one(), &BigInt::zero(), &BigInt::one(), |k| {
            let e = k[slot];
            let mut nk = *k;
            nk[slot] -= 1;
            (e != 0).then_some((nk, e as i64))
        })
    }

    /// Maximum ϱ exponent; `None` stands for −∞ (the zero expression).
    pub fn rho_degree(&self) -> Option<i32> {
        self.terms.iter().map(|t| t.0[0] as i32).max()
    }

    /// Minimum ϱ exponent; `None` stands for +∞ (the zero expression).
    /// An expression with `rho_order ≥ k` is O(|ϱ|^k) on bounded |ϱ|.
    pub fn rho_order(&self) -> Option<i32> {
        self.terms.iter().map(|t| t.0[0] as i32).min()
    }

    /// Total degree in y.
    pub fn y_degree(&self) -> Option<u32> {
        let n = self.ctx.n_y();
        self.terms.iter().map(|t| (1..=n).map(|i| t.0[self.ctx.y_slot(i)] as u32).sum()).max()
    }

    /// Total degree in η (η₁ counted through ϱ², η₂.. directly), for ϱ-polynomial
    /// expressions with even nonnegative ϱ exponents.
    pub fn eta_degree(&self) -> Option<u32> {
        let ctx = &self.ctx;
        self.terms
            .iter()
            .map(|t| {
                let r = (t.0[0].max(0) as u32).div_ceil(2);
                r + (2..=ctx.n_y()).map(|i| t.0[ctx.eta_slot(i)] as u32).sum::<u32>()
            })
            .max()
    }

    /// Floating-point value at `p`, using ϱ = √(−η₁+iμ) with Im ϱ > 0.
    pub fn eval_numeric(&self, p: &EvalPoint) -> Result<C64, SymError> {
        if p.y.len() != self.ctx.n_y() || p.eta_tail.len() != self.ctx.n_eta_tail() {
            return Err(SymError::Dimension("evaluation point has the wrong shape".into()));
        }
        let rho = rho_value(p.eta1, p.mu)?;
        Ok(self.compile().eval(rho, &p.y, &p.eta_tail))
    }

    pub fn compile(&self) -> CompiledExpr {
        let ctx = &self.ctx;
        CompiledExpr {
            terms: self
                .terms
                .iter()
                .map(|t| CompiledTerm {
                    rho: t.0[0] as i32,
                    y: (1..=ctx.n_y()).map(|i| t.0[ctx.y_slot(i)] as u32).collect(),
                    eta: (2..=ctx.n_y()).map(|i| t.0[ctx.eta_slot(i)] as u32).collect(),
                    c: self.coeff_of(t).to_c64(),
                })
                .collect(),
        }
    }

    /// Re-express over another context of the same dimension (coefficients are
    /// copied verbatim).
    pub fn with_ctx(&self, ctx: &Arc<Ctx>) -> Result<SymExpr, SymError> {
        if ctx.d != self.ctx.d {
            return Err(SymError::Dimension(format!("d = {} vs d = {}", ctx.d, self.ctx.d)));
        }
        Ok(SymExpr { ctx: ctx.clone(), den: self.den.clone(), terms: self.terms.clone() })
    }

    pub fn pow(&self, n: u32) -> SymExpr {
        let mut acc = SymExpr::one(&self.ctx);
        for _ in 0..n {
            acc = acc.product(self);
        }
        acc
    }
}

#[derive(Clone, Debug)]
struct CompiledTerm {
    rho: i32,
    y: Vec<u32>,
    eta: Vec<u32>,
    c: C64,
}

/// Floating-point image of a `SymExpr` for repeated evaluation.
#[derive(Clone, Debug, Default)]
pub struct CompiledExpr {
    terms: Vec<CompiledTerm>,
}

impl CompiledExpr {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, rho: C64, y: &[f64], eta_tail: &[f64]) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for t in &self.terms {
            let mut v = t.c * rho.powi(t.rho);
            for (e, x) in t.y.iter().zip(y) {
                if *e > 0 {
                    v *= x.powi(*e as i32);
                }
            }
            for (e, x) in t.eta.iter().zip(eta_tail) {
                if *e > 0 {
                    v *= x.powi(*e as i32);
                }
            }
            s += v;
        }
        s
    }
}

/// Sum with dimension/μ checks.
pub fn ring_add(a: &SymExpr, b: &SymExpr) -> Result<SymExpr, SymError> {
    a.try_add(b)
}

/// Product with dimension/μ checks.
pub fn ring_mul(a: &SymExpr, b: &SymExpr) -> Result<SymExpr, SymError> {
    a.try_mul(b)
}

pub fn diff_y(a: &SymExpr, i: usize) -> Result<SymExpr, SymError> {
    a.diff_y(i)
}

pub fn diff_eta(a: &SymExpr, i: usize) -> Result<SymExpr, SymError> {
    a.diff_eta(i)
}

pub fn rho_degree(a: &SymExpr) -> Option<i32> {
    a.rho_degree()
}

pub fn eval_numeric(a: &SymExpr, p: &EvalPoint) -> Result<C64, SymError> {
    a.eval_numeric(p)
}

// Operator forms assume matching contexts, as within one model; mixing
// models must go through the checked `try_*` methods.
impl<'a> Add<&'a SymExpr> for &'a SymExpr {
    type Output = SymExpr;
    fn add(self, o: &SymExpr) -> SymExpr {
        self.try_add(o).expect("SymExpr context mismatch")
    }
}

impl<'a> Sub<&'a SymExpr> for &'a SymExpr {
    type Output = SymExpr;
    fn sub(self, o: &SymExpr) -> SymExpr {
        self.try_sub(o).expect("SymExpr context mismatch")
    }
}

impl<'a> Mul<&'a SymExpr> for &'a SymExpr {
    type Output = SymExpr;
    fn mul(self, o: &SymExpr) -> SymExpr {
        self.try_mul(o).expect("SymExpr context mismatch")
    }
}

impl Neg for &SymExpr {
    type Output = SymExpr;
    fn neg(self) -> SymExpr {
        let terms = self.terms.iter().map(|(k, r, i)| (*k, -r, -i)).collect();
        SymExpr { ctx: self.ctx.clone(), den: self.den.clone(), terms }
    }
}

impl Neg for SymExpr {
    type Output = SymExpr;
    fn neg(self) -> SymExpr {
        -&self
    }
}

impl Add for SymExpr {
    type Output = SymExpr;
    fn add(self, o: SymExpr) -> SymExpr {
        &self + &o
    }
}

impl Sub for SymExpr {
    type Output = SymExpr;
    fn sub(self, o: SymExpr) -> SymExpr {
        &self - &o
    }
}

impl Mul for SymExpr {
    type Output = SymExpr;
    fn mul(self, o: SymExpr) -> SymExpr {
        &self * &o
    }
}
