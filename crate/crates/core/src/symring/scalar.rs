//! Exact rational and complex-rational scalars.
//!
//! `Rat` keeps small values in a pair of machine integers and falls back to
//! `BigRational` only when a result leaves the `i64` range. The
//! representation is canonical (lowest terms, positive denominator, small
//! form whenever it fits), so structural equality is value equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};
use num::Complex;

use super::SymError;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Rat {
    Small(i64, i64),
    Big(Box<BigRational>),
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    gcd_u128(a.unsigned_abs(), b.unsigned_abs()) as i128
}

impl Rat {
    pub fn zero() -> Self {
        Rat::Small(0, 1)
    }

    pub fn one() -> Self {
        Rat::Small(1, 1)
    }

    pub fn from_int(n: i64) -> Self {
        Rat::Small(n, 1)
    }

    /// `num/den` in lowest terms. Panics on a zero denominator.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128)
    }

    fn from_i128(num: i128, den: i128) -> Self {
        debug_assert!(den != 0);
        let (mut n, mut d) = (num, den);
        if d < 0 {
            n = -n;
            d = -d;
        }
        let g = gcd_i128(n, d);
        if g > 1 {
            n /= g;
            d /= g;
        }
        if n == 0 {
            return Rat::Small(0, 1);
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(a), Ok(b)) => Rat::Small(a, b),
            _ => Rat::Big(Box::new(BigRational::new_raw(BigInt::from(n), BigInt::from(d)))),
        }
    }

    pub fn from_big(r: BigRational) -> Self {
        // BigRational arithmetic keeps lowest terms; only the small form is decided here.
        if r.is_zero() {
            return Rat::zero();
        }
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(a), Some(b)) => Rat::Small(a, b),
            _ => Rat::Big(Box::new(r)),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(a, b) => BigRational::new_raw(BigInt::from(*a), BigInt::from(*b)),
            Rat::Big(r) => (**r).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rat::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Rat::Small(1, 1))
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Rat::Small(_, d) => *d == 1,
            Rat::Big(r) => r.is_integer(),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Rat::Small(a, _) => a.signum() as i32,
            Rat::Big(r) => {
                if r.is_positive() {
                    1
                } else if r.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn numer_big(&self) -> BigInt {
        match self {
            Rat::Small(a, _) => BigInt::from(*a),
            Rat::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom_big(&self) -> BigInt {
        match self {
            Rat::Small(_, b) => BigInt::from(*b),
            Rat::Big(r) => r.denom().clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Rat::Small(a, b) => *a as f64 / *b as f64,
            Rat::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn recip(&self) -> Result<Rat, SymError> {
        match self {
            Rat::Small(0, _) => Err(SymError::DivisionByZero),
            Rat::Small(a, b) => Ok(Self::from_i128(*b as i128, *a as i128)),
            Rat::Big(r) => Ok(Self::from_big(r.recip())),
        }
    }

    pub fn checked_div(&self, other: &Rat) -> Result<Rat, SymError> {
        Ok(self * &other.recip()?)
    }

    /// Integer power (negative exponents allowed for nonzero values).
    pub fn pow(&self, e: i32) -> Result<Rat, SymError> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = Rat::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Exact square root when the value is the square of a rational.
    pub fn sqrt_exact(&self) -> Option<Rat> {
        if self.signum() < 0 {
            return None;
        }
        let n = self.numer_big();
        let d = self.denom_big();
        let rn = n.sqrt();
        let rd = d.sqrt();
        if &rn * &rn == n && &rd * &rd == d {
            Some(Rat::from_big(BigRational::new(rn, rd)))
        } else {
            None
        }
    }

    /// Parse `p`, `p/q` or a finite decimal such as `-0.125` exactly.
    pub fn parse(s: &str) -> Result<Rat, SymError> {
        let s = s.trim();
        let bad = || SymError::Parse(format!("not a rational number: {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(SymError::DivisionByZero);
            }
            return Ok(Rat::from_big(BigRational::new(p, q)));
        }
        if let Some((ip, fp)) = s.split_once('.') {
            let neg = ip.trim_start().starts_with('-');
            let ip = ip.trim().trim_start_matches(['-', '+']);
            if !fp.chars().all(|c| c.is_ascii_digit()) || fp.is_empty() && ip.is_empty() {
                return Err(bad());
            }
            let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
            let n: BigInt = digits.parse().map_err(|_| bad())?;
            let d = num::pow(BigInt::from(10), fp.len());
            let r = BigRational::new(if neg { -n } else { n }, d);
            return Ok(Rat::from_big(r));
        }
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Rat::from_big(BigRational::from_integer(n)))
    }

    /// Closest rational with denominator at most `max_den` (continued fractions).
    pub fn approximate(x: f64, max_den: i64) -> Rat {
        if !x.is_finite() {
            return Rat::zero();
        }
        let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
        let mut v = x;
        for _ in 0..64 {
            let a = v.floor();
            let ai = a as i128;
            let p2 = ai * p1 + p0;
            let q2 = ai * q1 + q0;
            if q2 > max_den as i128 {
                break;
            }
            p0 = p1;
            q0 = q1;
            p1 = p2;
            q1 = q2;
            let frac = v - a;
            if frac.abs() < 1e-15 {
                break;
            }
            v = 1.0 / frac;
        }
        if q1 == 0 {
            return Rat::from_int(x.round() as i64);
        }
        Rat::from_i128(p1, q1)
    }
}

impl Default for Rat {
    fn default() -> Self {
        Rat::zero()
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rat::Small(a, b), Rat::Small(c, d)) => ((*a as i128) * (*d as i128)).cmp(&((*c as i128) * (*b as i128))),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a Rat> for &'a Rat {
    type Output = Rat;
    fn add(self, o: &Rat) -> Rat {
        match (self, o) {
            (Rat::Small(0, _), _) => o.clone(),
            (_, Rat::Small(0, _)) => self.clone(),
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                if b == d {
                    Rat::from_i128(*a as i128 + *c as i128, *b as i128)
                } else {
                    let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                    Rat::from_i128(a * d + c * b, b * d)
                }
            }
            _ => Rat::from_big(self.to_big() + o.to_big()),
        }
    }
}

impl<'a> Sub<&'a Rat> for &'a Rat {
    type Output = Rat;
    fn sub(self, o: &Rat) -> Rat {
        self + &(-o)
    }
}

impl<'a> Mul<&'a Rat> for &'a Rat {
    type Output = Rat;
    fn mul(self, o: &Rat) -> Rat {
        match (self, o) {
            (Rat::Small(0, _), _) | (_, Rat::Small(0, _)) => Rat::zero(),
            (Rat::Small(1, 1), _) => o.clone(),
            (_, Rat::Small(1, 1)) => self.clone(),
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                let g1 = gcd_i128(a, d);
                let g2 = gcd_i128(c, b);
                let n = (a / g1) * (c / g2);
                let m = (b / g2) * (d / g1);
                match (i64::try_from(n), i64::try_from(m)) {
                    (Ok(x), Ok(y)) => Rat::Small(x, y),
                    _ => Rat::Big(Box::new(BigRational::new_raw(BigInt::from(n), BigInt::from(m)))),
                }
            }
            _ => Rat::from_big(self.to_big() * o.to_big()),
        }
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match self {
            Rat::Small(a, b) => match a.checked_neg() {
                Some(n) => Rat::Small(n, *b),
                None => Rat::from_big(-self.to_big()),
            },
            Rat::Big(r) => Rat::from_big(-(**r).clone()),
        }
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rat::Small(a, 1) => write!(f, "{a}"),
            Rat::Small(a, b) => write!(f, "{a}/{b}"),
            Rat::Big(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Exact complex number with rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ComplexRational {
    pub re: Rat,
    pub im: Rat,
}

impl ComplexRational {
    pub fn new(re: Rat, im: Rat) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(Rat::zero(), Rat::zero())
    }

    pub fn one() -> Self {
        Self::new(Rat::one(), Rat::zero())
    }

    pub fn i() -> Self {
        Self::new(Rat::zero(), Rat::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(Rat::from_int(n), Rat::zero())
    }

    pub fn from_rat(r: Rat) -> Self {
        Self::new(r, Rat::zero())
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(Rat::new(num, den), Rat::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> Rat {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn recip(&self) -> Result<Self, SymError> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        let inv = n.recip()?;
        Ok(Self::new(&self.re * &inv, -&(&self.im * &inv)))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, SymError> {
        if other.im.is_zero() {
            let inv = other.re.recip()?;
            return Ok(Self::new(&self.re * &inv, &self.im * &inv));
        }
        Ok(self * &other.recip()?)
    }

    pub fn scale(&self, r: &Rat) -> Self {
        Self::new(&self.re * r, &self.im * r)
    }

    /// Multiply by `i^n`.
    pub fn mul_i_pow(&self, n: i32) -> Self {
        match n.rem_euclid(4) {
            0 => self.clone(),
            1 => Self::new(-&self.im, self.re.clone()),
            2 => -self,
            _ => Self::new(self.im.clone(), -&self.re),
        }
    }

    pub fn pow(&self, e: i32) -> Result<Self, SymError> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    pub fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl<'a> Add<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn add(self, o: &ComplexRational) -> ComplexRational {
        ComplexRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn sub(self, o: &ComplexRational) -> ComplexRational {
        ComplexRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn mul(self, o: &ComplexRational) -> ComplexRational {
        if self.im.is_zero() && o.im.is_zero() {
            return ComplexRational::new(&self.re * &o.re, Rat::zero());
        }
        if self.im.is_zero() {
            return o.scale(&self.re);
        }
        if o.im.is_zero() {
            return self.scale(&o.re);
        }
        if self.re.is_zero() && o.re.is_zero() {
            return ComplexRational::new(-&(&self.im * &o.im), Rat::zero());
        }
        let re = &(&self.re * &o.re) - &(&self.im * &o.im);
        let im = &(&self.re * &o.im) + &(&self.im * &o.re);
        ComplexRational::new(re, im)
    }
}

impl Neg for &ComplexRational {
    type Output = ComplexRational;
    fn neg(self) -> ComplexRational {
        ComplexRational::new(-&self.re, -&self.im)
    }
}

impl Neg for ComplexRational {
    type Output = ComplexRational;
    fn neg(self) -> ComplexRational {
        -&self
    }
}

impl fmt::Display for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else {
                    write!(f, "{}*i", self.im)
                }
            }
            (false, false) => {
                if self.im.signum() < 0 {
                    write!(f, "({}-{}*i)", self.re, -&self.im)
                } else {
                    write!(f, "({}+{}*i)", self.re, self.im)
                }
            }
        }
    }
}

impl fmt::Debug for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
