//! Coefficient kernels. An expression keeps Gaussian-integer numerators over
//! one shared positive denominator, so sums and products never reduce a
//! fraction per term; only the common content is divided out at the end.

use num::bigint::BigInt;
use num::integer::Integer;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use rustc_hash::FxHashMap;

use super::expr::Key;
use super::scalar::{ComplexRational, Rat};

/// (exponent key, real numerator, imaginary numerator).
pub(crate) type Num = (Key, BigInt, BigInt);

fn lift_rat(r: &Rat, den: &BigInt) -> BigInt {
    match r {
        Rat::Small(a, b) => BigInt::from(*a) * (den / BigInt::from(*b)),
        Rat::Big(q) => q.numer() * (den / q.denom()),
    }
}

/// Numerators of `c` over the least common denominator of its parts.
pub(crate) fn lift_scalar(c: &ComplexRational) -> (BigInt, BigInt, BigInt) {
    let den = c.re.denom_big().lcm(&c.im.denom_big());
    (lift_rat(&c.re, &den), lift_rat(&c.im, &den), den)
}

/// Unnormalized common-denominator form of a term list.
pub(crate) fn lift(terms: &[(Key, ComplexRational)]) -> (BigInt, Vec<Num>) {
    let mut small: i128 = 1;
    let mut den = BigInt::one();
    for (_, c) in terms {
        for r in [&c.re, &c.im] {
            match r {
                Rat::Small(_, b) => {
                    let b = *b as i128;
                    let g = gcd(small, b);
                    match (small / g).checked_mul(b) {
                        Some(v) if v < (1i128 << 100) => small = v,
                        _ => {
                            den = den.lcm(&BigInt::from(small));
                            small = b;
                        }
                    }
                }
                Rat::Big(q) => den = den.lcm(q.denom()),
            }
        }
    }
    den = den.lcm(&BigInt::from(small));
    let out = terms.iter().map(|(k, c)| (*k, lift_rat(&c.re, &den), lift_rat(&c.im, &den))).collect();
    (den, out)
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a as i128
}

const PRIMES: [u64; 25] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97];
// Products of PRIMES[..15] and PRIMES[15..], both below 2^64.
const MODULI: [(u64, usize, usize); 2] = [(614_889_782_588_491_410, 0, 15), (4_240_509_419_946_899_733, 15, 25)];

fn mod_u64(n: &BigInt, m: u64) -> u64 {
    let mut r: u128 = 0;
    for d in n.iter_u64_digits().rev() {
        r = ((r << 64) | d as u128) % m as u128;
    }
    r as u64
}

/// v_p(n) for each small prime, and the cofactor free of them.
fn factor_small(n: &BigInt) -> (Vec<(u64, u32)>, BigInt) {
    let mut rest = n.abs();
    let mut out = Vec::new();
    for (m, lo, hi) in MODULI {
        let r = mod_u64(&rest, m);
        for &p in &PRIMES[lo..hi] {
            if r % p != 0 {
                continue;
            }
            let mut e = 0;
            while mod_u64(&rest, p) == 0 {
                rest /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    (out, rest)
}

/// gcd of `den` with every numerator, prime by prime over the smooth part.
fn content(den: &BigInt, terms: &[Num]) -> BigInt {
    let (fs, rest) = factor_small(den);
    let mut g = BigInt::one();
    for (p, e) in fs {
        let mut k = 0;
        let mut pk = BigInt::one();
        while k < e {
            let next = &pk * p;
            let divides = |v: &BigInt| {
                v.is_zero()
                    || match next.to_u64() {
                        Some(m) => mod_u64(v, m) == 0,
                        None => (v % &next).is_zero(),
                    }
            };
            if !terms.iter().all(|t| divides(&t.1) && divides(&t.2)) {
                break;
            }
            pk = next;
            k += 1;
        }
        g *= pk;
    }
    if !rest.is_one() {
        let mut h = rest;
        'scan: for t in terms {
            for v in [&t.1, &t.2] {
                if !v.is_zero() {
                    h = h.gcd(v);
                    if h.is_one() {
                        break 'scan;
                    }
                }
            }
        }
        g *= h;
    }
    g
}

/// gcd for integers that are usually smooth.
pub(crate) fn gcd_smooth(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_one() || b.is_one() {
        return BigInt::one();
    }
    let (fa, ra) = factor_small(a);
    let (fb, rb) = factor_small(b);
    let mut g = BigInt::one();
    for (p, e) in &fa {
        if let Some((_, f)) = fb.iter().find(|(q, _)| q == p) {
            g *= BigInt::from(*p).pow((*e).min(*f));
        }
    }
    if !ra.is_one() && !rb.is_one() {
        g *= ra.gcd(&rb);
    }
    g
}

pub(crate) fn lcm_smooth(a: &BigInt, b: &BigInt) -> BigInt {
    if a == b || b.is_one() {
        return a.clone();
    }
    if a.is_one() {
        return b.clone();
    }
    a / gcd_smooth(a, b) * b
}

/// Drops zero terms, sorts by key, makes `den` positive and divides out the
/// content shared by `den` and every numerator.
pub(crate) fn normalize(mut den: BigInt, mut terms: Vec<Num>, sorted: bool) -> (BigInt, Vec<Num>) {
    terms.retain(|t| !(t.1.is_zero() && t.2.is_zero()));
    if !sorted {
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    }
    if terms.is_empty() {
        return (BigInt::one(), terms);
    }
    if den.is_negative() {
        den = -den;
        for t in terms.iter_mut() {
            t.1 = -std::mem::take(&mut t.1);
            t.2 = -std::mem::take(&mut t.2);
        }
    }
    if den.is_one() {
        return (den, terms);
    }
    let g = content(&den, &terms);
    if !g.is_one() {
        den /= &g;
        for t in terms.iter_mut() {
            t.1 /= &g;
            t.2 /= &g;
        }
    }
    (den, terms)
}

pub(crate) fn to_rat(n: &BigInt, d: &BigInt) -> Rat {
    if n.is_zero() {
        return Rat::zero();
    }
    if let (Some(a), Some(b)) = (n.to_i64(), d.to_i64()) {
        return Rat::new(a, b);
    }
    Rat::from_big(BigRational::new(n.clone(), d.clone()))
}

pub(crate) fn to_complex(re: &BigInt, im: &BigInt, d: &BigInt) -> ComplexRational {
    ComplexRational::new(to_rat(re, d), to_rat(im, d))
}

fn add_key(a: &Key, b: &Key) -> Key {
    let mut k = *a;
    for s in 0..k.len() {
        k[s] += b[s];
    }
    k
}

fn max_bits(t: &[Num]) -> u64 {
    t.iter().map(|x| x.1.bits().max(x.2.bits())).max().unwrap_or(0)
}

/// Σ_i (a_i × b_i) on numerators (unsorted, may contain zeros). Each pair is
/// already scaled to the caller's common denominator.
pub(crate) fn dot(pairs: &[(&[Num], &[Num])]) -> Vec<Num> {
    let total: u64 = pairs.iter().map(|(a, b)| a.len() as u64 * b.len() as u64).sum();
    let widest = pairs.iter().map(|(a, b)| max_bits(a) + max_bits(b)).max().unwrap_or(0);
    let bound = widest + 2 + (64 - total.leading_zeros() as u64);
    let limbs = bound.div_ceil(64) as usize + 1;
    let cap = pairs.iter().map(|(a, b)| a.len().max(b.len())).max().unwrap_or(0) * 2;
    match limbs {
        _ if bound < 126 => dot_small(pairs, cap),
        0..=4 => dot_fixed::<4>(pairs, cap),
        5..=6 => dot_fixed::<6>(pairs, cap),
        7..=8 => dot_fixed::<8>(pairs, cap),
        9..=12 => dot_fixed::<12>(pairs, cap),
        13..=16 => dot_fixed::<16>(pairs, cap),
        _ => dot_big(pairs),
    }
}

/// Magnitudes flattened with a fixed stride, plus signs.
struct Flat {
    stride: usize,
    limbs: Vec<u64>,
    neg: Vec<bool>,
}

impl Flat {
    fn new(vals: &[&BigInt], stride: usize) -> Self {
        let mut limbs = vec![0u64; vals.len() * stride];
        let mut neg = Vec::with_capacity(vals.len());
        for (i, v) in vals.iter().enumerate() {
            let (sign, digits) = v.to_u64_digits();
            limbs[i * stride..i * stride + digits.len()].copy_from_slice(&digits);
            neg.push(sign == num::bigint::Sign::Minus);
        }
        Flat { stride, limbs, neg }
    }

    fn get(&self, i: usize) -> (&[u64], bool) {
        (&self.limbs[i * self.stride..(i + 1) * self.stride], self.neg[i])
    }
}

/// acc ± a·b in N-limb two's complement; exact while the true value fits.
#[inline]
fn mac<const N: usize>(acc: &mut [u64; N], a: &[u64], b: &[u64], negate: bool) {
    let mut tmp = [0u64; N];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let mut carry: u128 = 0;
        for (j, &y) in b.iter().enumerate() {
            if i + j >= N {
                break;
            }
            let t = tmp[i + j] as u128 + (x as u128) * (y as u128) + carry;
            tmp[i + j] = t as u64;
            carry = t >> 64;
        }
        let mut k = i + b.len();
        while carry != 0 && k < N {
            let t = tmp[k] as u128 + carry;
            tmp[k] = t as u64;
            carry = t >> 64;
            k += 1;
        }
    }
    if negate {
        let mut borrow = false;
        for k in 0..N {
            let (v, b1) = acc[k].overflowing_sub(tmp[k]);
            let (v, b2) = v.overflowing_sub(borrow as u64);
            acc[k] = v;
            borrow = b1 || b2;
        }
    } else {
        let mut carry = false;
        for k in 0..N {
            let (v, c1) = acc[k].overflowing_add(tmp[k]);
            let (v, c2) = v.overflowing_add(carry as u64);
            acc[k] = v;
            carry = c1 || c2;
        }
    }
}

fn fixed_to_big<const N: usize>(v: &[u64; N]) -> BigInt {
    let negative = v[N - 1] >> 63 == 1;
    let mut mag = *v;
    if negative {
        let mut carry = true;
        for x in mag.iter_mut() {
            let (y, c) = (!*x).overflowing_add(carry as u64);
            *x = y;
            carry = c;
        }
    }
    let mut bytes = Vec::with_capacity(N * 8);
    for x in mag {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    let sign = if negative { num::bigint::Sign::Minus } else { num::bigint::Sign::Plus };
    BigInt::from_bytes_le(sign, &bytes)
}

fn dot_fixed<const N: usize>(pairs: &[(&[Num], &[Num])], cap: usize) -> Vec<Num> {
    let mut acc: FxHashMap<Key, ([u64; N], [u64; N])> = FxHashMap::default();
    acc.reserve(cap);
    for &(a, b) in pairs {
        let sa = (max_bits(a).div_ceil(64) as usize).max(1);
        let sb = (max_bits(b).div_ceil(64) as usize).max(1);
        let ra = Flat::new(&a.iter().map(|t| &t.1).collect::<Vec<_>>(), sa);
        let ia = Flat::new(&a.iter().map(|t| &t.2).collect::<Vec<_>>(), sa);
        let rb = Flat::new(&b.iter().map(|t| &t.1).collect::<Vec<_>>(), sb);
        let ib = Flat::new(&b.iter().map(|t| &t.2).collect::<Vec<_>>(), sb);
        let az: Vec<(bool, bool)> = a.iter().map(|t| (t.1.is_zero(), t.2.is_zero())).collect();
        let bz: Vec<(bool, bool)> = b.iter().map(|t| (t.1.is_zero(), t.2.is_zero())).collect();
        for (x, (ka, _, _)) in a.iter().enumerate() {
            let (ar, arn) = ra.get(x);
            let (ai, ain) = ia.get(x);
            for (y, (kb, _, _)) in b.iter().enumerate() {
                let (br, brn) = rb.get(y);
                let (bi, bin) = ib.get(y);
                let e = acc.entry(add_key(ka, kb)).or_insert(([0; N], [0; N]));
                if !az[x].0 {
                    if !bz[y].0 {
                        mac(&mut e.0, ar, br, arn != brn);
                    }
                    if !bz[y].1 {
                        mac(&mut e.1, ar, bi, arn != bin);
                    }
                }
                if !az[x].1 {
                    if !bz[y].1 {
                        mac(&mut e.0, ai, bi, ain == bin);
                    }
                    if !bz[y].0 {
                        mac(&mut e.1, ai, br, ain != brn);
                    }
                }
            }
        }
    }
    acc.into_iter()
        .filter(|(_, v)| v.0.iter().any(|&x| x != 0) || v.1.iter().any(|&x| x != 0))
        .map(|(k, (r, i))| (k, fixed_to_big(&r), fixed_to_big(&i)))
        .collect()
}

fn dot_small(pairs: &[(&[Num], &[Num])], cap: usize) -> Vec<Num> {
    let mut acc: FxHashMap<Key, (i128, i128)> = FxHashMap::default();
    acc.reserve(cap);
    let conv = |t: &[Num]| -> Vec<(Key, i128, i128)> {
        t.iter().map(|(k, r, i)| (*k, r.to_i128().unwrap(), i.to_i128().unwrap())).collect()
    };
    for &(a, b) in pairs {
        let (sa, sb) = (conv(a), conv(b));
        for (ka, ar, ai) in &sa {
            for (kb, br, bi) in &sb {
                let e = acc.entry(add_key(ka, kb)).or_insert((0, 0));
                e.0 += ar * br - ai * bi;
                e.1 += ar * bi + ai * br;
            }
        }
    }
    acc.into_iter().filter(|(_, v)| v.0 != 0 || v.1 != 0).map(|(k, (r, i))| (k, BigInt::from(r), BigInt::from(i))).collect()
}

fn dot_big(pairs: &[(&[Num], &[Num])]) -> Vec<Num> {
    let mut acc: FxHashMap<Key, (BigInt, BigInt)> = FxHashMap::default();
    for &(a, b) in pairs {
        for (ka, ar, ai) in a {
            for (kb, br, bi) in b {
                let e = acc.entry(add_key(ka, kb)).or_insert_with(|| (BigInt::zero(), BigInt::zero()));
                if !ai.is_zero() && !bi.is_zero() {
                    e.0 -= ai * bi;
                }
                if !ar.is_zero() {
                    if !br.is_zero() {
                        e.0 += ar * br;
                    }
                    if !bi.is_zero() {
                        e.1 += ar * bi;
                    }
                }
                if !ai.is_zero() && !br.is_zero() {
                    e.1 += ai * br;
                }
            }
        }
    }
    acc.into_iter().map(|(k, (r, i))| (k, r, i)).collect()
}

/// Σ parts over the least common denominator (unsorted, unnormalized).
pub(crate) fn sum(parts: &[(&BigInt, &[Num])]) -> (BigInt, Vec<Num>) {
    let mut den = BigInt::one();
    for (d, _) in parts {
        den = lcm_smooth(&den, d);
    }
    let mut acc: FxHashMap<Key, (BigInt, BigInt)> = FxHashMap::default();
    for (d, terms) in parts {
        let scale = &den / *d;
        let unit = scale.is_one();
        for (k, r, i) in terms.iter() {
            let e = acc.entry(*k).or_insert_with(|| (BigInt::zero(), BigInt::zero()));
            if unit {
                e.0 += r;
                e.1 += i;
            } else {
                e.0 += r * &scale;
                e.1 += i * &scale;
            }
        }
    }
    (den, acc.into_iter().map(|(k, (r, i))| (k, r, i)).collect())
}

/// a/da ± b/db over lcm(da, db), as a sorted merge (unnormalized).
pub(crate) fn merge2(da: &BigInt, a: &[Num], db: &BigInt, b: &[Num], negate: bool) -> (BigInt, Vec<Num>) {
    let den = lcm_smooth(da, db);
    let sa = &den / da;
    let sb = &den / db;
    let sb = if negate { -sb } else { sb };
    let fa = |x: &BigInt| if sa.is_one() { x.clone() } else { x * &sa };
    let fb = |x: &BigInt| if sb.is_one() { x.clone() } else { x * &sb };
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push((a[i].0, fa(&a[i].1), fa(&a[i].2)));
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, fb(&b[j].1), fb(&b[j].2)));
            j += 1;
        } else {
            out.push((a[i].0, fa(&a[i].1) + fb(&b[j].1), fa(&a[i].2) + fb(&b[j].2)));
            i += 1;
            j += 1;
        }
    }
    (den, out)
}
