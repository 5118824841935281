use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num::Complex;

use super::data::{compute_p, BoundaryData, NormalFormCoeffs};
use super::kappa::FlatKappa;
use crate::eikonal::{solve_eikonal, ModelSpec};
use crate::error::{Error, Result};
use crate::quantize::dn_symbol_exact;
use crate::symring::{ComplexRational, Ctx, Rat, SymExpr};
use crate::transport::solve_transport;

type C64 = Complex<f64>;

/// m_{k,0} = p_{k,0}∘κ⁻¹ in model variables (y, η) with η₁ = iμ − ϱ², μ = Im z.
#[derive(Clone, Debug)]
pub struct TransformedModel {
    ctx: Arc<Ctx>,
    pub entries: BTreeMap<(usize, usize), SymExpr>,
    /// Orders k whose m_{k,0} is not polynomial in (y, η); these are only
    /// available through `sample`.
    pub numeric: BTreeSet<usize>,
    sources: BTreeMap<usize, SymExpr>,
    kappa: FlatKappa,
    n_tail: usize,
}

impl TransformedModel {
    pub fn ctx(&self) -> &Arc<Ctx> {
        &self.ctx
    }

    pub fn is_symbolic(&self) -> bool {
        self.numeric.is_empty()
    }

    /// The model with M = `order`; fails when some entry left the polynomial class.
    pub fn model(&self, order: usize) -> Result<ModelSpec> {
        if let Some(k) = self.numeric.first() {
            return Err(Error::Reduction(format!("m[{k},0] is not polynomial in (y, eta); only numeric samples exist")));
        }
        ModelSpec::new(&self.ctx, order, self.entries.clone())
    }

    /// p_{k,0}(κ⁻¹(y, η)) for real (y, η).
    pub fn sample(&self, k: usize, y: &[f64], eta: &[f64]) -> Result<C64> {
        let Some(src) = self.sources.get(&k) else {
            return Ok(C64::new(0.0, 0.0));
        };
        let (x, xi) = self.kappa.inverse(y, eta)?;
        let mut pt = x;
        pt.extend(xi);
        Ok(src.compile().eval(C64::new(1.0, 0.0), &pt, &vec![0.0; self.n_tail]))
    }
}

/// Compose p_{k,0} (k ≤ k_max) with κ⁻¹ for the flat chart. A monomial
/// x^a ξ^b becomes polynomial exactly when a₁ + b₁ is even, since
/// x₁ = 2ξ₁y₁/n₀ and ξ₁² = n₀(1 + iμ − ϱ²) − |η″|².
pub fn transform_m(p: &NormalFormCoeffs, kappa: &FlatKappa, k_max: usize) -> Result<TransformedModel> {
    let n = p.d() - 1;
    if kappa.dim != n {
        return Err(Error::Reduction(format!("kappa acts on {} variables, data on {n}", kappa.dim)));
    }
    if (kappa.n0 - p.n0.to_f64()).abs() > 1e-12 * p.n0.to_f64() {
        return Err(Error::Reduction(format!("kappa built for n0 = {}, data has n0 = {}", kappa.n0, p.n0)));
    }
    let mu = p.z.im.clone();
    let ctx = Ctx::new(p.d(), mu.clone())?;
    let n0 = p.n0.clone();
    let two_over_n0 = ComplexRational::from_rat(&Rat::from_int(2) * &n0.recip()?);

    // ξ₁² with η₁ = iμ − ϱ².
    let mut xi1_sq = SymExpr::constant(&ctx, ComplexRational::new(n0.clone(), &n0 * &mu));
    xi1_sq = &xi1_sq + &SymExpr::rho_pow(&ctx, 2, ComplexRational::from_rat(-&n0));
    for j in 2..=n {
        let e = SymExpr::eta(&ctx, j)?;
        xi1_sq = &xi1_sq - &(&e * &e);
    }
    let y1 = SymExpr::y(&ctx, 1)?;
    let x1_over_xi1 = y1.scale(&two_over_n0);
    let mut xs = vec![x1_over_xi1];
    let mut xis = vec![SymExpr::one(&ctx)];
    for j in 2..=n {
        let eta = SymExpr::eta(&ctx, j)?;
        xs.push(&SymExpr::y(&ctx, j)? + &(&y1 * &eta).scale(&two_over_n0));
        xis.push(eta);
    }

    let mut entries = BTreeMap::new();
    let mut numeric = BTreeSet::new();
    let mut sources = BTreeMap::new();
    for k in 1..=k_max.min(p.k_max) {
        let src = p.get(k, 0).cloned().unwrap_or_else(|| SymExpr::zero(&ctx));
        if src.is_zero() {
            continue;
        }
        let mut acc = SymExpr::zero(&ctx);
        let mut ok = true;
        for m in src.monomials() {
            let a = &m.y_exps[..n];
            let b = &m.y_exps[n..2 * n];
            let e1 = a[0] + b[0];
            if e1 % 2 != 0 {
                ok = false;
                break;
            }
            let mut t = SymExpr::constant(&ctx, m.coeff.clone());
            t = &t * &xi1_sq.pow(e1 / 2);
            for j in 0..n {
                if a[j] > 0 {
                    t = &t * &xs[j].pow(a[j]);
                }
                if j > 0 && b[j] > 0 {
                    t = &t * &xis[j].pow(b[j]);
                }
            }
            acc = &acc + &t;
        }
        sources.insert(k, src);
        if ok {
            entries.insert((k, 0), acc);
        } else {
            numeric.insert(k);
        }
    }
    Ok(TransformedModel { ctx, entries, numeric, sources, kappa: *kappa, n_tail: 2 * n - 1 })
}

/// n₀^{1/2}·Ñ_{s,0} for the model obtained from `bd`, as exact coefficients
/// of h^0..h^s (without the (ih/2)q^♯ gauge term, which lives in x′).
pub fn manifold_dn_symbol(bd: &BoundaryData, order: usize, s: usize) -> Result<Vec<SymExpr>> {
    if !bd.is_flat() {
        return Err(Error::Reduction("only the flat chart r_0 = |xi'|^2 is supported".into()));
    }
    let p = compute_p(bd, order)?;
    let kappa = FlatKappa::new(p.n0.to_f64(), bd.tangential_dim())?;
    let model = transform_m(&p, &kappa, order)?.model(order)?;
    let amps = solve_transport(&solve_eikonal(&model)?)?;
    let sq = ComplexRational::from_rat(bd.sqrt_n0()?);
    Ok(dn_symbol_exact(&amps, s, 0)?.into_iter().map(|e| e.scale(&sq)).collect())
}
