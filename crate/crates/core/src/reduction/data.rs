use std::collections::BTreeMap;
use std::sync::Arc;

use num::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symring::{parse_expr, CompiledExpr, ComplexRational, Ctx, Rat, SymExpr};

type C64 = Complex<f64>;

/// Textual boundary data as it appears in an experiment file. Expressions use
/// `x1..xn`, `xi1..xin` (or `x_1`, `xi_1`), `i` and rationals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub d: usize,
    pub z: String,
    pub n: Vec<String>,
    #[serde(default)]
    pub r: Vec<String>,
    #[serde(default)]
    pub q_sharp: Option<String>,
    #[serde(default)]
    pub q_flat: Vec<String>,
    #[serde(default)]
    pub v: Vec<String>,
}

impl BoundaryConfig {
    pub fn build(&self) -> Result<BoundaryData> {
        self.build_with_z(parse_z(&self.z)?)
    }

    /// Same data with z overridden (used when sweeping Im z).
    pub fn build_with_z(&self, z: ComplexRational) -> Result<BoundaryData> {
        let mut bd = BoundaryData::new(self.d, z)?;
        for (k, s) in self.n.iter().enumerate() {
            bd.n_table.push(bd.parse(s).map_err(|e| ctx_err(e, "n", k))?);
        }
        if !self.r.is_empty() {
            bd.r_table.clear();
            for (k, s) in self.r.iter().enumerate() {
                bd.r_table.push(bd.parse(s).map_err(|e| ctx_err(e, "r", k))?);
            }
        }
        if let Some(s) = &self.q_sharp {
            bd.q_sharp0 = bd.parse(s).map_err(|e| ctx_err(e, "q_sharp", 0))?;
        }
        for (k, s) in self.q_flat.iter().enumerate() {
            bd.q_flat_table.push(bd.parse(s).map_err(|e| ctx_err(e, "q_flat", k))?);
        }
        for (k, s) in self.v.iter().enumerate() {
            bd.v_table.push(bd.parse(s).map_err(|e| ctx_err(e, "v", k))?);
        }
        bd.validate()?;
        Ok(bd)
    }
}

fn ctx_err(e: Error, table: &str, k: usize) -> Error {
    Error::Reduction(format!("{table}[{k}]: {e}"))
}

fn parse_z(s: &str) -> Result<ComplexRational> {
    let ctx = Ctx::new(2, Rat::one())?;
    if s.contains("mu") {
        return Err(Error::Reduction("z must be a numeric constant".into()));
    }
    let e = parse_expr(&ctx, s)?;
    if e.monomials().any(|m| m.rho_exp != 0 || m.y_exps.iter().any(|&x| x != 0)) {
        return Err(Error::Reduction(format!("z = {s} is not a constant")));
    }
    Ok(e.constant_term())
}

/// Rename `x<k>` / `xi<k>` to the auxiliary context's `y` slots.
fn rewrite(src: &str, n: usize) -> Result<String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = String::with_capacity(src.len() + 8);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if !c.is_ascii_alphabetic() {
            out.push(c);
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
            i += 1;
        }
        let ident: String = chars[start..i].iter().filter(|c| **c != '_').collect();
        let slot = |prefix: &str| -> Option<usize> {
            let rest = ident.strip_prefix(prefix)?;
            if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
                return None;
            }
            rest.parse::<usize>().ok().filter(|k| (1..=n).contains(k))
        };
        if ident == "i" {
            out.push('i');
        } else if let Some(k) = slot("xi") {
            out.push_str(&format!("y{}", n + k));
        } else if let Some(k) = slot("x") {
            out.push_str(&format!("y{k}"));
        } else {
            return Err(Error::Reduction(format!("unknown identifier `{}` (expected x1..x{n}, xi1..xi{n})", &src[start..i])));
        }
    }
    Ok(out)
}

/// Normal-coordinate Taylor data at the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    ctx: Arc<Ctx>,
    n: usize,
    pub n_table: Vec<SymExpr>,
    pub r_table: Vec<SymExpr>,
    pub q_sharp0: SymExpr,
    pub q_flat_table: Vec<SymExpr>,
    pub v_table: Vec<SymExpr>,
    z: ComplexRational,
}

impl BoundaryData {
    /// Empty data for dimension d with r₀ = |ξ′|² and q^♯ = 0.
    pub fn new(d: usize, z: ComplexRational) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(Error::Reduction(format!("boundary data supports d = 2, 3 (got {d})")));
        }
        check_z(&z)?;
        let n = d - 1;
        let ctx = Ctx::new(2 * n + 1, z.im.clone())?;
        let mut r0 = SymExpr::zero(&ctx);
        for k in 1..=n {
            let xi = SymExpr::y(&ctx, n + k)?;
            r0 = &r0 + &(&xi * &xi);
        }
        Ok(Self {
            ctx: ctx.clone(),
            n,
            n_table: Vec::new(),
            r_table: vec![r0],
            q_sharp0: SymExpr::zero(&ctx),
            q_flat_table: Vec::new(),
            v_table: Vec::new(),
            z,
        })
    }

    pub fn ctx(&self) -> &Arc<Ctx> {
        &self.ctx
    }

    /// Model dimension d.
    pub fn d(&self) -> usize {
        self.n + 1
    }

    pub fn tangential_dim(&self) -> usize {
        self.n
    }

    pub fn z(&self) -> &ComplexRational {
        &self.z
    }

    /// Parse a boundary expression in `x`/`xi` variables.
    pub fn parse(&self, s: &str) -> Result<SymExpr> {
        Ok(parse_expr(&self.ctx, &rewrite(s, self.n)?)?)
    }

    pub fn x(&self, k: usize) -> Result<SymExpr> {
        self.slot(k, 0)
    }

    pub fn xi(&self, k: usize) -> Result<SymExpr> {
        self.slot(k, self.n)
    }

    fn slot(&self, k: usize, off: usize) -> Result<SymExpr> {
        if !(1..=self.n).contains(&k) {
            return Err(Error::Reduction(format!("index {k} outside 1..={}", self.n)));
        }
        Ok(SymExpr::y(&self.ctx, off + k)?)
    }

    pub fn constant(&self, c: ComplexRational) -> SymExpr {
        SymExpr::constant(&self.ctx, c)
    }

    /// Evaluate a boundary expression at (x′, ξ′).
    pub fn eval(&self, e: &CompiledExpr, x: &[f64], xi: &[f64]) -> C64 {
        let mut y = x.to_vec();
        y.extend_from_slice(xi);
        e.eval(C64::new(1.0, 0.0), &y, &vec![0.0; self.ctx.n_eta_tail()])
    }

    fn depends_on_xi(&self, e: &SymExpr) -> bool {
        e.monomials().any(|m| m.y_exps[self.n..].iter().any(|&x| x != 0))
    }

    pub fn validate(&self) -> Result<()> {
        check_z(&self.z)?;
        let all = self.n_table.iter().chain(&self.r_table).chain(&self.q_flat_table).chain(&self.v_table).chain(Some(&self.q_sharp0));
        for e in all {
            if e.ctx() != &self.ctx {
                return Err(Error::Reduction("expression built over another context".into()));
            }
            if e.monomials().any(|m| m.rho_exp != 0 || m.eta_exps.iter().any(|&x| x != 0)) {
                return Err(Error::Reduction(format!("{e}: boundary data may only use x and xi")));
            }
        }
        for (name, t) in [("n", &self.n_table), ("v", &self.v_table)] {
            if t.iter().any(|e| self.depends_on_xi(e)) {
                return Err(Error::Reduction(format!("{name}_k must not depend on xi")));
            }
        }
        if self.depends_on_xi(&self.q_sharp0) {
            return Err(Error::Reduction("q_sharp must not depend on xi".into()));
        }
        self.sqrt_n0()?;
        let r0 = self.r_table.first().ok_or_else(|| Error::Reduction("r_0 missing".into()))?;
        if r0.is_zero() {
            return Err(Error::Reduction("r_0 vanishes".into()));
        }
        Ok(())
    }

    /// n₀ as an exact positive constant.
    pub fn n0(&self) -> Result<Rat> {
        let n0 = self.n_table.first().ok_or_else(|| Error::Reduction("n_0 missing".into()))?;
        if n0.monomials().any(|m| m.y_exps.iter().any(|&x| x != 0)) {
            return Err(Error::Reduction(format!("n_0 = {n0} is not constant; only constant n_0 charts are supported")));
        }
        let c = n0.constant_term();
        if !c.is_real() || c.re.signum() <= 0 {
            return Err(Error::Reduction(format!("n_0 = {c} must be real and strictly positive")));
        }
        Ok(c.re)
    }

    /// √n₀, which has to be rational.
    pub fn sqrt_n0(&self) -> Result<Rat> {
        let n0 = self.n0()?;
        n0.sqrt_exact().ok_or_else(|| Error::Reduction(format!("n_0 = {n0} is not the square of a rational")))
    }

    fn entry(&self, t: &[SymExpr], k: usize) -> SymExpr {
        t.get(k).cloned().unwrap_or_else(|| SymExpr::zero(&self.ctx))
    }

    pub fn n_k(&self, k: usize) -> SymExpr {
        self.entry(&self.n_table, k)
    }

    pub fn r_k(&self, k: usize) -> SymExpr {
        self.entry(&self.r_table, k)
    }

    pub fn q_flat_k(&self, k: usize) -> SymExpr {
        self.entry(&self.q_flat_table, k)
    }

    pub fn v_k(&self, k: usize) -> SymExpr {
        self.entry(&self.v_table, k)
    }

    /// r₀ = |ξ′|², the only chart the flat κ handles.
    pub fn is_flat(&self) -> bool {
        let flat = Self::new(self.d(), self.z.clone()).map(|b| b.r_table[0].clone());
        matches!(flat, Ok(r0) if self.r_table.first() == Some(&r0))
    }
}

fn check_z(z: &ComplexRational) -> Result<()> {
    if !z.re.is_one() {
        return Err(Error::Reduction(format!("Re z = {} must be 1", z.re)));
    }
    let im = z.im.to_f64().abs();
    if z.im.is_zero() || im > 1.0 {
        return Err(Error::Reduction(format!("Im z = {} must satisfy 0 < |Im z| <= 1", z.im)));
    }
    Ok(())
}

/// p_{k,j} for j ≤ 2 as boundary expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormCoeffs {
    pub p_table: BTreeMap<(usize, usize), SymExpr>,
    pub n0: Rat,
    pub z: ComplexRational,
    pub k_max: usize,
    d: usize,
}

impl NormalFormCoeffs {
    pub fn get(&self, k: usize, j: usize) -> Option<&SymExpr> {
        self.p_table.get(&(k, j))
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// Coefficients of the t^k h^j expansion with the commutator terms ϑ set to zero:
/// p_{k,0} = (r_k − zn_k)n₀^{−(k+2)/2}/k! (k ≥ 1), p_{k,1} = −iq^♭_k n₀^{−(k+2)/2}/k!,
/// p_{k,2} = −V^♯_k n₀^{−(k+2)/2}/k!, p_{0,0} = 0.
pub fn compute_p(bd: &BoundaryData, k_max: usize) -> Result<NormalFormCoeffs> {
    bd.validate()?;
    let sq = bd.sqrt_n0()?;
    let mut p_table = BTreeMap::new();
    let mi = ComplexRational::new(Rat::zero(), Rat::from_int(-1));
    for k in 0..=k_max {
        let f = &sq.pow(-(k as i32 + 2))? * &Rat::new(1, factorial(k));
        let f = ComplexRational::from_rat(f);
        let p0 = if k == 0 {
            SymExpr::zero(bd.ctx())
        } else {
            bd.r_k(k).try_sub(&bd.n_k(k).scale(&bd.z))?.scale(&f)
        };
        p_table.insert((k, 0), p0);
        p_table.insert((k, 1), bd.q_flat_k(k).scale(&(&f * &mi)));
        p_table.insert((k, 2), bd.v_k(k).scale(&(-&f)));
    }
    Ok(NormalFormCoeffs { p_table, n0: bd.n0()?, z: bd.z.clone(), k_max, d: bd.d() })
}

/// Boundary-level correction: 𝒟_ν u = n₀^{1/2}·(model DN) + (ih/2)q^♯(0, x′).
#[derive(Clone, Debug)]
pub struct GaugeCorrection {
    pub h: f64,
    pub prefactor: f64,
    q_sharp: CompiledExpr,
    n: usize,
    n_tail: usize,
}

impl GaugeCorrection {
    /// (ih/2)q^♯(0, x′).
    pub fn multiplier(&self, x: &[f64]) -> C64 {
        let mut y = x.to_vec();
        y.resize(2 * self.n, 0.0);
        C64::new(0.0, self.h / 2.0) * self.q_sharp.eval(C64::new(1.0, 0.0), &y, &vec![0.0; self.n_tail])
    }

    /// Manifold-level DN value from a model DN value at x′.
    pub fn apply(&self, model_dn: C64, x: &[f64]) -> C64 {
        model_dn * self.prefactor + self.multiplier(x)
    }
}

pub fn gauge_correction(bd: &BoundaryData, h: f64) -> Result<GaugeCorrection> {
    Ok(GaugeCorrection {
        h,
        prefactor: bd.n0()?.to_f64().sqrt(),
        q_sharp: bd.q_sharp0.compile(),
        n: bd.n,
        n_tail: bd.ctx.n_eta_tail(),
    })
}
