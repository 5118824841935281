use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eikonal::{ModelSpec, ModelTemplate};
use crate::error::{Error, Result};
use crate::reduction::{compute_p, transform_m, BoundaryConfig, FlatKappa};
use crate::symring::{ComplexRational, Rat};

/// Largest denominator used when a real μ is turned into the exact rational
/// the symbolic engine needs.
pub const MU_DENOMINATOR: i64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSource,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Either an inline table `m = { "k,j" = "expr" }` (expressions may use `mu`)
/// or boundary data run through the reduction. For boundary data the sweep's
/// μ replaces Im z.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSource {
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub m: BTreeMap<String, String>,
    #[serde(default)]
    pub boundary: Option<BoundaryConfig>,
}

fn default_d() -> usize {
    2
}

fn default_order() -> usize {
    4
}

impl ModelSource {
    pub fn inline(d: usize, order: usize, m: &[((usize, usize), &str)]) -> Self {
        let m = m.iter().map(|((k, j), e)| (format!("{k},{j}"), e.to_string())).collect();
        Self { d, order, m, boundary: None }
    }

    /// A standalone `[model]` table body.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let m: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn template(&self) -> Result<ModelTemplate> {
        let mut entries = BTreeMap::new();
        for (key, e) in &self.m {
            let (k, j) = key
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| Error::Config(format!("model key `{key}` is not of the form \"k,j\"")))?;
            entries.insert((k, j), e.clone());
        }
        Ok(ModelTemplate { d: self.d, order: self.order, entries })
    }

    pub fn validate(&self) -> Result<()> {
        if self.boundary.is_some() && !self.m.is_empty() {
            return Err(Error::Config("give either model.m or model.boundary, not both".into()));
        }
        if let Some(b) = &self.boundary {
            if b.d != self.d {
                return Err(Error::Config(format!("model.d = {} but model.boundary.d = {}", self.d, b.d)));
            }
        }
        // Parse once at a sample μ so syntax errors surface at load time.
        self.instantiate(&Rat::new(1, 2))?;
        Ok(())
    }

    pub fn instantiate(&self, mu: &Rat) -> Result<ModelSpec> {
        match &self.boundary {
            None => self.template()?.instantiate(mu.clone()),
            Some(b) => {
                let z = ComplexRational::new(Rat::one(), mu.clone());
                let bd = b.build_with_z(z)?;
                if !bd.is_flat() {
                    return Err(Error::Config("boundary data must use r_0 = |xi'|^2".into()));
                }
                let p = compute_p(&bd, self.order)?;
                let kappa = FlatKappa::new(p.n0.to_f64(), bd.tangential_dim())?;
                transform_m(&p, &kappa, self.order)?.model(self.order)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Minimum number of Fourier modes per axis.
    pub modes: usize,
    /// Enlarge the grid so the frequency window always covers the cutoff support.
    pub covering: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { modes: 256, covering: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuRule {
    Fixed(f64),
    /// μ = h^θ.
    Theta(f64),
    /// Every listed μ at every h.
    List(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleChoice {
    Auto,
    Airy,
    Ode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub s: Vec<usize>,
    pub k: Vec<usize>,
    /// h = 2^{−e} for e in h_exp[0]..=h_exp[1]; ignored when `h` is given.
    pub h_exp: [u32; 2],
    pub h: Option<Vec<f64>>,
    pub mu: MuRule,
    /// Regime margin: rows need |μ| ≥ h^{2/3−eps}.
    pub eps: f64,
    pub oracle: OracleChoice,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            s: vec![0],
            k: vec![0],
            h_exp: [5, 11],
            h: None,
            mu: MuRule::Fixed(0.3),
            eps: 0.05,
            oracle: OracleChoice::Auto,
            seed: 0,
        }
    }
}

impl SweepConfig {
    pub fn h_values(&self) -> Vec<f64> {
        match &self.h {
            Some(v) => v.clone(),
            None => (self.h_exp[0]..=self.h_exp[1]).map(|e| 0.5f64.powi(e as i32)).collect(),
        }
    }

    /// (h, μ) points in sweep order, μ rounded to an exact rational.
    pub fn points(&self) -> Vec<(f64, Rat)> {
        let mut out = Vec::new();
        for h in self.h_values() {
            let mus = match &self.mu {
                MuRule::Fixed(m) => vec![*m],
                MuRule::Theta(th) => vec![h.powf(*th)],
                MuRule::List(v) => v.clone(),
            };
            for m in mus {
                out.push((h, Rat::approximate(m, MU_DENOMINATOR)));
            }
        }
        out
    }

    pub fn validate(&self, order: usize) -> Result<()> {
        if self.s.is_empty() || self.k.is_empty() {
            return Err(Error::Config("sweep.s and sweep.k must be nonempty".into()));
        }
        for &s in &self.s {
            if s > order + 1 {
                return Err(Error::Config(format!("s = {s} needs amplitudes beyond M = {order}")));
            }
            for &k in &self.k {
                if k > 3 * s + 2 {
                    return Err(Error::Config(format!("(s, k) = ({s}, {k}) violates k <= 3s+2")));
                }
            }
        }
        if !(self.eps > 0.0 && self.eps < 2.0 / 3.0) {
            return Err(Error::Config(format!("eps = {} must lie in (0, 2/3)", self.eps)));
        }
        if let MuRule::Theta(th) = self.mu {
            if !(th > 0.0 && th < 2.0 / 3.0) {
                return Err(Error::Config(format!("theta = {th} must lie in (0, 2/3)")));
            }
        }
        let hs = self.h_values();
        if hs.is_empty() || hs.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
            return Err(Error::Config("h values must lie in (0, 1)".into()));
        }
        for (h, mu) in self.points() {
            let m = mu.to_f64();
            if m == 0.0 || m.abs() > 1.0 {
                return Err(Error::Config(format!("mu = {m} must satisfy 0 < |mu| <= 1")));
            }
            let floor = h.powf(2.0 / 3.0 - self.eps);
            if m.abs() < floor {
                return Err(Error::Config(format!(
                    "|mu| = {m:.4e} < h^(2/3-eps) = {floor:.4e} at h = {h:.4e}: outside the admissible regime"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub models: usize,
    pub order: usize,
    pub seed: u64,
    pub dims: Vec<usize>,
    /// Models (from the front of the suite) that also get the perturbation checks.
    pub perturb_models: usize,
    /// Responses are tested up to this total order k + j.
    pub perturb_order: usize,
    pub im_samples: usize,
    pub delta: f64,
    /// Overwrite one amplitude after solving (negative control).
    pub corrupt: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            models: 20,
            order: 8,
            seed: 0,
            dims: vec![2, 3],
            perturb_models: 3,
            perturb_order: 6,
            im_samples: 10_000,
            delta: 0.05,
            corrupt: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.sweep.validate(self.model.order)?;
        if self.grids.modes < 2 {
            return Err(Error::Config("grids.modes must be at least 2".into()));
        }
        if self.verify.order < 2 || self.verify.dims.iter().any(|d| !(2..=3).contains(d)) || self.verify.dims.is_empty() {
            return Err(Error::Config("verify.order >= 2 and verify.dims within {2, 3} required".into()));
        }
        Ok(())
    }
}
