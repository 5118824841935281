use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::VerifyConfig;
use crate::eikonal::{
    check_im_phase_template, check_phase_grading, check_phase_perturbation, eikonal_residual, random_template,
    sample_mu, solve_eikonal, ModelSpec, ModelTemplate, PhaseJet,
};
use crate::error::Result;
use crate::residual::{assemble_am, verify_am_structure};
use crate::symring::{parse_expr, ComplexRational, JetSeries, Rat, SymExpr};
use crate::transport::{check_amp_grading, check_amp_structure, solve_transport, transport_residuals, AmplitudeJet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub model: String,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub seconds: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn count(&self, check: &str) -> (usize, usize) {
        let sel: Vec<_> = self.checks.iter().filter(|c| c.check == check).collect();
        (sel.iter().filter(|c| c.passed).count(), sel.len())
    }

    pub fn summary(&self) -> String {
        let mut names: Vec<&str> = self.checks.iter().map(|c| c.check.as_str()).collect();
        names.sort();
        names.dedup();
        let mut out = String::new();
        for n in names {
            let (p, t) = self.count(n);
            out.push_str(&format!("{n:<22} {p}/{t} passed\n"));
        }
        match self.first_failure() {
            None => out.push_str(&format!("all checks passed in {:.2} s\n", self.seconds)),
            Some(c) => out.push_str(&format!("FAILED {} on {}: {}\n", c.check, c.model, c.detail)),
        }
        out
    }
}

/// Coefficients with t-order below `below` that are nonzero.
fn nonzero_below(s: &JetSeries, below: u32) -> Vec<(u32, u32)> {
    s.iter().filter(|((t, _), c)| *t < below && !c.is_zero()).map(|(k, _)| *k).collect()
}

fn push(out: &mut Vec<CheckResult>, model: &str, check: &str, passed: bool, detail: String) {
    out.push(CheckResult { model: model.into(), check: check.into(), passed, detail });
}

/// Solved jets of one model.
pub struct SolvedJets {
    pub phase: PhaseJet,
    pub amps: AmplitudeJet,
}

/// Exact eikonal/transport residual and A_M membership checks on one model.
/// With `corrupt` set, a_{2,1} is overwritten after solving.
pub fn verify_exact(name: &str, model: &ModelSpec, corrupt: bool) -> Result<(Vec<CheckResult>, SolvedJets)> {
    let mut out = Vec::new();
    let m = model.order();
    let phase = solve_eikonal(model)?;
    let r = eikonal_residual(&phase)?;
    let bad = nonzero_below(&r, m as u32);
    push(&mut out, name, "eikonal-residual", bad.is_empty(), format!("nonzero (t, h) orders {bad:?}"));

    let mut amps = solve_transport(&phase)?;
    if corrupt && m >= 2 {
        let a = amps.a(2, 1);
        let replaced = if a.is_zero() { SymExpr::rho_pow(a.ctx(), -8, ComplexRational::one()) } else { a.scale_int(2) };
        amps.set(2, 1, replaced);
    }
    let rows = transport_residuals(&amps)?;
    let mut failures = Vec::new();
    for (j, row) in rows.iter().enumerate() {
        for (t, _) in nonzero_below(row, m as u32) {
            failures.push((t, j));
        }
    }
    push(
        &mut out,
        name,
        "transport-residual",
        failures.is_empty(),
        format!("nonzero (t-order, row j) {failures:?}"),
    );

    let rep = verify_am_structure(&assemble_am(&amps)?, m);
    push(&mut out, name, "am-membership", rep.pass(), format!("forbidden (t, h) coefficients {:?}", rep.nonzero));
    Ok((out, SolvedJets { phase, amps }))
}

/// ϱ-degree bounds on every φ_k and a_{k,j} and their η-derivatives.
pub fn verify_grading(name: &str, jets: &SolvedJets) -> Result<CheckResult> {
    let mut g = check_phase_grading(&jets.phase)?;
    g.merge(check_amp_grading(&jets.amps)?);
    let detail = g.violations.first().cloned().unwrap_or_default();
    Ok(CheckResult { model: name.into(), check: "grading".into(), passed: g.pass(), detail })
}

/// Exact residual, membership and grading checks on one model.
pub fn verify_model(name: &str, model: &ModelSpec, corrupt: bool) -> Result<Vec<CheckResult>> {
    let (mut out, jets) = verify_exact(name, model, corrupt)?;
    out.push(verify_grading(name, &jets)?);
    Ok(out)
}

/// Responses of φ and a_{k,j} to m_{K,0} perturbations for K ≤ `max_total`.
/// The model is re-truncated at M = max_total + 1 so that m_{K,0} is kept.
pub fn verify_perturbations(name: &str, model: &ModelSpec, max_total: usize) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let model = &model.with_order(max_total + 1)?;
    let delta = parse_expr(model.ctx(), "1/3 + y1 - 2*rho^2")?;
    let m = max_total;
    for k in 1..=m {
        let r = check_phase_perturbation(model, k, &delta)?;
        push(&mut out, name, "phase-perturbation", r.pass(), format!("K = {k}: {:?}", r.violations.first()));
    }
    for total in 1..=m {
        // One perturbation of m_{total,0} covers every (k, j) with k + j = total.
        let r = check_amp_structure(model, 1, total - 1, &delta)?;
        push(&mut out, name, "amp-perturbation", r.pass(), format!("k+j = {total}: {:?}", r.violations.first()));
    }
    Ok(out)
}

/// The seeded random models: (name, template, μ). Dimensions alternate over `cfg.dims`.
pub fn verify_suite(cfg: &VerifyConfig) -> Vec<(String, ModelTemplate, Rat)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.models)
        .map(|i| {
            let d = cfg.dims[i % cfg.dims.len()];
            let seed: u64 = rng.gen();
            let mu = sample_mu(&mut rng, 0.05, 1.0);
            (format!("model {i} (seed {seed}, d = {d})"), random_template(seed, d, cfg.order), mu)
        })
        .collect()
}

/// The full symbolic suite. Models are processed in parallel; results keep suite order.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let start = Instant::now();
    let models = verify_suite(cfg);
    let per_model = cfg.im_samples / cfg.models.max(1);
    let extra = cfg.im_samples % cfg.models.max(1);
    let results: Vec<Result<Vec<CheckResult>>> = models
        .par_iter()
        .enumerate()
        .map(|(i, (name, tpl, mu))| {
            let model = tpl.instantiate(mu.clone())?;
            let mut out = verify_model(name, &model, cfg.corrupt && i == 0)?;
            if i < cfg.perturb_models {
                out.extend(verify_perturbations(name, &model, cfg.perturb_order.max(1))?);
            }
            let n = per_model + usize::from(i < extra);
            if n > 0 {
                let r = check_im_phase_template(tpl, cfg.delta, n, 2, cfg.seed.wrapping_add(i as u64))?;
                let detail = format!("{} of {} samples violate Im phi >= t Im rho / 2", r.violations, r.samples);
                push(&mut out, name, "im-phase", r.violations == 0, detail);
            }
            Ok(out)
        })
        .collect();
    let mut zero = verify_model("zero model", &ModelSpec::zero(2, Rat::new(1, 2), cfg.order)?, false)?;
    let mut checks = Vec::new();
    checks.append(&mut zero);
    for r in results {
        checks.extend(r?);
    }
    Ok(VerifyReport { checks, seconds: start.elapsed().as_secs_f64() })
}
