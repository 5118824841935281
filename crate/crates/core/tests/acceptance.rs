//! Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed here.
//! Runs as a plain binary (`harness = false`) so the lines come out in order.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use glancing::eikonal::{check_im_phase_template, solve_eikonal, ModelSpec};
use glancing::oracle::{
    airy_dn, design_grid, dn_matrix_block, mode_dn, solve_mode_ode_on, BlockModel, BvpOptions, ModeODEProblem,
};
use glancing::quantize::{parametrix_residual_norm, CutoffSpec, TorusGrid};
use glancing::reduction::{manifold_dn_symbol, BoundaryConfig};
use glancing::sweep::{
    fit_scaling, run_sweep, verify_exact, verify_grading, verify_perturbations, verify_suite, ExperimentConfig,
    VerifyConfig,
};
use glancing::symring::{parse_expr, rho_value, ComplexRational, Rat, SymExpr, C64};
use glancing::transport::{loglog_slope, solve_transport};

const EXACT_BUDGET_S: f64 = 60.0;
const SWEEP_BUDGET_S: f64 = 600.0;
const IM_SAMPLES: usize = 10_000;
const IM_DELTA: f64 = 0.05;
const PERTURB_TOTAL: usize = 6;
const AIRY_DN_SLOPE: (f64, f64) = (2.0, 0.2);
const SLOPE_S0: (f64, f64) = (1.0, 0.3);
const SLOPE_S1: (f64, f64) = (2.0, 0.4);
const COUPLED_SPREAD: f64 = 3.0;
const RESIDUAL_EPS: f64 = 0.1;
const RESIDUAL_DELTA: f64 = 0.05;
const RESIDUAL_M: usize = 8;
const ORACLE_TOL: f64 = 1e-8;

type Outcome = Result<(bool, String), String>;

fn suite_cfg() -> VerifyConfig {
    VerifyConfig { models: 20, order: 8, perturb_models: 0, im_samples: 0, ..Default::default() }
}

/// Criterion 1 is timed over the residual and membership checks alone; the
/// grading pass for criterion 2 reuses the solved jets.
fn exact_suite() -> Result<(Outcome, Outcome), String> {
    let cfg = suite_cfg();
    let mut models: Vec<(String, ModelSpec)> = vec![(
        "zero model".into(),
        ModelSpec::zero(2, Rat::new(1, 2), cfg.order).map_err(|e| e.to_string())?,
    )];
    for (name, tpl, mu) in verify_suite(&cfg) {
        models.push((name, tpl.instantiate(mu).map_err(|e| e.to_string())?));
    }
    let t = Instant::now();
    let mut solved = Vec::new();
    let mut checks = Vec::new();
    for (name, model) in &models {
        let (c, jets) = verify_exact(name, model, false).map_err(|e| e.to_string())?;
        checks.extend(c);
        solved.push((name, jets));
    }
    let secs = t.elapsed().as_secs_f64();
    let mut ok1 = secs <= EXACT_BUDGET_S;
    let mut detail1 = format!("{secs:.1} s (budget {EXACT_BUDGET_S} s)");
    for check in ["eikonal-residual", "transport-residual", "am-membership"] {
        let sel: Vec<_> = checks.iter().filter(|c| c.check == check).collect();
        let p = sel.iter().filter(|c| c.passed).count();
        ok1 &= p == sel.len() && p == models.len();
        detail1.push_str(&format!(", {check} {p}/{}", sel.len()));
    }
    if let Some(c) = checks.iter().find(|c| !c.passed) {
        detail1.push_str(&format!("; first failure {} on {}: {}", c.check, c.model, c.detail));
    }

    let mut grading = Vec::new();
    for (name, jets) in &solved {
        grading.push(verify_grading(name, jets).map_err(|e| e.to_string())?);
    }
    let p = grading.iter().filter(|c| c.passed).count();
    let mut detail2 = format!("grading {p}/{} models", grading.len());
    if let Some(c) = grading.iter().find(|c| !c.passed) {
        detail2.push_str(&format!("; first violation on {}: {}", c.model, c.detail));
    }
    Ok((Ok((ok1, detail1)), Ok((p == grading.len(), detail2))))
}

fn criterion3() -> Outcome {
    let cfg = suite_cfg();
    let mut passed = 0;
    let mut total = 0;
    let mut first = None;
    for (name, tpl, mu) in verify_suite(&cfg).into_iter().take(3) {
        let model = tpl.instantiate(mu).map_err(|e| e.to_string())?;
        for c in verify_perturbations(&name, &model, PERTURB_TOTAL).map_err(|e| e.to_string())? {
            total += 1;
            if c.passed {
                passed += 1;
            } else if first.is_none() {
                first = Some(format!("{} on {}: {}", c.check, c.model, c.detail));
            }
        }
    }
    let detail = format!("{passed}/{total} exact responses up to total order {PERTURB_TOTAL} on 3 models");
    Ok((passed == total, first.map_or(detail.clone(), |f| format!("{detail}; {f}"))))
}

fn binom(a: &Rat, n: usize) -> Rat {
    let mut r = Rat::one();
    for i in 0..n {
        r = &(&r * &(a - &Rat::from_int(i as i64))) * &Rat::new(1, i as i64 + 1);
    }
    r
}

/// Coefficient of t^k in ∫₀^t √(ϱ² − cσ) dσ.
fn wkb_phase(ctx_model: &ModelSpec, c: &ComplexRational, k: usize) -> SymExpr {
    let n = k - 1;
    let coef = c
        .scale(&Rat::from_int(-1))
        .pow(n as i32)
        .unwrap()
        .scale(&binom(&Rat::new(1, 2), n))
        .scale(&Rat::new(1, k as i64));
    SymExpr::rho_pow(ctx_model.ctx(), 1 - 2 * n as i32, coef)
}

/// Coefficient of t^k in (1 − ct/ϱ²)^{−1/4}, the classical WKB amplitude.
fn wkb_amplitude(model: &ModelSpec, c: &ComplexRational, k: usize) -> SymExpr {
    let coef = c.scale(&Rat::from_int(-1)).pow(k as i32).unwrap().scale(&binom(&Rat::new(-1, 4), k));
    SymExpr::rho_pow(model.ctx(), -2 * k as i32, coef)
}

fn criterion4() -> Outcome {
    let mut mismatches = Vec::new();
    for c in [ComplexRational::one(), ComplexRational::ratio(-3, 2), ComplexRational::new(Rat::new(1, 2), Rat::new(2, 3))] {
        let model = ModelSpec::airy(2, Rat::new(1, 2), c.clone(), 8).map_err(|e| e.to_string())?;
        let phase = solve_eikonal(&model).map_err(|e| e.to_string())?;
        let amps = solve_transport(&phase).map_err(|e| e.to_string())?;
        for k in 1..=8 {
            if phase.phi(k) != wkb_phase(&model, &c, k) {
                mismatches.push(format!("phi_{k} at c = {c}"));
            }
        }
        if amps.a(1, 0) != wkb_amplitude(&model, &c, 1) {
            mismatches.push(format!("a_1,0 at c = {c}"));
        }
    }
    // The stated closed forms at c = 1.
    let model = ModelSpec::airy(2, Rat::new(1, 2), ComplexRational::one(), 4).map_err(|e| e.to_string())?;
    let phase = solve_eikonal(&model).map_err(|e| e.to_string())?;
    let amps = solve_transport(&phase).map_err(|e| e.to_string())?;
    let ctx = model.ctx();
    let closed = [
        (phase.phi(2), "-1/4*rho^-1"),
        (phase.phi(3), "-1/24*rho^-3"),
        (amps.a(1, 0), "1/4*rho^-2"),
    ];
    for (got, want) in closed {
        if got != parse_expr(ctx, want).map_err(|e| e.to_string())? {
            mismatches.push(format!("closed form {want}"));
        }
    }

    let (eta, mu, c) = (0.0, 0.5, C64::new(1.0, 0.0));
    let rho = rho_value(eta, mu).map_err(|e| e.to_string())?;
    let mut pts = Vec::new();
    for p in 5..=11 {
        let h = 0.5f64.powi(p);
        let dn = airy_dn(eta, mu, c, h).map_err(|e| e.to_string())?;
        pts.push((h, (dn - (rho - C64::new(0.0, h) * c / (4.0 * rho * rho))).norm()));
    }
    let slope = loglog_slope(&pts);
    let ok = mismatches.is_empty() && (slope - AIRY_DN_SLOPE.0).abs() <= AIRY_DN_SLOPE.1;
    Ok((
        ok,
        format!(
            "symbolic mismatches {:?}; airy_dn remainder slope {slope:.4} (want {} +/- {})",
            mismatches, AIRY_DN_SLOPE.0, AIRY_DN_SLOPE.1
        ),
    ))
}

fn criterion5() -> Outcome {
    let cfg = suite_cfg();
    let suite = verify_suite(&cfg);
    let per = IM_SAMPLES / suite.len();
    let (mut samples, mut violations) = (0, 0);
    for (i, (_, tpl, _)) in suite.iter().enumerate() {
        let r = check_im_phase_template(tpl, IM_DELTA, per, 2, i as u64).map_err(|e| e.to_string())?;
        samples += r.samples;
        violations += r.violations;
    }
    Ok((violations == 0 && samples >= IM_SAMPLES, format!("{violations} violations in {samples} samples, delta = {IM_DELTA}")))
}

const AIRY_FIXED: &str = r#"
[model]
d = 2
order = 4
m = { "1,0" = "1" }
[grids]
modes = 256
[sweep]
s = [0, 1]
k = [0]
h_exp = [5, 11]
mu = { fixed = 0.3 }
"#;

fn criterion6() -> Outcome {
    let t = Instant::now();
    let fixed = ExperimentConfig::from_toml_str(AIRY_FIXED).map_err(|e| e.to_string())?;
    let fit = fit_scaling(&run_sweep(&fixed).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let coupled = ExperimentConfig::from_toml_str(&AIRY_FIXED.replace("fixed = 0.3", "theta = 0.6"))
        .map_err(|e| e.to_string())?;
    let cfit = fit_scaling(&run_sweep(&coupled).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let s0 = fit.get(0, 0).and_then(|e| e.slope_h).unwrap_or(f64::NAN);
    let s1 = fit.get(1, 0).and_then(|e| e.slope_h).unwrap_or(f64::NAN);
    let spreads: Vec<f64> = cfit.entries.iter().map(|e| e.ratio_spread).collect();
    let ok = (s0 - SLOPE_S0.0).abs() <= SLOPE_S0.1
        && (s1 - SLOPE_S1.0).abs() <= SLOPE_S1.1
        && spreads.len() == 2
        && spreads.iter().all(|&r| r <= COUPLED_SPREAD)
        && secs <= SWEEP_BUDGET_S;
    Ok((
        ok,
        format!(
            "slope s=0 {s0:.4} (want {} +/- {}), s=1 {s1:.4} (want {} +/- {}), coupled ratio spread {spreads:.3?} (max {COUPLED_SPREAD}), {secs:.1} s",
            SLOPE_S0.0, SLOPE_S0.1, SLOPE_S1.0, SLOPE_S1.1
        ),
    ))
}

fn criterion7() -> Outcome {
    let model = ModelSpec::airy(2, Rat::new(3, 10), ComplexRational::one(), RESIDUAL_M).map_err(|e| e.to_string())?;
    let amps = solve_transport(&solve_eikonal(&model).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let spec = CutoffSpec::new(RESIDUAL_EPS, RESIDUAL_DELTA).map_err(|e| e.to_string())?;
    let mut pts = Vec::new();
    for p in 5..=11 {
        let h = 0.5f64.powi(p);
        let grid = TorusGrid::covering(1, 256, h).map_err(|e| e.to_string())?;
        pts.push((h, parametrix_residual_norm(&amps, &spec, &grid).map_err(|e| e.to_string())?));
    }
    let slope = loglog_slope(&pts);
    let floor = RESIDUAL_EPS * RESIDUAL_M as f64 / 2.0 - 0.5;
    let norms: Vec<String> = pts.iter().map(|(_, r)| format!("{r:.3e}")).collect();
    Ok((slope >= floor, format!("slope {slope:.4} (need >= {floor:.2}); norms {}", norms.join(" "))))
}

/// Points where the unit interval already carries e^{−30} of WKB decay.
fn cross_sample(count: usize, seed: u64) -> Vec<(f64, f64, f64, f64)> {
    let decay = |eta: f64, mu: f64, c: f64, h: f64| -> f64 {
        let n = 2000;
        (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) / n as f64;
                (-C64::new(eta + c * t, -mu)).sqrt().im.abs() / (n as f64 * h)
            })
            .sum()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let eta = rng.gen_range(-2.0..2.0);
        let mu = rng.gen_range(0.05..1.0) * if rng.gen_bool(0.2) { -1.0 } else { 1.0 };
        let h = 0.5f64.powi(rng.gen_range(4..11));
        let c = rng.gen_range(0.3..2.0);
        if decay(eta, mu, c, h) > 30.0 {
            out.push((eta, mu, h, c));
        }
    }
    out
}

fn criterion8() -> Outcome {
    let e = |x: glancing::Error| x.to_string();
    let mut cross: f64 = 0.0;
    for (eta, mu, h, c) in cross_sample(30, 8) {
        let a = airy_dn(eta, mu, C64::new(c, 0.0), h).map_err(e)?;
        let o = mode_dn(&ModeODEProblem::airy(eta, mu, h, C64::new(c, 0.0))).map_err(e)?;
        cross = cross.max((a - o).norm());
    }
    let (mut halving, mut extension_ok): (f64, bool) = (0.0, true);
    for (eta, mu, h, c) in cross_sample(10, 9) {
        let p = ModeODEProblem::airy(eta, mu, h, C64::new(c, 0.0));
        let g = design_grid(&p);
        let one = C64::new(1.0, 0.0);
        let base = solve_mode_ode_on(&p, g, one).map_err(e)?.dn_value;
        let fine = solve_mode_ode_on(&p, g.refined(), one).map_err(e)?.dn_value;
        halving = halving.max((base - fine).norm());
        let long = mode_dn(&p.clone().with_t_max(2.0)).map_err(e)?;
        let rho = rho_value(eta, mu).map_err(|x| x.to_string())?;
        let allowed = (10.0 * (-rho.im / (2.0 * h)).exp()).max(ORACLE_TOL);
        extension_ok &= (long - base).norm() <= allowed;
    }
    let model = |mu: Rat| -> Result<ModelSpec, String> {
        let ctx = glancing::symring::Ctx::new(2, mu).map_err(|x| x.to_string())?;
        let mut m = std::collections::BTreeMap::new();
        m.insert((1, 0), parse_expr(&ctx, "3/4 - 1/5*rho^2").map_err(|x| x.to_string())?);
        m.insert((2, 0), parse_expr(&ctx, "1/2").map_err(|x| x.to_string())?);
        ModelSpec::new(&ctx, 2, m).map_err(e)
    };
    let (plus, minus) = (model(Rat::new(2, 5))?, model(Rat::new(-2, 5))?);
    let mut adjoint: f64 = 0.0;
    for eta in [-0.7, 0.0, 0.4, 1.2] {
        for h in [1.0 / 32.0, 1.0 / 128.0] {
            let a = mode_dn(&ModeODEProblem::from_model(&plus, &[eta], h).map_err(e)?).map_err(e)?;
            let b = mode_dn(&ModeODEProblem::from_model(&minus, &[eta], h).map_err(e)?).map_err(e)?;
            adjoint = adjoint.max((a + b.conj()).norm() / a.norm());
        }
    }
    let grid = TorusGrid::new(1, 16, 0.5).map_err(e)?;
    let (c0, c1) = (C64::new(1.0, 0.0), C64::new(0.4, 0.0));
    let a = dn_matrix_block(&BlockModel::airy_cosine(0.3, c0, c1), &grid, &BvpOptions::default()).map_err(e)?;
    let b = dn_matrix_block(&BlockModel::airy_cosine(-0.3, c0, c1), &grid, &BvpOptions::default()).map_err(e)?;
    let sum: DMatrix<C64> = &a.matrix + b.matrix.adjoint();
    let block = sum.norm() / a.matrix.norm();
    let ok = cross <= ORACLE_TOL && halving <= ORACLE_TOL && extension_ok && adjoint <= ORACLE_TOL && block <= ORACLE_TOL;
    Ok((
        ok,
        format!(
            "cross-oracle {cross:.2e}, grid halving {halving:.2e}, T-extension {}, mode adjoint {adjoint:.2e}, block adjoint {block:.2e} (tol {ORACLE_TOL:.0e})",
            if extension_ok { "ok" } else { "FAILED" }
        ),
    ))
}

fn boundary(n: &[String]) -> BoundaryConfig {
    BoundaryConfig { d: 2, z: "1 + 3/10*i".into(), n: n.to_vec(), r: vec![], q_sharp: None, q_flat: vec![], v: vec![] }
}

fn criterion9() -> Outcome {
    let e = |x: glancing::Error| x.to_string();
    let z = ComplexRational::new(Rat::one(), Rat::new(3, 10));
    let m2i = ComplexRational::new(Rat::zero(), Rat::from_int(-2));
    let mut failures = Vec::new();
    let mut checked = 0;
    for (n0, sq) in [("1", 1i64), ("4", 2)] {
        let base: Vec<String> = [n0, "1/2", "1/3", "1/5", "1/7"].iter().map(|s| s.to_string()).collect();
        for s in 1..=2usize {
            let a = manifold_dn_symbol(&boundary(&base).build().map_err(e)?, 4, s).map_err(e)?;
            let ctx = a[0].ctx().clone();
            let mut pert = base.clone();
            pert[s] = format!("{} + 1/3", base[s]);
            let b = manifold_dn_symbol(&boundary(&pert).build().map_err(e)?, 4, s).map_err(e)?;
            let c_s = &ComplexRational::new(Rat::zero(), Rat::from_int(-1)) * &m2i.pow(-(s as i32) - 1).unwrap();
            let scale = Rat::from_int(sq).pow(-(s as i32) - 1).unwrap();
            let coeff = &(&c_s * &z) * &ComplexRational::from_rat(&Rat::new(1, 3) * &scale);
            let want = SymExpr::rho_pow(&ctx, -(s as i32) - 1, coeff);
            checked += 1;
            if a[..s] != b[..s] || &b[s] - &a[s] != want {
                failures.push(format!("n_{s} at n0 = {n0}"));
            }
            for l in (s + 1)..=4 {
                let mut pert = base.clone();
                pert[l] = format!("{} - 2", base[l]);
                checked += 1;
                if manifold_dn_symbol(&boundary(&pert).build().map_err(e)?, 4, s).map_err(e)? != a {
                    failures.push(format!("n_{l} changed the s = {s} symbol at n0 = {n0}"));
                }
            }
        }
    }
    Ok((failures.is_empty(), format!("{checked} exact comparisons, failures {failures:?}")))
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |n: usize, name: &str, o: Outcome| {
        let (ok, detail) = o.unwrap_or_else(|err| (false, format!("error: {err}")));
        all &= ok;
        println!("criterion {n}: {} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    };
    let (c1, c2) = exact_suite().unwrap_or_else(|e| (Err(e.clone()), Err(e)));
    report(1, "exact eikonal/transport residuals and membership", c1);
    report(2, "grading", c2);
    report(3, "perturbation structure", criterion3());
    report(4, "Airy closed forms and DN remainder", criterion4());
    report(5, "Im-phase bound", criterion5());
    report(6, "model-level DN scaling", criterion6());
    report(7, "parametrix residual decay", criterion7());
    report(8, "oracle integrity", criterion8());
    report(9, "independence from higher normal data", criterion9());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
