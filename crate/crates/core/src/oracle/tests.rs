use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::eikonal::{solve_eikonal, ModelSpec};
use crate::quantize::{bump, TorusGrid};
use crate::symring::{parse_expr, rho_value, ComplexRational, Rat, C64};
use crate::transport::{loglog_slope, solve_transport};

/// (z, Ai′(z)/Ai(z)) at 40 digits.
const LOG_DERIV: [(f64, f64, f64, f64); 22] = [
    (0.5, 0.2, -0.973539893899446, -0.08830569908708669),
    (-1.0, 1.0, -0.34640489512912387, -0.7858452312815739),
    (0.0, 2.9, -1.2154234416934462, -1.1121201522239033),
    (3.1, 0.0, -1.8339247775088454, 0.0),
    (0.0, 3.1, -1.2543070386635828, -1.1591162780890008),
    (-3.05, 0.5, -0.39660816137926497, -1.319671880030083),
    (5.0, -4.0, -2.4183467843924937, 0.8146315697200496),
    (0.0, 6.0, -1.7335029700523648, -1.6891580369277956),
    (-6.0, 2.0, -0.36454660950346873, -2.4710892785823164),
    (-7.0, -0.5, -0.41630394025674755, 2.796200631456888),
    (8.9, 1.0, -3.0151207705568863, -0.16438606478934106),
    (9.1, 1.0, -3.0477366966504746, -0.1626703120389403),
    (-8.95, 0.3, 0.5551894999113983, -4.003066345592755),
    (-9.05, 0.3, -0.2514722258907278, -4.167212293019708),
    (-2.3540044690213833, 3.2339856152783604, -0.865718212355901, -1.7277010561342563),
    (-5.998221273582631, -3.608509602750249, -0.6759044497590297, 2.531277767993739),
    (15.0, -3.0, -3.9079893822620133, 0.3822677974026337),
    (-20.0, 1.0, -0.10043057297956967, -4.473241720538872),
    (0.0, 50.0, -5.000006287672639, -4.994993750174791),
    (-100.0, -40.0, -1.9604053805387134, 10.189901566168984),
    (-100.9692209199715, -172.64187332977474, -7.036086042574884, 12.266137650441781),
    (5.970852574700723, 10.409078707128202, -3.0082024228558675, -1.7183456823706589),
];

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

#[test]
fn airy_log_derivative_matches_reference() {
    for (x, y, re, im) in LOG_DERIV {
        let r = airy_log_derivative(C64::new(x, y)).unwrap();
        let want = C64::new(re, im);
        assert!((r - want).norm() <= 1e-12 * want.norm(), "z = {x}+{y}i: {r} vs {want}");
    }
}

#[test]
fn airy_series_values() {
    // Ai(1), Ai′(1), Ai(−2+i) at 20 digits.
    let (a, d) = airy_series(one());
    assert!((a.re - 0.135_292_416_312_881_4).abs() < 1e-15 && a.im == 0.0);
    assert!((d.re + 0.159_147_441_296_793_2).abs() < 1e-15);
    let (a, _) = airy_series(C64::new(0.0, 0.0));
    assert!((a.re - 0.355_028_053_887_817_2).abs() < 1e-16);
}

#[test]
fn regime_switches_are_continuous() {
    for i in 0..48 {
        let th = -std::f64::consts::PI + (i as f64 + 0.5) * std::f64::consts::TAU / 48.0;
        for r in [3.0, 9.0] {
            let lo = airy_log_derivative(C64::from_polar(r * (1.0 - 1e-14), th)).unwrap();
            let hi = airy_log_derivative(C64::from_polar(r * (1.0 + 1e-14), th)).unwrap();
            assert!((lo - hi).norm() <= 1e-11 * lo.norm().max(1.0), "r={r} th={th}: {lo} vs {hi}");
        }
    }
}

#[test]
fn airy_dn_tends_to_rho_with_first_correction() {
    let (eta, mu) = (0.0, 0.5);
    let c = one();
    let rho = rho_value(eta, mu).unwrap();
    let mut pts = Vec::new();
    for p in 5..=11 {
        let h = 0.5f64.powi(p);
        let dn = airy_dn(eta, mu, c, h).unwrap();
        let first = rho - C64::new(0.0, h) * c / (4.0 * rho * rho);
        pts.push((h, (dn - first).norm()));
    }
    let slope = loglog_slope(&pts);
    assert!((slope - 2.0).abs() <= 0.2, "{slope} {pts:?}");
    let tiny = airy_dn(eta, mu, c, 1e-7).unwrap();
    assert!((tiny - rho).norm() < 1e-6);
}

#[test]
fn airy_dn_conjugation_symmetry() {
    for &c in &[1.0, -1.0, 2.5, -0.7] {
        for &(eta, mu, h) in &[(0.3, 0.4, 0.01), (-0.8, 0.2, 0.003), (1.5, 1.0, 0.05)] {
            let a = airy_dn(eta, mu, C64::new(c, 0.0), h).unwrap();
            let b = airy_dn(eta, -mu, C64::new(c, 0.0), h).unwrap();
            assert!((a + b.conj()).norm() < 1e-12 * a.norm(), "c={c}: {a} {b}");
        }
    }
    assert!(airy_dn(0.0, 0.0, one(), 0.01).is_err());
    assert!(airy_dn(0.0, 0.3, C64::new(0.0, 0.0), 0.01).is_err());
}

#[test]
fn free_mode_examples() {
    let dn = mode_dn(&ModeODEProblem::free(0.0, 1.0, 0.01)).unwrap();
    assert!((dn - C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)).norm() < 1e-6);
    let dn = mode_dn(&ModeODEProblem::free(0.5, 1.0, 0.01)).unwrap();
    assert!((dn - C64::new(-0.5, 1.0).sqrt()).norm() < 1e-6);
    let sol = solve_mode_ode(&ModeODEProblem::free(0.0, 1.0, 0.05), C64::new(2.0, 1.0)).unwrap();
    let rho = rho_value(0.0, 1.0).unwrap();
    assert!((sol.dn_value - rho * C64::new(2.0, 1.0)).norm() < 1e-6);
    assert!((sol.u[0] - C64::new(2.0, 1.0)).norm() < 1e-14);
    assert_eq!(*sol.u.last().unwrap(), C64::new(0.0, 0.0));
    for (t, u) in sol.t.iter().zip(&sol.u).step_by(37) {
        if *t < 0.5 {
            let exact = C64::new(2.0, 1.0) * (C64::i() * rho * *t / 0.05).exp();
            assert!((u - exact).norm() < 1e-5, "t = {t}");
        }
    }
}

#[test]
fn mode_ode_rejects_bad_problems() {
    assert!(mode_dn(&ModeODEProblem::free(0.0, 0.0, 0.01)).is_err());
    assert!(mode_dn(&ModeODEProblem::free(0.0, 0.3, 0.01).with_beta(0.5)).is_err());
    let shifted = ModeODEProblem::new(0.0, 0.3, 0.01, std::sync::Arc::new(|t| C64::new(1.0 + t, 0.0)));
    assert!(mode_dn(&shifted).is_err());
    let p = ModeODEProblem::free(0.0, 0.3, 0.01);
    let mut coarse = design_grid(&p);
    coarse.a *= 100.0;
    assert!(solve_mode_ode_on(&p, coarse, one()).is_err());
}

/// ∫₀¹ Im √(−(η₁ − iμ + ct)) dt / h, the WKB decay exponent over the unit interval.
fn decay_exponent(eta: f64, mu: f64, c: f64, h: f64) -> f64 {
    let n = 2000;
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) / n as f64;
            let r = (-C64::new(eta + c * t, -mu)).sqrt();
            r.im.abs() / (n as f64 * h)
        })
        .sum()
}

fn cross_sample(count: usize, seed: u64) -> Vec<(f64, f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let eta = rng.gen_range(-2.0..2.0);
        let mu = rng.gen_range(0.05..1.0) * if rng.gen_bool(0.2) { -1.0 } else { 1.0 };
        let h = 0.5f64.powi(rng.gen_range(4..11));
        let c = rng.gen_range(0.3..2.0);
        // Keep points where the unit interval already holds e^{−30} of decay.
        if decay_exponent(eta, mu, c, h) > 30.0 {
            out.push((eta, mu, h, c));
        }
    }
    out
}

#[test]
fn cross_oracle_agreement() {
    for (eta, mu, h, c) in cross_sample(20, 2024) {
        let a = airy_dn(eta, mu, C64::new(c, 0.0), h).unwrap();
        let o = mode_dn(&ModeODEProblem::airy(eta, mu, h, C64::new(c, 0.0))).unwrap();
        assert!((a - o).norm() <= 1e-8, "eta={eta} mu={mu} h={h} c={c}: {a} vs {o}");
    }
}

#[test]
fn grid_halving_and_t_extension() {
    for (eta, mu, h, c) in cross_sample(10, 77).into_iter().chain([(-1.5, 0.3, 1.0 / 32.0, 1.0)]) {
        let p = ModeODEProblem::airy(eta, mu, h, C64::new(c, 0.0));
        let g = design_grid(&p);
        let base = solve_mode_ode_on(&p, g, one()).unwrap().dn_value;
        let fine = solve_mode_ode_on(&p, g.refined(), one()).unwrap().dn_value;
        assert!((base - fine).norm() <= 1e-8, "halving at {eta} {mu} {h}: {}", (base - fine).norm());
        let long = mode_dn(&p.clone().with_t_max(2.0)).unwrap();
        let rho = rho_value(eta, mu).unwrap();
        let allowed = 10.0 * (-rho.im / (2.0 * h)).exp();
        assert!((long - base).norm() <= allowed.max(1e-8), "T-extension at {eta} {mu} {h}");
    }
}

#[test]
fn mode_adjoint_symmetry() {
    let model = |mu: Rat| {
        let ctx = crate::symring::Ctx::new(2, mu.clone()).unwrap();
        let mut e = std::collections::BTreeMap::new();
        e.insert((1, 0), parse_expr(&ctx, "3/4 - 1/5*rho^2").unwrap());
        e.insert((2, 0), parse_expr(&ctx, "1/2").unwrap());
        ModelSpec::new(&ctx, 2, e).unwrap()
    };
    let (plus, minus) = (model(Rat::new(2, 5)), model(Rat::new(-2, 5)));
    for &eta in &[-0.7, 0.0, 0.4, 1.2] {
        for &h in &[1.0 / 32.0, 1.0 / 128.0] {
            let a = mode_dn(&ModeODEProblem::from_model(&plus, &[eta], h).unwrap()).unwrap();
            let b = mode_dn(&ModeODEProblem::from_model(&minus, &[eta], h).unwrap()).unwrap();
            assert!((a + b.conj()).norm() <= 1e-8 * a.norm(), "{eta} {h}: {a} {b}");
        }
    }
}

#[test]
fn model_profile_reads_the_table() {
    let m = ModelSpec::airy(2, Rat::new(3, 10), ComplexRational::from_int(2), 3).unwrap();
    let p = model_profile(&m, &[0.4], 0.1).unwrap();
    assert!((p.eval(0.5) - C64::new(1.0, 0.0)).norm() < 1e-15);
    assert_eq!(airy_coefficient(&m), Some(C64::new(2.0, 0.0)));
    let z = ModelSpec::zero(2, Rat::new(3, 10), 3).unwrap();
    assert_eq!(airy_coefficient(&z), None);
}

#[test]
fn block_matches_modes_for_y_independent_model() {
    let model = ModelSpec::airy(2, Rat::new(1, 2), ComplexRational::from_int(1), 2).unwrap();
    let grid = TorusGrid::new(1, 16, 0.5).unwrap();
    let dn = dn_matrix_2d(&model, &grid, &BvpOptions::default()).unwrap();
    for i in 0..grid.len() {
        let eta = grid.frequency(i);
        let single = mode_dn(&ModeODEProblem::from_model(&model, &eta, grid.h()).unwrap()).unwrap();
        assert!((dn.matrix[(i, i)] - single).norm() <= 1e-8 * single.norm(), "mode {i}");
        for j in 0..grid.len() {
            if j != i {
                assert!(dn.matrix[(i, j)].norm() < 1e-14);
            }
        }
    }
}

#[test]
fn block_free_model_is_rho_multiplier() {
    // On [0, T] with u(T) = 0 the free DN symbol is ϱ·coth(−iϱT/h), which tends to ϱ.
    let mu = 0.5;
    let model = ModelSpec::zero(2, Rat::new(1, 2), 2).unwrap();
    let grid = TorusGrid::new(1, 16, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f: Vec<C64> = (0..16).map(|_| C64::new(rng.gen(), rng.gen())).collect();
    let out = solve_bvp_2d(&model, &f, &grid, 0).unwrap();
    let sym = |e: &[f64]| {
        let r = rho_value(e[0], mu).unwrap();
        let x = C64::new(0.0, -1.0) * r / grid.h();
        r * x.cosh() / x.sinh()
    };
    let want = crate::quantize::op_apply(&grid, &crate::quantize::Symbol::multiplier(sym), &f).unwrap();
    for (a, b) in out.iter().zip(&want) {
        assert!((a - b).norm() < 1e-8 * b.norm().max(1.0), "{a} {b}");
    }
    let free = mode_dn(&ModeODEProblem::free(-1.0, mu, 0.01)).unwrap();
    assert!((free - rho_value(-1.0, mu).unwrap()).norm() < 1e-6);
}

#[test]
fn block_adjoint_symmetry_with_cosine_coupling() {
    let grid = TorusGrid::new(1, 16, 0.5).unwrap();
    let c0 = C64::new(1.0, 0.0);
    let c1 = C64::new(0.4, 0.0);
    let a = dn_matrix_block(&BlockModel::airy_cosine(0.3, c0, c1), &grid, &BvpOptions::default()).unwrap();
    let b = dn_matrix_block(&BlockModel::airy_cosine(-0.3, c0, c1), &grid, &BvpOptions::default()).unwrap();
    let sum: DMatrix<C64> = &a.matrix + b.matrix.adjoint();
    let rel = sum.norm() / a.matrix.norm();
    assert!(rel <= 1e-8, "{rel}");
    // The coupling is genuinely off-diagonal.
    assert!(a.matrix[(1, 0)].norm() > 1e-4);
}

#[test]
fn solve_bvp_agrees_with_matrix() {
    let grid = TorusGrid::new(1, 16, 0.5).unwrap();
    let model = BlockModel::airy_cosine(0.3, one(), C64::new(0.4, 0.1));
    let dn = dn_matrix_block(&model, &grid, &BvpOptions::default()).unwrap();
    let f = grid.plane_wave(&[2]);
    let out = solve_bvp_block(&model, &f, &grid, 0).unwrap();
    let col = dn.matrix.column(grid.index_of(&[2]).unwrap()).iter().copied().collect::<Vec<_>>();
    let want = grid.inverse(&col).unwrap();
    for (a, b) in out.iter().zip(&want) {
        assert!((a - b).norm() < 1e-10);
    }
}

#[test]
fn norm_estimates() {
    let id = MatrixOperator(DMatrix::identity(12, 12));
    let e = op_norm_estimate(&id, 50, 1).unwrap();
    assert!((e.value - 1.0).abs() < 1e-10 && e.converged);

    let grid = TorusGrid::new(1, 64, 0.125).unwrap();
    let vals: Vec<C64> = grid.frequencies().iter().map(|e| rho_value(e[0], 0.3).unwrap()).collect();
    let want = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let e = op_norm_estimate(&DiagonalOperator(vals), 50, 1).unwrap();
    assert!((e.value - want).abs() < 1e-14);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = DMatrix::from_fn(20, 20, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let sv = m.clone().singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    let e = op_norm_estimate(&MatrixOperator(m), 50, 7).unwrap();
    assert!((e.value - top).abs() <= 0.05 * top, "{} vs {top}", e.value);
    assert!(e.value <= top * (1.0 + 1e-12));

    let f = FnOperator { len: 4, apply: |x: &[C64]| Ok(x.iter().map(|z| z * 3.0).collect()), adjoint: |x: &[C64]| Ok(x.iter().map(|z| z * 3.0).collect()) };
    assert!((op_norm_estimate(&f, 20, 0).unwrap().value - 3.0).abs() < 1e-12);
}

#[test]
fn leading_dn_error_decays_with_h() {
    let model = ModelSpec::airy(2, Rat::new(3, 10), ComplexRational::from_int(1), 2).unwrap();
    let amps = solve_transport(&solve_eikonal(&model).unwrap()).unwrap();
    let mut prev = f64::INFINITY;
    for p in [5, 6, 7] {
        let grid = TorusGrid::covering(1, 64, 0.5f64.powi(p)).unwrap();
        let vals = oracle_dn_values(&model, &grid, ModeOracle::Airy(one())).unwrap();
        let m = measure_diagonal(&amps, 0, 0, &grid, &vals).unwrap();
        assert!(m.error_norm > 0.0 && m.error_norm < prev, "{m:?}");
        assert!(m.bound_value > 0.0);
        prev = m.error_norm;
    }
}

#[test]
fn ode_and_airy_measurements_agree() {
    let model = ModelSpec::airy(2, Rat::new(1, 2), ComplexRational::from_int(1), 3).unwrap();
    let amps = solve_transport(&solve_eikonal(&model).unwrap()).unwrap();
    let grid = TorusGrid::covering(1, 32, 1.0 / 64.0).unwrap();
    let a = oracle_dn_values(&model, &grid, ModeOracle::Airy(one())).unwrap();
    let o = oracle_dn_values(&model, &grid, ModeOracle::Ode).unwrap();
    for (i, (x, y)) in a.iter().zip(&o).enumerate() {
        assert_eq!(x.is_some(), bump(grid.frequency(i)[0]) > 0.0);
        if let (Some(x), Some(y)) = (x, y) {
            assert!((x - y).norm() < 1e-6, "{i}: {x} {y}");
        }
    }
    let ma = measure_diagonal(&amps, 1, 2, &grid, &a).unwrap();
    let mo = measure_diagonal(&amps, 1, 2, &grid, &o).unwrap();
    assert!((ma.error_norm - mo.error_norm).abs() < 1e-6 * ma.error_norm.max(1.0));

    let blk = dn_matrix_2d(&model, &TorusGrid::new(1, 16, 0.5).unwrap(), &BvpOptions::default()).unwrap();
    let g16 = TorusGrid::new(1, 16, 0.5).unwrap();
    let mb = measure_block(&amps, 1, 0, &g16, &blk.matrix, 1).unwrap();
    let vals16 = oracle_dn_values(&model, &g16, ModeOracle::Ode).unwrap();
    let md = measure_diagonal(&amps, 1, 0, &g16, &vals16).unwrap();
    assert!((mb.error_norm - md.error_norm).abs() < 1e-6 * md.error_norm, "{mb:?} {md:?}");
    assert!(measure_diagonal(&amps, 0, 3, &grid, &a).is_err());
}
