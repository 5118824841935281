use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::eikonal::{solve_eikonal, ModelSpec};
use crate::symring::{rho_value, ComplexRational, Rat, C64};
use crate::transport::solve_transport;

fn random_fn(grid: &TorusGrid, seed: u64) -> GridFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..grid.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

/// Random function with modes |k| ≤ kmax only, so a shift by a few modes does not wrap.
fn band_limited(grid: &TorusGrid, seed: u64, kmax: i64) -> GridFn {
    let mut c = grid.forward(&random_fn(grid, seed)).unwrap();
    for (i, v) in c.iter_mut().enumerate() {
        if grid.wavevector(i).iter().any(|k| k.abs() > kmax) {
            *v = C64::new(0.0, 0.0);
        }
    }
    grid.inverse(&c).unwrap()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_abs(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[test]
fn window_guard() {
    assert!(TorusGrid::new(1, 256, 1.0 / 64.0).is_err());
    assert!(TorusGrid::new(1, 256, 1.0 / 32.0).is_ok());
    assert!(TorusGrid::new(1, 100, 1.0).is_err());
    assert!(TorusGrid::new(3, 16, 1.0).is_err());
    let g = TorusGrid::covering(1, 256, 1.0 / 256.0).unwrap();
    assert_eq!(g.n_modes(), 2048);
    assert_eq!(TorusGrid::covering(1, 256, 0.1).unwrap().n_modes(), 256);
}

#[test]
fn identity_symbol() {
    for dims in [1, 2] {
        let g = TorusGrid::new(dims, 32, 0.5).unwrap();
        let f = random_fn(&g, 3);
        let one = |_: &[f64]| C64::new(1.0, 0.0);
        let out = op_apply(&g, &Symbol::multiplier(one), &f).unwrap();
        assert!(max_diff(&out, &f) <= 1e-12 * max_abs(&f));
        let full = op_apply(&g, &Symbol::full(|_: &[f64], _: &[f64]| C64::new(1.0, 0.0)), &f).unwrap();
        assert!(max_diff(&full, &f) <= 1e-12 * max_abs(&f));
    }
}

#[test]
fn frequency_and_position_multipliers() {
    let g = TorusGrid::new(1, 64, 0.25).unwrap();
    let h = g.h();
    let k = 5;
    let wave = g.plane_wave(&[k]);
    let out = op_apply(&g, &Symbol::multiplier(|eta: &[f64]| C64::new(eta[0], 0.0)), &wave).unwrap();
    let want: GridFn = wave.iter().map(|w| w * (h * k as f64)).collect();
    assert!(max_diff(&out, &want) < 1e-12);

    let f = random_fn(&g, 9);
    let b = |y: &[f64]| C64::new(y[0].cos(), y[0].sin() * 0.5);
    let out = op_apply(&g, &Symbol::full(|y: &[f64], _: &[f64]| b(y)), &f).unwrap();
    let want: GridFn = f.iter().enumerate().map(|(i, v)| v * b(&g.node(i))).collect();
    assert!(max_diff(&out, &want) < 1e-11);
}

#[test]
fn adjoint_and_matrix_agree() {
    let g = TorusGrid::new(2, 8, 1.0).unwrap();
    let s = Symbol::full(|y: &[f64], eta: &[f64]| C64::new(1.0 + y[0].sin() * eta[1], eta[0] * y[1].cos()));
    let f = random_fn(&g, 1);
    let v = random_fn(&g, 2);
    let af = op_apply(&g, &s, &f).unwrap();
    let atv = op_apply_adjoint(&g, &s, &v).unwrap();
    let lhs: C64 = af.iter().zip(&v).map(|(a, b)| a * b.conj()).sum();
    let rhs: C64 = f.iter().zip(&atv).map(|(a, b)| a * b.conj()).sum();
    assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));

    let m = symbol_matrix(&g, &s).unwrap();
    let fhat = g.forward(&f).unwrap();
    let ghat = m * nalgebra::DVector::from_vec(fhat);
    let via = g.inverse(ghat.as_slice()).unwrap();
    assert!(max_diff(&via, &af) < 1e-11);
}

#[test]
fn support_guard() {
    let g = TorusGrid::new(1, 16, 0.5).unwrap();
    let f = random_fn(&g, 0);
    let s = Symbol::multiplier(|_: &[f64]| C64::new(1.0, 0.0)).supported_in(6.0);
    assert!(op_apply(&g, &s, &f).is_err());
}

#[test]
fn dump_round_trip() {
    let g = TorusGrid::new(2, 8, 1.0).unwrap();
    let f = random_fn(&g, 4);
    let mut buf = Vec::new();
    g.write_dump(&f, &mut buf).unwrap();
    let (g2, f2) = TorusGrid::read_dump(&mut &buf[..]).unwrap();
    assert_eq!(g, g2);
    assert_eq!(f, f2);
    assert!(TorusGrid::read_dump(&mut &b"garbage\n"[..]).is_err());
}

#[test]
fn bump_shape() {
    assert_eq!(bump(0.0), 1.0);
    assert_eq!(bump(-1.0), 1.0);
    assert_eq!(bump(2.0), 0.0);
    assert_eq!(bump(-3.5), 0.0);
    assert!((bump(1.5) - 0.5).abs() < 1e-15);
    let mut prev = 1.0;
    for i in 0..=100 {
        let v = bump(1.0 + i as f64 / 100.0);
        assert!(v <= prev && (0.0..=1.0).contains(&v));
        prev = v;
    }
}

#[test]
fn bump_jet_matches_differences() {
    for &s in &[1.1, 1.3, 1.5, 1.77, 1.95, -1.4] {
        let (v, d1, d2) = bump_jet(s);
        let e = 1e-5;
        let fd1 = (bump(s + e) - bump(s - e)) / (2.0 * e);
        let fd2 = (bump(s + e) - 2.0 * v + bump(s - e)) / (e * e);
        assert!((v - bump(s)).abs() < 1e-15);
        assert!((d1 - fd1).abs() < 1e-6 * (1.0 + d1.abs()), "{s}: {d1} vs {fd1}");
        assert!((d2 - fd2).abs() < 1e-3 * (1.0 + d2.abs()), "{s}: {d2} vs {fd2}");
    }
}

#[test]
fn cutoff_examples() {
    let spec = CutoffSpec::new(0.1, 0.05).unwrap();
    let (h, mu) = (0.01, 0.3);
    assert_eq!(cutoff_Phi(0.0, 0.2, h, mu, &spec).unwrap(), 1.0);
    let big = 2.0 * h.powf(0.1).max(0.05 * 0.2f64.hypot(mu));
    assert_eq!(cutoff_Phi(big, 0.2, h, mu, &spec).unwrap(), 0.0);
    let wide = CutoffSpec::new(0.5, 10.0).unwrap();
    assert_eq!(cutoff_Phi(h.powf(0.5) / 2.0, 0.0, h, mu, &wide).unwrap(), 1.0);
    assert!(cutoff_Phi(0.0, 0.0, h, 0.0, &spec).is_err());
    assert!(CutoffSpec::new(0.7, 1.0).is_err());
    assert!(CutoffSpec::new(0.3, 0.0).is_err());
    let t = 0.75 * spec.t_support(0.2, h, mu);
    let (p, p1, p2) = cutoff_jet(t, 0.2, h, mu, &spec).unwrap();
    let e = 1e-6;
    let f = |t| cutoff_Phi(t, 0.2, h, mu, &spec).unwrap();
    assert!((p - f(t)).abs() < 1e-15);
    assert!((p1 - (f(t + e) - f(t - e)) / (2.0 * e)).abs() < 1e-5 * (1.0 + p1.abs()));
    assert!((p2 - (f(t + e) - 2.0 * p + f(t - e)) / (e * e)).abs() < 1e-2 * (1.0 + p2.abs()));
}

fn jets(model: &ModelSpec) -> crate::transport::AmplitudeJet {
    solve_transport(&solve_eikonal(model).unwrap()).unwrap()
}

#[test]
fn parametrix_at_zero_is_bump_multiplier() {
    let model = ModelSpec::airy(3, Rat::new(3, 10), ComplexRational::from_int(1), 4).unwrap();
    let amps = jets(&model);
    let spec = CutoffSpec::new(0.1, 0.05).unwrap();
    let g = TorusGrid::new(2, 16, 0.5).unwrap();
    let f = random_fn(&g, 8);
    let u0 = evaluate_parametrix(&amps, &spec, &g, &f, 0.0).unwrap();
    let want = op_apply(&g, &Symbol::multiplier(|eta: &[f64]| C64::new(bump(eta[0]), 0.0)), &f).unwrap();
    assert!(max_diff(&u0, &want) <= 1e-12 * max_abs(&want));
}

#[test]
fn free_model_single_mode() {
    let mu = 0.3;
    let model = ModelSpec::zero(2, Rat::new(3, 10), 3).unwrap();
    let amps = jets(&model);
    let spec = CutoffSpec::new(0.1, 0.05).unwrap();
    let g = TorusGrid::new(1, 64, 1.0 / 8.0).unwrap();
    let h = g.h();
    let k = 6;
    let eta = h * k as f64;
    let rho = rho_value(eta, mu).unwrap();
    let wave = g.plane_wave(&[k]);
    let mut prev = f64::INFINITY;
    for i in 0..6 {
        let t = 0.002 * i as f64;
        let u = evaluate_parametrix(&amps, &spec, &g, &wave, t).unwrap();
        let factor = (C64::i() * rho * t / h).exp() * bump(eta) * cutoff_Phi(t, eta, h, mu, &spec).unwrap();
        let want: GridFn = wave.iter().map(|w| w * factor).collect();
        assert!(max_diff(&u, &want) < 1e-12);
        let n = g.l2_norm(&u);
        let decay = (-t * rho.im / h).exp() * g.l2_norm(&wave) * bump(eta);
        assert!((n - decay).abs() < 1e-12 * decay.max(1e-300));
        assert!(n <= prev);
        prev = n;
    }

    let dn = dn_symbol(&amps, 2, 3, &g).unwrap();
    let f = random_fn(&g, 5);
    let got = dn.apply(&g, &f).unwrap();
    let rho_sym = Symbol::multiplier(|e: &[f64]| rho_value(e[0], mu).unwrap().powi(4) * bump(e[0]));
    let want = op_apply(&g, &rho_sym, &f).unwrap();
    assert!(max_diff(&got, &want) <= 1e-10 * max_abs(&want));
}

#[test]
fn dn_symbol_airy_examples() {
    let mu = 0.3;
    let c = C64::new(1.0, 0.5);
    let model = ModelSpec::airy(2, Rat::new(3, 10), ComplexRational::new(Rat::one(), Rat::new(1, 2)), 3).unwrap();
    let amps = jets(&model);
    let g = TorusGrid::new(1, 32, 0.25).unwrap();
    let h = g.h();
    for (s, k) in [(0, 0), (1, 0), (1, 2)] {
        let dn = dn_symbol(&amps, s, k, &g).unwrap();
        assert!(dn.is_multiplier());
        let vals = dn.multiplier_values().unwrap();
        for (i, v) in vals.iter().enumerate() {
            let eta = g.frequency(i)[0];
            let r = rho_value(eta, mu).unwrap();
            let mut want = r.powi(k as i32 + 1);
            if s == 1 {
                want -= C64::i() * h * r.powi(k as i32) * c / (4.0 * r * r);
            }
            want *= bump(eta);
            assert!((v - want).norm() < 1e-12 * (1.0 + want.norm()), "s={s} k={k} eta={eta}");
        }
    }
    assert!(matches!(dn_symbol(&amps, 0, 3, &g), Err(crate::Error::Quantize(_))));
    assert!(dn_symbol(&amps, 1, 5, &g).is_ok());
    assert!(dn_symbol(&amps, 1, 6, &g).is_err());

    let exact = dn_symbol_exact(&amps, 1, 0).unwrap();
    assert_eq!(exact.len(), 2);
    let r = rho_value(0.4, mu).unwrap();
    let v0 = exact[0].compile().eval(r, &[0.0], &[]);
    let v1 = exact[1].compile().eval(r, &[0.0], &[]);
    assert!((v0 - r).norm() < 1e-14);
    assert!((v1 + C64::i() * c / (4.0 * r * r)).norm() < 1e-13);
}

#[test]
fn y_dependent_dn_symbol_matches_pointwise() {
    let tpl = crate::eikonal::random_template(7, 2, 3);
    let model = tpl.instantiate(Rat::new(1, 2)).unwrap();
    let amps = jets(&model);
    let g = TorusGrid::new(1, 16, 0.5).unwrap();
    let dn = dn_symbol(&amps, 2, 1, &g).unwrap();
    let f = g.plane_wave(&[3]);
    let out = dn.apply(&g, &f).unwrap();
    let idx = g.index_of(&[3]).unwrap();
    for node in 0..g.len() {
        let want = dn.value(node, idx) * f[node];
        assert!((out[node] - want).norm() < 1e-11);
    }
}

#[test]
fn free_model_residual_comes_from_the_cutoff_only() {
    // With m ≡ 0 the only residual is the t-cutoff term, damped by e^{−t Im ϱ/h}.
    let model = ModelSpec::zero(2, Rat::new(3, 10), 3).unwrap();
    let amps = jets(&model);
    let spec = CutoffSpec::new(0.1, 0.05).unwrap();
    let mut prev = f64::INFINITY;
    let mut vals = Vec::new();
    for p in [5, 7, 9, 11] {
        let g = TorusGrid::covering(1, 256, 0.5f64.powi(p)).unwrap();
        let r = parametrix_residual_norm(&amps, &spec, &g).unwrap();
        vals.push(r);
        assert!(r < prev, "{vals:?}");
        prev = r;
    }
    assert!(prev < 1e-3, "{vals:?}");
    let loose = CutoffSpec::new(0.1, 1e3).unwrap();
    let g = TorusGrid::covering(1, 256, 0.5f64.powi(7)).unwrap();
    let far = parametrix_residual_norm(&amps, &loose, &g).unwrap();
    assert!(far < 1e-6 && far < vals[1] * 1e-2, "{far} {vals:?}");
}

#[test]
fn composition_expansion_is_exact_for_polynomials() {
    let g = TorusGrid::new(1, 64, 0.125).unwrap();
    let f = band_limited(&g, 11, 8);
    let poly = |n: usize, e: f64| -> C64 {
        C64::new(
            match n {
                0 => 1.0 + e + e * e * e,
                1 => 1.0 + 3.0 * e * e,
                2 => 6.0 * e,
                3 => 6.0,
                _ => 0.0,
            },
            0.0,
        )
    };
    assert!(composition_defect(&g, &poly, 2, 3, &f).unwrap() < 1e-12);
    assert!(composition_defect(&g, &poly, 2, 1, &f).unwrap() > 1e-3);
}

#[test]
fn composition_defect_is_a_taylor_remainder() {
    let trig = |n: usize, e: f64| -> C64 {
        let phase = e + n as f64 * std::f64::consts::FRAC_PI_2;
        C64::new(phase.cos(), 0.0)
    };
    let m = 3;
    let mut pts = Vec::new();
    for p in 4..8 {
        let h = 0.5f64.powi(p);
        let g = TorusGrid::covering(1, 16, h).unwrap();
        let f = band_limited(&g, 12, 8);
        pts.push((h, composition_defect(&g, &trig, 1, m, &f).unwrap()));
    }
    let slope = crate::transport::loglog_slope(&pts);
    assert!((slope - (m as f64 + 1.0)).abs() < 0.3, "{slope} {pts:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn op_apply_is_linear(seed in 0u64..1000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = TorusGrid::new(1, 16, 0.5).unwrap();
        let s = Symbol::full(|y: &[f64], eta: &[f64]| C64::new(y[0].cos(), eta[0]));
        let f1 = random_fn(&g, seed);
        let f2 = random_fn(&g, seed + 7919);
        let comb: GridFn = f1.iter().zip(&f2).map(|(x, y)| x * a + y * b).collect();
        let lhs = op_apply(&g, &s, &comb).unwrap();
        let o1 = op_apply(&g, &s, &f1).unwrap();
        let o2 = op_apply(&g, &s, &f2).unwrap();
        let rhs: GridFn = o1.iter().zip(&o2).map(|(x, y)| x * a + y * b).collect();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-11);
    }

    #[test]
    fn full_and_multiplier_paths_agree(seed in 0u64..1000, w in 0.1f64..3.0) {
        let g = TorusGrid::new(2, 8, 1.0).unwrap();
        let f = random_fn(&g, seed);
        let sym = |eta: &[f64]| C64::new((w * eta[0]).sin(), eta[1] * eta[1]);
        let a = op_apply(&g, &Symbol::multiplier(sym), &f).unwrap();
        let b = op_apply(&g, &Symbol::full(|_: &[f64], eta: &[f64]| sym(eta)), &f).unwrap();
        prop_assert!(max_diff(&a, &b) < 1e-11);
    }

    #[test]
    fn forward_inverse_round_trip(seed in 0u64..1000) {
        let g = TorusGrid::new(2, 16, 0.5).unwrap();
        let f = random_fn(&g, seed);
        let back = g.inverse(&g.forward(&f).unwrap()).unwrap();
        prop_assert!(max_diff(&back, &f) < 1e-13);
    }
}
