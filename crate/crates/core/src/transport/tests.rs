use std::collections::BTreeMap;

use num::Complex;
use proptest::prelude::*;

use super::*;
use crate::eikonal::{random_template, solve_eikonal, ModelSpec, ModelTemplate};
use crate::symring::{parse_expr, rho_value, ComplexRational, Ctx, Rat, SymExpr};

fn airy(c: ComplexRational, m: usize) -> ModelSpec {
    ModelSpec::airy(2, Rat::new(1, 2), c, m).unwrap()
}

fn solve(m: &ModelSpec) -> AmplitudeJet {
    solve_transport(&solve_eikonal(m).unwrap()).unwrap()
}

#[test]
fn g_table_basics() {
    let m = random_template(4, 3, 4).instantiate(Rat::new(1, 3)).unwrap();
    let p = solve_eikonal(&m).unwrap();
    let g = GTable::build(&p, 3, 5).unwrap();
    let ctx = m.ctx();
    assert_eq!(g.get(0, &[0, 0]).unwrap().coeff(0, 0), SymExpr::one(ctx));
    assert!(g.get(1, &[0, 0]).is_none());
    for beta in [[1, 0], [0, 2], [1, 1], [2, 1]] {
        assert!(g.get(0, &beta).unwrap().is_zero());
    }
    let phi = p.series(5);
    assert_eq!(*g.get(1, &[1, 0]).unwrap(), phi.diff_y(1).unwrap());
    let d1 = phi.diff_y(1).unwrap();
    let d2 = phi.diff_y(2).unwrap();
    let half = ComplexRational::ratio(1, 2);
    assert_eq!(*g.get(2, &[1, 1]).unwrap(), d1.try_mul(&d2).unwrap().scale(&half));
    assert_eq!(*g.get(2, &[2, 0]).unwrap(), d1.try_mul(&d1).unwrap().scale(&half));
    for ((k, _), s) in g.iter() {
        assert!(s.iter().all(|((t, _), _)| t >= k));
    }
    assert_eq!(g.theta(1, 1, &[1, 0]), Some(p.phi(1).diff_y(1).unwrap()));
}

#[test]
fn g_table_matches_finite_differences() {
    let m = random_template(8, 3, 3).instantiate(Rat::new(1, 2)).unwrap();
    let p = solve_eikonal(&m).unwrap();
    let tt = 2 * 3 + 1;
    let g = GTable::build(&p, 2, tt).unwrap();
    let h: f64 = 0.1;
    let (t, eta1, tail): (f64, f64, [f64; 1]) = (0.3, 0.2, [0.1]);
    let rho = rho_value(eta1, 0.5).unwrap();
    let phis: Vec<_> = p.phis().iter().map(|e| e.compile()).collect();
    let phase_at = |y: &[f64]| -> Complex<f64> {
        let mut s = Complex::new(0.0, 0.0);
        for (k, c) in phis.iter().enumerate() {
            s += c.eval(rho, y, &tail) * t.powi(k as i32 + 1);
        }
        s
    };
    let ex = |y: &[f64]| -> Complex<f64> { (Complex::<f64>::i() * phase_at(y) / h).exp() };
    let y0 = [0.4, -0.3];
    let e = 1e-4;
    let shifted = |a: f64, b: f64| ex(&[y0[0] + a, y0[1] + b]);
    let fd: [(Vec<u32>, Complex<f64>); 5] = [
        (vec![1, 0], (shifted(e, 0.0) - shifted(-e, 0.0)) / (2.0 * e)),
        (vec![0, 1], (shifted(0.0, e) - shifted(0.0, -e)) / (2.0 * e)),
        (vec![2, 0], (shifted(e, 0.0) - 2.0 * ex(&y0) + shifted(-e, 0.0)) / (e * e)),
        (vec![0, 2], (shifted(0.0, e) - 2.0 * ex(&y0) + shifted(0.0, -e)) / (e * e)),
        (
            vec![1, 1],
            (shifted(e, e) - shifted(e, -e) - shifted(-e, e) + shifted(-e, -e)) / (4.0 * e * e),
        ),
    ];
    for (beta, d) in fd {
        let size: u32 = beta.iter().sum();
        let pref = Complex::new(0.0, -1.0).powu(size) / (if size == 2 { 2.0 } else { 1.0 });
        let mut sum = Complex::new(0.0, 0.0);
        for k in 0..=size {
            let s = g.get(k, &beta).unwrap();
            let mut v = Complex::new(0.0, 0.0);
            for ((tk, _), c) in s.iter() {
                v += c.compile().eval(rho, &y0, &tail) * t.powi(*tk as i32);
            }
            sum += v * h.powi(-(k as i32));
        }
        let lhs = sum * ex(&y0);
        let rhs = pref * d;
        assert!((lhs - rhs).norm() <= 1e-5 * rhs.norm(), "beta {beta:?}: {lhs} vs {rhs}");
    }
}

#[test]
fn zero_model_amplitudes() {
    let amps = solve(&ModelSpec::zero(3, Rat::new(1, 4), 5).unwrap());
    for (&(k, j), a) in amps.iter() {
        if (k, j) == (0, 0) {
            assert!(a.is_one_const());
        } else {
            assert!(a.is_zero(), "a[{k},{j}]");
        }
    }
    for j in 0..=5 {
        assert!(transport_residual(&amps, j).unwrap().is_zero());
    }
}

trait OneConst {
    fn is_one_const(&self) -> bool;
}

impl OneConst for SymExpr {
    fn is_one_const(&self) -> bool {
        *self == SymExpr::one(self.ctx())
    }
}

#[test]
fn airy_first_amplitude() {
    let c = ComplexRational::ratio(3, 2);
    let m = airy(c.clone(), 8);
    let amps = solve(&m);
    let expect = SymExpr::rho_pow(m.ctx(), -2, c.scale(&Rat::new(1, 4)));
    assert_eq!(amps.a(1, 0), expect);
    assert_eq!(amps.a(1, 0).rho_degree(), Some(-2));
    for j in 0..=3 {
        let r = transport_residual(&amps, j).unwrap();
        for k in 0..8 {
            assert!(r.coeff(k, 0).is_zero(), "j = {j}, t^{k}");
        }
    }
    let bad = amps.with_amp(1, 0, amps.a(1, 0).scale(&ComplexRational::from_int(3)));
    assert!(!transport_residual(&bad, 0).unwrap().coeff(0, 0).is_zero());
}

#[test]
fn e_table_examples() {
    let m = ModelSpec::zero(2, Rat::one(), 4).unwrap();
    let p = solve_eikonal(&m).unwrap();
    let amps = solve_transport(&p).unwrap();
    for j in 0..4 {
        assert!(build_e_table(&p, &amps, j, 4).unwrap().iter().all(|e| e.is_zero()));
    }
    let a = airy(ComplexRational::one(), 4);
    let p = solve_eikonal(&a).unwrap();
    assert!(build_e_table(&p, &AmplitudeJet::boundary(&p), 0, 0).unwrap()[0].is_zero());

    let ctx = Ctx::new(2, Rat::new(1, 3)).unwrap();
    let gamma = SymExpr::constant(&ctx, ComplexRational::ratio(5, 7));
    let mut e = BTreeMap::new();
    e.insert((0, 1), gamma.clone());
    let m = ModelSpec::new(&ctx, 4, e).unwrap();
    let p = solve_eikonal(&m).unwrap();
    let partial = AmplitudeJet::boundary(&p);
    assert_eq!(build_e_table(&p, &partial, 0, 0).unwrap()[0], gamma);
    match build_e_table(&p, &partial, 0, 2) {
        Err(crate::Error::MissingAmplitude { k: 1, j: 0 }) => {}
        other => panic!("expected missing amplitude, got {other:?}"),
    }
}

#[test]
fn amplitude_perturbation_structure() {
    let a = airy(ComplexRational::one(), 6);
    let d = SymExpr::constant(a.ctx(), ComplexRational::ratio(2, 3));
    let base = solve(&a);
    let pert = solve(&a.perturb_m_k0(1, &d).unwrap());
    assert_eq!(pert.a(1, 0).try_sub(&base.a(1, 0)).unwrap(), SymExpr::rho_pow(a.ctx(), -2, ComplexRational::ratio(1, 6)));
    let r = amp_response(&d, 1, 1).unwrap();
    assert_eq!(r, SymExpr::rho_pow(a.ctx(), -3, ComplexRational::new(Rat::zero(), Rat::new(1, 6))));
    for (k, j) in [(1, 0), (1, 1), (2, 1), (1, 3), (3, 2)] {
        let rep = check_amp_structure(&a, k, j, &d).unwrap();
        assert!(rep.pass(), "({k},{j}) {:?}", rep.violations);
    }
    let m = random_template(21, 2, 6).instantiate(Rat::new(3, 7)).unwrap();
    let d = SymExpr::constant(m.ctx(), ComplexRational::new(Rat::new(1, 2), Rat::new(-1, 3)));
    for (k, j) in [(1, 0), (2, 0), (1, 2), (2, 2)] {
        let rep = check_amp_structure(&m, k, j, &d).unwrap();
        assert!(rep.pass(), "({k},{j}) {:?}", rep.violations);
    }
}

#[test]
fn amplitude_grading() {
    let m = random_template(2, 3, 5).instantiate(Rat::new(1, 5)).unwrap();
    let amps = solve(&m);
    let rep = check_amp_grading(&amps).unwrap();
    assert!(rep.pass(), "{:?}", rep.violations);
    let bad = amps.with_amp(2, 1, SymExpr::rho_pow(m.ctx(), -8, ComplexRational::one()));
    assert!(!check_amp_grading(&bad).unwrap().pass());
}

#[test]
fn triangular_dependence() {
    let m = random_template(17, 2, 5).instantiate(Rat::new(1, 2)).unwrap();
    let full = solve(&m);
    for (kk, jj) in [(1, 0), (2, 0), (2, 1), (3, 1), (4, 2)] {
        let cut = solve(&m.truncated(kk, jj).unwrap());
        for (&(k, j), a) in full.iter() {
            if k + j <= kk && (k + j).min(j + 1) <= jj {
                assert_eq!(*a, cut.a(k, j), "cut ({kk},{jj}) a[{k},{j}]");
            }
        }
    }
}

#[test]
fn amplitude_scaling_in_mu() {
    let r = check_amp_scaling_numeric(&ModelTemplate::airy(2, "1", 4), 1, 0, 6, 1).unwrap();
    assert!((r.fitted_exponent + 1.0).abs() < 1e-9, "{r:?}");
    let r = check_amp_scaling_numeric(&random_template(3, 2, 4), 2, 1, 6, 1).unwrap();
    assert!(r.pass(0.1), "{r:?}");
}

#[test]
fn y_dependent_model_satisfies_transport() {
    let ctx = Ctx::new(2, Rat::new(2, 3)).unwrap();
    let mut e = BTreeMap::new();
    e.insert((1, 0), parse_expr(&ctx, "1 + y1^2/2").unwrap());
    e.insert((0, 1), parse_expr(&ctx, "y1*(i*mu - rho^2)").unwrap());
    let m = ModelSpec::new(&ctx, 6, e).unwrap();
    let amps = solve(&m);
    for j in 0..=6 {
        let r = transport_residual(&amps, j).unwrap();
        for k in 0..6 {
            assert!(r.coeff(k, 0).is_zero(), "j = {j}, t^{k}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn random_transport_residuals_vanish(seed in 0u64..10_000, d in 2usize..=3) {
        let m = random_template(seed, d, 4).instantiate(Rat::new(1, 3)).unwrap();
        let amps = solve(&m);
        for j in 0..=4 {
            let r = transport_residual(&amps, j).unwrap();
            for k in 0..4 {
                prop_assert!(r.coeff(k, 0).is_zero());
            }
        }
        prop_assert!(check_amp_grading(&amps).unwrap().pass());
    }
}
