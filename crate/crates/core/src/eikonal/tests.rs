use proptest::prelude::*;

use super::*;
use crate::symring::{eval_numeric, ComplexRational, EvalPoint, Rat, SymExpr};

fn airy(c: ComplexRational, m: usize) -> ModelSpec {
    ModelSpec::airy(2, Rat::new(1, 2), c, m).unwrap()
}

fn binom_half(n: usize) -> Rat {
    // C(1/2, n)
    let mut r = Rat::one();
    for i in 0..n {
        r = &r * &Rat::new(1 - 2 * i as i64, 2 * (i as i64 + 1));
    }
    r
}

/// t-series of ∫₀^t √(ϱ² − cσ) dσ = Σ_n ϱ·C(1/2,n)(−c)^n ϱ^{−2n} t^{n+1}/(n+1).
fn wkb_series(model: &ModelSpec, c: &ComplexRational, k: usize) -> SymExpr {
    let n = k - 1;
    let coef = c.scale(&Rat::from_int(-1)).pow(n as i32).unwrap().scale(&binom_half(n)).scale(&Rat::new(1, k as i64));
    SymExpr::rho_pow(model.ctx(), 1 - 2 * n as i32, coef)
}

#[test]
fn zero_model_has_linear_phase() {
    let m = ModelSpec::zero(3, Rat::new(1, 3), 6).unwrap();
    let p = solve_eikonal(&m).unwrap();
    assert_eq!(p.phi(1), SymExpr::rho(m.ctx()));
    for k in 2..=6 {
        assert!(p.phi(k).is_zero());
    }
    assert!(eikonal_residual(&p).unwrap().is_zero());
}

#[test]
fn airy_phase_matches_wkb_integral() {
    for c in [ComplexRational::one(), ComplexRational::ratio(-3, 2), ComplexRational::new(Rat::new(1, 2), Rat::new(2, 3))] {
        let m = airy(c.clone(), 8);
        let p = solve_eikonal(&m).unwrap();
        for k in 1..=8 {
            assert_eq!(p.phi(k), wkb_series(&m, &c, k), "k = {k}");
        }
    }
    let m = airy(ComplexRational::one(), 4);
    let p = solve_eikonal(&m).unwrap();
    assert_eq!(p.phi(2), SymExpr::rho_pow(m.ctx(), -1, ComplexRational::ratio(-1, 4)));
    assert_eq!(p.phi(3), SymExpr::rho_pow(m.ctx(), -3, ComplexRational::ratio(-1, 24)));
    assert_eq!(p.phi(2).rho_degree(), Some(-1));
    assert_eq!(p.phi(3).rho_degree(), Some(-3));
}

#[test]
fn airy_phi2_numeric_value() {
    let m = ModelSpec::airy(2, Rat::one(), ComplexRational::one(), 3).unwrap();
    let p = solve_eikonal(&m).unwrap();
    let v = eval_numeric(&p.phi(2), &EvalPoint { y: vec![0.3], eta1: 0.0, eta_tail: vec![], mu: 1.0 }).unwrap();
    let expect = -1.0 / (4.0 * num::Complex::from_polar(1.0, std::f64::consts::FRAC_PI_4));
    assert!((v - expect).norm() < 1e-14);
}

#[test]
fn airy_residual_vanishes_below_m() {
    let m = airy(ComplexRational::ratio(3, 2), 8);
    let p = solve_eikonal(&m).unwrap();
    let r = eikonal_residual(&p).unwrap();
    for k in 0..8 {
        assert!(r.coeff(k, 0).is_zero());
    }
    assert!(!r.coeff(8, 0).is_zero());
}

#[test]
fn corrupted_phi2_breaks_residual() {
    let m = airy(ComplexRational::one(), 5);
    let p = solve_eikonal(&m).unwrap();
    let bad = p.with_phi(2, p.phi(2).scale(&ComplexRational::from_int(2)));
    let r = eikonal_residual(&bad).unwrap();
    assert!(r.coeff(0, 0).is_zero());
    assert!(!r.coeff(1, 0).is_zero());
}

#[test]
fn grading_holds_and_catches_violations() {
    let m = random_template(11, 3, 6).instantiate(Rat::new(2, 5)).unwrap();
    let p = solve_eikonal(&m).unwrap();
    let rep = check_phase_grading(&p).unwrap();
    assert!(rep.pass(), "{:?}", rep.violations);
    let bad = p.with_phi(2, SymExpr::rho_pow(m.ctx(), -2, ComplexRational::one()));
    assert!(!check_phase_grading(&bad).unwrap().pass());
}

#[test]
fn phase_perturbation_responses() {
    let m = random_template(5, 2, 6).instantiate(Rat::new(1, 3)).unwrap();
    let y1 = SymExpr::y(m.ctx(), 1).unwrap();
    for k in 1..6 {
        for delta in [SymExpr::int(m.ctx(), 3), y1.clone()] {
            let rep = check_phase_perturbation(&m, k, &delta).unwrap();
            assert!(rep.pass(), "K = {k}: {:?}", rep.violations);
        }
    }
    let a = airy(ComplexRational::one(), 4);
    let d = SymExpr::constant(a.ctx(), ComplexRational::ratio(1, 7));
    let p0 = solve_eikonal(&a).unwrap();
    let p1 = solve_eikonal(&a.perturb_m_k0(1, &d).unwrap()).unwrap();
    assert_eq!(p1.phi(2).try_sub(&p0.phi(2)).unwrap(), SymExpr::rho_pow(a.ctx(), -1, ComplexRational::ratio(-1, 28)));
}

#[test]
fn im_phase_bound() {
    let z = solve_eikonal(&ModelSpec::zero(2, Rat::new(1, 10), 4).unwrap()).unwrap();
    assert!(check_im_phase(&z, 0.5, 500, 1).unwrap().pass());
    let t = ModelTemplate::airy(2, "1", 8);
    let rep = check_im_phase_template(&t, 0.05, 2000, 4, 3).unwrap();
    assert_eq!(rep.samples, 2000);
    assert!(rep.pass(), "{:?}", rep.first_violation);
    let rep = check_im_phase_template(&t, 10.0, 2000, 4, 3).unwrap();
    assert!(!rep.pass());
    assert!(rep.first_violation.is_some());
}

#[test]
fn largest_delta_is_between_controls() {
    let t = ModelTemplate::airy(2, "1", 6);
    let d = largest_passing_delta(&t, &[0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4, 12.8], 500, 2, 9).unwrap();
    let d = d.expect("0.05 passes");
    assert!((0.05..10.0).contains(&d));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_models_solve_exactly(seed in 0u64..10_000, d in 2usize..=3, num in 1i64..20) {
        let m = random_template(seed, d, 5).instantiate(Rat::new(num, 20)).unwrap();
        let p = solve_eikonal(&m).unwrap();
        let r = eikonal_residual(&p).unwrap();
        for k in 0..5 {
            prop_assert!(r.coeff(k, 0).is_zero());
        }
        prop_assert!(check_phase_grading(&p).unwrap().pass());
    }
}
