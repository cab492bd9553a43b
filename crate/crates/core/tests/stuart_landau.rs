use std::f64::consts::{FRAC_PI_2, PI, TAU};

use ddephase::fourier::Lattice;
use ddephase::homological::ReduceOptions;
use ddephase::stuart_landau::*;
use proptest::prelude::*;

fn swap_eval(f: &ddephase::fourier::FourierSeries, a: f64, b: f64) -> f64 {
    let x = f.eval_real(&[a, b]);
    let y = f.eval_real(&[b, a]);
    (x[0] - y[1]).abs().max((x[1] - y[0]).abs())
}

#[test]
fn generic_solver_reproduces_second_order_closed_forms() {
    let p = SLParams { rho: 2.2, tau: 0.9, ..SLParams::default() };
    let ex = reduce_sl(&p, 2, &ReduceOptions::default()).unwrap();
    let lat = Lattice::new(2, 32);
    assert!(ex.f(2).max_deviation(&f2_closed(&p).unwrap(), &lat).unwrap() <= 1e-9);
    assert!(ex.e(1).max_deviation(&e1_closed(&p).unwrap(), &lat).unwrap() <= 1e-9);
    let hist = e1_hist_closed(&p).unwrap();
    for phi in Lattice::new(2, 8).points() {
        for j in 0..=4 {
            let s = -p.tau * j as f64 / 4.0;
            let a = ex.e_hist(1).eval(&phi, s).unwrap();
            let b = hist.eval(&phi, s).unwrap();
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() <= 1e-9));
        }
    }
}

#[test]
fn four_equilibria_at_quarter_rotation() {
    let p = SLParams { rho: FRAC_PI_2, eps: 0.1, ..SLParams::default() };
    let eq = reduced_equilibria(&p, 2).unwrap();
    assert_eq!(eq.len(), 4);
    let stable: Vec<f64> = eq.iter().filter(|e| e.stability == Stability::Stable).map(|e| e.psi).collect();
    assert_eq!(stable.len(), 2);
    assert!(stable[0].abs() < 1e-9 && (stable[1] - PI).abs() < 1e-9);
    for e in eq.iter().filter(|e| e.stability == Stability::Unstable) {
        assert!(e.psi > 0.0 && e.psi < TAU && (e.psi - PI).abs() > 0.1);
    }
}

#[test]
fn antiphase_stable_when_rotated_by_pi() {
    let p = SLParams { rho: PI, eps: 0.05, ..SLParams::default() };
    let eq = reduced_equilibria(&p, 1).unwrap();
    assert_eq!(eq.len(), 2);
    assert_eq!(eq[0].stability, Stability::Unstable);
    assert_eq!(eq[1].stability, Stability::Stable);
}

#[test]
fn reduced_equilibria_without_coupling() {
    let p = SLParams { eps: 0.0, ..SLParams::default() };
    let eq = reduced_equilibria(&p, 2).unwrap();
    assert_eq!(eq.iter().map(|e| e.psi).collect::<Vec<_>>(), vec![0.0, PI]);
    assert!(eq.iter().all(|e| e.stability == Stability::Neutral));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn first_order_depends_on_delay_only_through_phase_shift(
        rho in 0.0..TAU, tau in 0.0..3.0f64, delta in -1.0..1.0f64, a in 0.0..TAU, b in 0.0..TAU
    ) {
        let p = SLParams { rho, tau, delta, ..SLParams::default() };
        let w = orbit(&p).unwrap().omega;
        let q = SLParams { rho: (rho - w * tau).rem_euclid(TAU), tau: 0.0, ..p };
        // constant mode carries rho itself, so compare the tau-dependent part
        let fp = f1_closed(&p).unwrap().eval_real(&[a, b]);
        let fq = f1_closed(&q).unwrap().eval_real(&[a, b]);
        let r = delta / p.gamma;
        let shift = |s: &SLParams| r * s.rho.cos() - s.rho.sin();
        for j in 0..2 {
            prop_assert!(((fp[j] - shift(&p)) - (fq[j] - shift(&q))).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_forms_are_exchange_equivariant(
        rho in 0.0..TAU, tau in 0.0..3.0f64, a in 0.0..TAU, b in 0.0..TAU
    ) {
        let p = SLParams { rho, tau, ..SLParams::default() };
        prop_assert!(swap_eval(&f1_closed(&p).unwrap(), a, b) < 1e-12);
        prop_assert!(swap_eval(&f2_closed(&p).unwrap(), a, b) < 1e-12);
    }

    #[test]
    fn phase_difference_rhs_is_difference_of_reduced_field(
        rho in 0.0..TAU, tau in 0.0..3.0f64, eps in 0.0..0.3f64, psi in 0.0..TAU
    ) {
        let p = SLParams { rho, tau, eps, ..SLParams::default() };
        let f1 = f1_closed(&p).unwrap().eval_real(&[psi, 0.0]);
        let f2 = f2_closed(&p).unwrap().eval_real(&[psi, 0.0]);
        let first = eps * (f1[0] - f1[1]);
        let second = first + eps * eps * (f2[0] - f2[1]);
        prop_assert!((psi_rhs(&p, 1, psi).unwrap() - first).abs() < 1e-12);
        prop_assert!((psi_rhs(&p, 2, psi).unwrap() - second).abs() < 1e-12);
    }
}
