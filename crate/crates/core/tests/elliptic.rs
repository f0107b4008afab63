use std::f64::consts::PI;

use finitegap::Lattice;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn lattice(tau: Complex64) -> Lattice {
    Lattice::new(tau, 1e-14).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

fn tau_strategy() -> impl Strategy<Value = Complex64> {
    (-0.5f64..0.5, 0.6f64..2.5).prop_map(|(x, y)| c(x, y))
}

/// Points of the fundamental cell kept away from the lattice.
fn z_strategy() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..0.9, 0.1f64..0.9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn differential_identity(tau in tau_strategy(), (x, y) in z_strategy()) {
        let l = lattice(tau);
        let z = c(x, 0.0) + tau * y;
        let w = l.wp_all(z).unwrap();
        let rhs = 4.0 * w.wp.powi(3) - l.g2() * w.wp - l.g3();
        prop_assert!(rel(w.dwp * w.dwp, rhs) < 1e-9 * (1.0 + w.wp.norm().powi(3)));
        let second = 6.0 * w.wp * w.wp - l.g2() / 2.0;
        prop_assert!(rel(w.d2wp, second) < 1e-9 * (1.0 + w.wp.norm().powi(2)));
    }

    #[test]
    fn legendre_and_e_sum(tau in tau_strategy()) {
        let l = lattice(tau);
        let lhs = l.eta1() * tau - l.eta2();
        prop_assert!((lhs - c(0.0, 2.0 * PI)).norm() < 1e-10);
        let e = l.e();
        prop_assert!((e[0] + e[1] + e[2]).norm() < 1e-10 * (1.0 + e[0].norm()));
    }

    #[test]
    fn derivatives_by_finite_differences(tau in tau_strategy(), (x, y) in z_strategy()) {
        let l = lattice(tau);
        let z = c(x, 0.0) + tau * y;
        let h = 1e-5;
        let d_wp = (l.wp(z + h).unwrap() - l.wp(z - h).unwrap()) / (2.0 * h);
        prop_assert!(rel(d_wp, l.wp_prime(z).unwrap()) < 1e-6);
        let d_zeta = (l.zeta(z + h).unwrap() - l.zeta(z - h).unwrap()) / (2.0 * h);
        prop_assert!(rel(d_zeta, -l.wp(z).unwrap()) < 1e-6);
    }

    #[test]
    fn quasi_periods(tau in tau_strategy(), (x, y) in z_strategy()) {
        let l = lattice(tau);
        let z = c(x, 0.0) + tau * y;
        let zeta = l.zeta(z).unwrap();
        prop_assert!(rel(l.zeta(z + 1.0).unwrap() - zeta, l.eta1()) < 1e-9);
        prop_assert!(rel(l.zeta(z + tau).unwrap() - zeta, l.eta2()) < 1e-9);
        prop_assert!(rel(l.wp(z + tau + 1.0).unwrap(), l.wp(z).unwrap()) < 1e-10);
    }

    #[test]
    fn modular_transformation(tau in tau_strategy(), (x, y) in z_strategy(), pick in 0usize..3) {
        let gammas = [(0i64, -1i64, 1i64, 0i64), (1, 1, 0, 1), (2, 1, 1, 1)];
        let (a, b, cc, d) = gammas[pick];
        let l = lattice(tau);
        let j = tau * cc as f64 + d as f64;
        let tau2 = (tau * a as f64 + b as f64) / j;
        let l2 = lattice(tau2);
        let z = c(x, 0.0) + tau * y;
        let lhs = l2.wp(z / j).unwrap();
        let rhs = j * j * l.wp(z).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-9);
        prop_assert!(rel(l2.g2(), j.powi(4) * l.g2()) < 1e-9);
    }

    #[test]
    fn half_shift_agrees_with_direct(tau in tau_strategy(), (x, y) in z_strategy(), k in 1usize..4) {
        let l = lattice(tau);
        let z = c(x, 0.0) + tau * y;
        let shifted = z + l.half_period(k);
        prop_assume!(l.lattice_distance(shifted) > 0.05);
        let direct = l.wp(shifted).unwrap();
        prop_assert!(rel(l.wp_half_shift(z, k).unwrap(), direct) < 1e-9);
    }

    #[test]
    fn conjugation_symmetry(tau in tau_strategy(), (x, y) in z_strategy()) {
        let l = lattice(tau);
        let lc = lattice(-tau.conj());
        let z = c(x, 0.0) + tau * y;
        prop_assert!(rel(lc.wp(z.conj()).unwrap(), l.wp(z).unwrap().conj()) < 1e-10);
    }
}

#[test]
fn square_lattice_values() {
    let l = lattice(c(0.0, 1.0));
    let e = l.e();
    assert!(e[2].norm() < 1e-12);
    assert!((e[0] + e[1]).norm() < 1e-12);
    assert!(e[0].re > 0.0 && e[0].im.abs() < 1e-12);
    // g3 vanishes on the square lattice.
    assert!(l.g3().norm() < 1e-10);
}

#[test]
fn small_imaginary_part_matches_reduced_lattice() {
    // tau and -1/tau describe the same torus up to scaling by tau.
    let tau = c(0.07, 0.31);
    let l = lattice(tau);
    let l2 = lattice(-1.0 / tau);
    let z = c(0.13, 0.05);
    assert!(rel(l2.wp(z / tau).unwrap(), tau * tau * l.wp(z).unwrap()) < 1e-9);
}
