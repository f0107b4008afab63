use finitegap::heun::{
    heun_from_tuple, interlacing_check, p_polynomial, SturmRegime, TildeAlpha,
};
use finitegap::poly::root_values;
use finitegap::spectral::{factor_exponents, q_via_phi_ansatz, MultiplicityTuple};
use finitegap::{Lattice, Tolerances};
use num_complex::Complex64;
use proptest::prelude::*;

fn lattice(b: f64) -> Lattice {
    Lattice::new(Complex64::new(0.0, b), 1e-14).unwrap()
}

/// Every non-constant factor choice for tuples with total at most 6.
fn choices() -> Vec<TildeAlpha> {
    let mut out = Vec::new();
    for s in 1..=6u32 {
        for a in 0..=s {
            for b in 0..=s - a {
                for c in 0..=s - a - b {
                    let n = [a, b, c, s - a - b - c];
                    if s % 2 == 1 {
                        continue;
                    }
                    for upper in factor_exponents(n).into_iter().flatten() {
                        out.push(TildeAlpha::from_choice(n, upper).unwrap());
                    }
                }
            }
        }
    }
    out
}

#[test]
fn polynomial_solutions_satisfy_the_equation() {
    let l = lattice(1.0);
    let xs: Vec<Complex64> = (0..10)
        .map(|k| Complex64::new(-3.0 + 0.7 * k as f64, 0.3 * (k % 3) as f64))
        .collect();
    for ta in choices() {
        let h = heun_from_tuple(&l, &ta).unwrap();
        let n = h.n as usize;
        let c = h.coeff_sequence(n + 1).unwrap();
        for q0 in root_values(&c[n + 1]).unwrap() {
            let f = h.polynomial_solution(q0).unwrap();
            let scale = f
                .coeffs()
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max)
                * (1.0 + q0.norm());
            for &x in &xs {
                let r = h.residual(&f, q0, x).norm();
                let size = scale * (1.0 + x.norm()).powi(n as i32 + 3);
                assert!(r < 1e-8 * size, "{:?} q0 = {q0}: residual {r:e}", ta.doubled());
            }
        }
    }
}

#[test]
fn series_terminates_past_n() {
    let l = lattice(1.3);
    for ta in choices() {
        let h = heun_from_tuple(&l, &ta).unwrap();
        let n = h.n as usize;
        let c = h.coeff_sequence(n + 5).unwrap();
        for q0 in root_values(&c[n + 1]).unwrap() {
            let size: f64 = c[..=n].iter().map(|cm| cm.eval(q0).norm()).fold(1.0, f64::max);
            for cm in &c[n + 1..] {
                assert!(cm.eval(q0).norm() < 1e-8 * size, "{:?}", ta.doubled());
            }
        }
    }
}

#[test]
fn first_coefficient_is_linear_in_q() {
    let l = lattice(1.0);
    let ta = TildeAlpha::from_choice([2, 2, 1, 1], [false; 4]).unwrap();
    let h = heun_from_tuple(&l, &ta).unwrap();
    let c = h.coeff_sequence(4).unwrap();
    assert_eq!(c[0].coeffs(), &[Complex64::new(1.0, 0.0)]);
    let q = Complex64::new(0.7, -0.2);
    let want = q / (h.d() * h.gamma[2]);
    assert!((c[1].eval(q) - want).norm() < 1e-14);
    for (m, cm) in c.iter().enumerate() {
        assert_eq!(cm.degree(), m);
    }
}

#[test]
fn parameters_for_2211() {
    let l = lattice(1.0);
    let ta = TildeAlpha::from_choice([2, 2, 1, 1], [false; 4]).unwrap();
    assert_eq!(ta.n(), 3);
    let h = heun_from_tuple(&l, &ta).unwrap();
    assert!((h.gamma[2].re + 0.5).abs() < 1e-15);
    assert!((h.beta.re + 0.5).abs() < 1e-15);
    let sum: Complex64 = h.gamma.iter().sum();
    assert!((h.alpha + h.beta + 1.0 - sum).norm() < 1e-14);
}

#[test]
fn lame_one_factor_is_a_root_of_q() {
    let l = lattice(1.2);
    let ta = TildeAlpha::from_doubled([-1, 1, 0, 0]).unwrap();
    let p = p_polynomial(&l, &ta).unwrap();
    assert_eq!(p.degree(), 1);
    let n = MultiplicityTuple::new([1, 0, 0, 0]).unwrap();
    let q = q_via_phi_ansatz(&l, &n, &Tolerances::default()).unwrap().q;
    let root = -p.coeffs()[0];
    assert!(q.eval(root).norm() < 1e-9 * (1.0 + root.norm()).powi(3));
}

#[test]
fn interlacing_for_2211_lowest_factor() {
    let l = lattice(1.0);
    let ta = TildeAlpha::from_choice([2, 2, 1, 1], [false; 4]).unwrap();
    let h = heun_from_tuple(&l, &ta).unwrap();
    let r = interlacing_check(&h).unwrap();
    assert_eq!(r.regime, SturmRegime::Reflected { n3: 1 });
    assert!(r.all_real && r.interlaced);
    assert_eq!(r.roots.len(), 4);
    assert_eq!(r.first_flip, Some(1));
    assert!(r.leading_pattern_ok && r.recursion_sign_ok);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn positive_regime_roots_are_real_and_interlace(b in 0.5f64..2.0, pick in 0usize..4) {
        let tuples = [[2u32, 0, 0, 0], [4, 0, 0, 0], [2, 1, 1, 0], [3, 1, 0, 0]];
        let l = lattice(b);
        let n = tuples[pick];
        let mut checked = 0;
        for upper in factor_exponents(n).into_iter().flatten() {
            let ta = TildeAlpha::from_choice(n, upper).unwrap();
            let h = heun_from_tuple(&l, &ta).unwrap();
            if !(h.gamma[2].re > 0.0 && h.beta.re > 0.0 && h.n > 0) {
                continue;
            }
            let r = interlacing_check(&h).unwrap();
            prop_assert_eq!(r.regime, SturmRegime::Positive);
            prop_assert!(r.all_real && r.interlaced, "{:?}", ta.doubled());
            checked += 1;
        }
        prop_assert!(checked > 0);
    }
}
