//! Weierstrass functions for the lattice `Z + Z tau`.
//!
//! Everything is evaluated from q-series in `Q = exp(2 pi i tau')`, where
//! `tau'` is `tau` shifted by an integer and, when `Im tau` is small, moved
//! into the standard fundamental domain by an `SL(2, Z)` substitution. The
//! functions of the original lattice are recovered from the homogeneity
//! relations `wp(z; L) = lambda^-2 wp(z / lambda; L / lambda)`.
//!
//! Arguments are reduced into the period cell centred at the origin before the
//! series are summed; in that cell every Lambert term is bounded by
//! `exp(-pi n Im tau')`, so convergence is geometric.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Below this imaginary part the modulus is moved into the fundamental domain.
const REDUCE_BELOW: f64 = 0.5;
const MAX_TERMS: usize = 10_000;

/// Values of `wp`, `wp'` and `wp''` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WpValues {
    pub wp: Complex64,
    pub dwp: Complex64,
    pub d2wp: Complex64,
}

/// The evaluation frame: a modulus `tau'` equivalent to `tau` and the scale
/// `lambda = c tau + d` with `Lambda_tau = lambda * Lambda_tau'`.
#[derive(Debug, Clone, Copy)]
struct Frame {
    tau: Complex64,
    q: Complex64,
    /// `(a, b, c, d)` with `tau' = (a tau + b) / (c tau + d)`.
    gamma: [i64; 4],
    lambda: Complex64,
    eta1: Complex64,
    eta2: Complex64,
}

#[derive(Debug, Clone, Copy)]
struct CellValues {
    zeta: Complex64,
    wp: Complex64,
    dwp: Complex64,
    d2wp: Complex64,
}

/// A torus `C / (Z + Z tau)` with its cached invariants.
#[derive(Debug, Clone)]
pub struct Lattice {
    tau: Complex64,
    tol: f64,
    pole_guard: f64,
    frame: Frame,
    e: [Complex64; 3],
    g2: Complex64,
    g3: Complex64,
    eta: [Complex64; 2],
}

impl Lattice {
    /// Builds the lattice with the default pole guard of `1e-6`.
    pub fn new(tau: Complex64, tol: f64) -> Result<Self> {
        Self::with_pole_guard(tau, tol, 1e-6)
    }

    pub fn with_pole_guard(tau: Complex64, tol: f64, pole_guard: f64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "tau must lie in the upper half plane, got {tau}"
            )));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "truncation tolerance must lie in (0, 1), got {tol}"
            )));
        }
        if !(pole_guard > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pole guard must be positive, got {pole_guard}"
            )));
        }

        let frame = Frame::new(tau, tol);
        let (g2r, g3r) = eisenstein_invariants(frame.q, tol);
        let l = frame.lambda;
        let g2 = g2r / l.powi(4);
        let g3 = g3r / l.powi(6);
        let [a, _, c, _] = frame.gamma;
        let eta1 = (frame.eta1 * a as f64 - frame.eta2 * c as f64) / l;
        let eta2 = eta1 * tau - 2.0 * PI * I;

        let mut lattice = Self {
            tau,
            tol,
            pole_guard,
            frame,
            e: [Complex64::new(0.0, 0.0); 3],
            g2,
            g3,
            eta: [eta1, eta2],
        };
        for k in 1..=3 {
            lattice.e[k - 1] = lattice.wp(lattice.half_period(k))?;
        }
        Ok(lattice)
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    /// The nome `exp(i pi tau)`.
    pub fn nome(&self) -> Complex64 {
        (I * PI * self.tau).exp()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn pole_guard(&self) -> f64 {
        self.pole_guard
    }

    /// `[e1, e2, e3]` with `e_k = wp(omega_k / 2)`.
    pub fn e(&self) -> [Complex64; 3] {
        self.e
    }

    /// `e_k` for `k` in `1..=3`.
    pub fn e_k(&self, k: usize) -> Complex64 {
        self.e[k - 1]
    }

    pub fn g2(&self) -> Complex64 {
        self.g2
    }

    pub fn g3(&self) -> Complex64 {
        self.g3
    }

    pub fn eta1(&self) -> Complex64 {
        self.eta[0]
    }

    pub fn eta2(&self) -> Complex64 {
        self.eta[1]
    }

    /// `omega_k / 2` for `k` in `0..=3`: `0, 1/2, tau/2, (1 + tau)/2`.
    pub fn half_period(&self, k: usize) -> Complex64 {
        match k {
            0 => Complex64::new(0.0, 0.0),
            1 => Complex64::new(0.5, 0.0),
            2 => self.tau * 0.5,
            3 => (self.tau + 1.0) * 0.5,
            _ => panic!("half-period index {k} out of range"),
        }
    }

    /// True when `Re tau` vanishes to rounding.
    pub fn is_rectangular(&self) -> bool {
        self.tau.re.abs() <= 1e-14 * self.tau.im.max(1.0)
    }

    /// Euclidean distance from `z` to the nearest lattice point.
    pub fn lattice_distance(&self, z: Complex64) -> f64 {
        let (w0, _, _) = self.frame.reduce(z / self.frame.lambda);
        self.frame.cell_distance(w0) * self.frame.lambda.norm()
    }

    pub fn wp(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.wp_all(z)?.wp)
    }

    pub fn wp_prime(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.wp_all(z)?.dwp)
    }

    pub fn wp_second(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.wp_all(z)?.d2wp)
    }

    /// `wp`, `wp'`, `wp''` in one pass.
    pub fn wp_all(&self, z: Complex64) -> Result<WpValues> {
        let (w0, _, _) = self.reduce_checked(z)?;
        let v = self.frame.cell(w0, self.tol);
        let l = self.frame.lambda;
        let l2 = l * l;
        Ok(WpValues {
            wp: v.wp / l2,
            dwp: v.dwp / (l2 * l),
            d2wp: v.d2wp / (l2 * l2),
        })
    }

    /// Weierstrass zeta, quasi-periodic with `zeta(z + 1) = zeta(z) + eta1`.
    pub fn zeta(&self, z: Complex64) -> Result<Complex64> {
        let (w0, m, k) = self.reduce_checked(z)?;
        let v = self.frame.cell(w0, self.tol);
        let shift = self.frame.eta1 * m as f64 + self.frame.eta2 * k as f64;
        Ok((v.zeta + shift) / self.frame.lambda)
    }

    /// `wp(z + omega_i / 2)` through the half-period addition formula
    /// `e_i + (e_i - e_i')(e_i - e_i'') / (wp(z) - e_i)`.
    pub fn wp_half_shift(&self, z: Complex64, i: usize) -> Result<Complex64> {
        if !(1..=3).contains(&i) {
            return Err(Error::InvalidArgument(format!(
                "half-shift index must be 1, 2 or 3, got {i}"
            )));
        }
        let shifted = z + self.half_period(i);
        let d = self.lattice_distance(shifted);
        if d < self.pole_guard {
            return Err(Error::Pole {
                z: shifted,
                distance: d,
                guard: self.pole_guard,
            });
        }
        let wp = self.wp(z)?;
        Ok(self.half_shift_from_wp(wp, i))
    }

    /// The addition formula applied to a known `wp(z)`.
    pub(crate) fn half_shift_from_wp(&self, wp: Complex64, i: usize) -> Complex64 {
        let (ei, ej, ek) = self.e_triplet(i);
        ei + (ei - ej) * (ei - ek) / (wp - ei)
    }

    /// `(e_i, e_i', e_i'')` with `{i, i', i''} = {1, 2, 3}`.
    pub(crate) fn e_triplet(&self, i: usize) -> (Complex64, Complex64, Complex64) {
        let e = self.e;
        match i {
            1 => (e[0], e[1], e[2]),
            2 => (e[1], e[0], e[2]),
            3 => (e[2], e[0], e[1]),
            _ => unreachable!(),
        }
    }

    fn reduce_checked(&self, z: Complex64) -> Result<(Complex64, i64, i64)> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite argument {z}")));
        }
        let (w0, m, k) = self.frame.reduce(z / self.frame.lambda);
        let distance = self.frame.cell_distance(w0) * self.frame.lambda.norm();
        if distance < self.pole_guard {
            return Err(Error::Pole {
                z,
                distance,
                guard: self.pole_guard,
            });
        }
        Ok((w0, m, k))
    }
}

impl Frame {
    fn new(tau: Complex64, tol: f64) -> Self {
        let (mut a, mut b, mut c, mut d) = (1i64, 0i64, 0i64, 1i64);
        let mut t = tau;
        loop {
            let n = t.re.round();
            t -= n;
            let n = n as i64;
            a -= n * c;
            b -= n * d;
            if tau.im >= REDUCE_BELOW || t.norm_sqr() >= 1.0 - 1e-12 {
                break;
            }
            t = -1.0 / t;
            (a, b, c, d) = (-c, -d, a, b);
        }
        let lambda = tau * c as f64 + d as f64;
        let tau_red = (tau * a as f64 + b as f64) / lambda;
        let q = (2.0 * PI * I * tau_red).exp();

        // eta1 = (pi^2 / 3) E2(tau')
        let mut s = Complex64::new(0.0, 0.0);
        let mut qn = Complex64::new(1.0, 0.0);
        for n in 1..MAX_TERMS {
            qn *= q;
            let term = qn * n as f64 / (1.0 - qn);
            s += term;
            if term.norm() < tol * s.norm().max(1e-300) || qn.norm() < 1e-300 {
                break;
            }
        }
        let eta1 = PI * PI / 3.0 * (1.0 - 24.0 * s);
        let eta2 = eta1 * tau_red - 2.0 * PI * I;

        Self {
            tau: tau_red,
            q,
            gamma: [a, b, c, d],
            lambda,
            eta1,
            eta2,
        }
    }

    /// Reduces `w` (frame coordinates) to `w0 = w - m - k tau'` in the centred cell.
    fn reduce(&self, w: Complex64) -> (Complex64, i64, i64) {
        let k = (w.im / self.tau.im).round();
        let w1 = w - self.tau * k;
        let m = w1.re.round();
        (w1 - m, m as i64, k as i64)
    }

    fn cell_distance(&self, w0: Complex64) -> f64 {
        let mut best = f64::INFINITY;
        for a in -1..=1 {
            for b in -1..=1 {
                let p = self.tau * b as f64 + a as f64;
                best = best.min((w0 - p).norm());
            }
        }
        best
    }

    /// Series evaluation for `w0` in the centred cell.
    ///
    /// With `x = exp(2 pi i w)`, `u = Q x`, `v = Q / x`:
    /// - `zeta = eta1 w + pi cot(pi w) - 2 pi i sum (u^n - v^n) / (1 - Q^n)`
    /// - `wp = -eta1 + pi^2 csc^2(pi w) - 4 pi^2 sum n (u^n + v^n) / (1 - Q^n)`
    /// - `wp' = -2 pi^3 csc^2 cot - 8 pi^3 i sum n^2 (u^n - v^n) / (1 - Q^n)`
    /// - `wp'' = 2 pi^4 csc^2 (3 csc^2 - 2) + 16 pi^4 sum n^3 (u^n + v^n) / (1 - Q^n)`
    fn cell(&self, w0: Complex64, tol: f64) -> CellValues {
        let x = (2.0 * PI * I * w0).exp();
        // cot and csc^2 from whichever of x, 1/x is inside the unit disc
        let (cot, csc2) = if x.norm() <= 1.0 {
            (I * (x + 1.0) / (x - 1.0), -4.0 * x / ((x - 1.0) * (x - 1.0)))
        } else {
            let y = 1.0 / x;
            (-I * (y + 1.0) / (y - 1.0), -4.0 * y / ((1.0 - y) * (1.0 - y)))
        };

        let u = (2.0 * PI * I * (self.tau + w0)).exp();
        let v = (2.0 * PI * I * (self.tau - w0)).exp();

        let mut s0 = Complex64::new(0.0, 0.0);
        let mut s1 = Complex64::new(0.0, 0.0);
        let mut s2 = Complex64::new(0.0, 0.0);
        let mut s3 = Complex64::new(0.0, 0.0);
        let (mut un, mut vn, mut qn) = (
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
        );
        let pi2 = PI * PI;
        let base = self.eta1.norm() + pi2 * csc2.norm() + PI * cot.norm() + 1.0;
        for n in 1..MAX_TERMS {
            un *= u;
            vn *= v;
            qn *= self.q;
            let inv = 1.0 / (1.0 - qn);
            let nf = n as f64;
            let diff = (un - vn) * inv;
            let sum = (un + vn) * inv;
            s0 += diff;
            s1 += sum * nf;
            s2 += diff * (nf * nf);
            s3 += sum * (nf * nf * nf);
            let mag = (un.norm() + vn.norm()) * inv.norm() * nf * nf * nf;
            if mag < tol * (base + s3.norm()) || mag == 0.0 {
                break;
            }
        }

        let pi3 = pi2 * PI;
        let pi4 = pi2 * pi2;
        CellValues {
            zeta: self.eta1 * w0 + PI * cot - 2.0 * PI * I * s0,
            wp: -self.eta1 + pi2 * csc2 - 4.0 * pi2 * s1,
            dwp: -2.0 * pi3 * csc2 * cot - 8.0 * pi3 * I * s2,
            d2wp: 2.0 * pi4 * csc2 * (3.0 * csc2 - 2.0) + 16.0 * pi4 * s3,
        }
    }
}

/// `g2 = (4 pi^4 / 3) E4`, `g3 = (8 pi^6 / 27) E6` for `Z + Z tau'`.
fn eisenstein_invariants(q: Complex64, tol: f64) -> (Complex64, Complex64) {
    let mut s3 = Complex64::new(0.0, 0.0);
    let mut s5 = Complex64::new(0.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 1..MAX_TERMS {
        qn *= q;
        let nf = n as f64;
        let l = qn / (1.0 - qn);
        let t3 = l * nf.powi(3);
        let t5 = l * nf.powi(5);
        s3 += t3;
        s5 += t5;
        if t5.norm() < tol * (1.0 + s5.norm()) * 1e-2 {
            break;
        }
    }
    let e4 = 1.0 + 240.0 * s3;
    let e6 = 1.0 - 504.0 * s5;
    let pi4 = PI.powi(4);
    (4.0 * pi4 / 3.0 * e4, 8.0 * pi4 * PI * PI / 27.0 * e6)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_lower_half_plane_and_bad_tolerance() {
        assert!(Lattice::new(c(0.0, -1.0), 1e-14).is_err());
        assert!(Lattice::new(c(0.3, 0.0), 1e-14).is_err());
        assert!(Lattice::new(c(0.0, 1.0), 0.0).is_err());
        assert!(Lattice::new(c(0.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn square_lattice_symmetry() {
        let l = Lattice::new(c(0.0, 1.0), 1e-14).unwrap();
        let [e1, e2, e3] = l.e();
        assert!(e3.norm() < 1e-12, "e3 = {e3}");
        assert!((e1 + e2).norm() < 1e-12);
        assert!(e1.re > 0.0 && e1.im.abs() < 1e-12);
        assert!(l.g3().norm() < 1e-10 * l.g2().norm());
        let legendre = l.eta1() * c(0.0, 1.0) - l.eta2();
        assert!((legendre - c(0.0, 2.0 * PI)).norm() < 1e-13);
    }

    #[test]
    fn rectangular_ordering_of_half_period_values() {
        let l = Lattice::new(c(0.0, 1.3), 1e-14).unwrap();
        let [e1, e2, e3] = l.e();
        for e in [e1, e2, e3] {
            assert!(e.im.abs() < 1e-12);
        }
        assert!(e1.re > e3.re && e3.re > e2.re);
    }

    #[test]
    fn pole_guard_triggers() {
        let l = Lattice::new(c(0.1, 0.9), 1e-14).unwrap();
        assert!(matches!(l.wp(c(1e-8, 0.0)), Err(Error::Pole { .. })));
        assert!(matches!(l.wp(c(1.1, 0.9 + 1e-7)), Err(Error::Pole { .. })));
        assert!(l.wp(c(1e-4, 0.0)).is_ok());
    }

    #[test]
    fn half_shift_corner_and_limit() {
        let l = Lattice::new(c(0.0, 1.0), 1e-14).unwrap();
        let v = l.wp_half_shift(l.half_period(2), 1).unwrap();
        assert!((v - l.e_k(3)).norm() < 1e-11);

        // approach e3 as z -> 0 along a ray; error shrinks like z^2
        let d3 = (l.wp_half_shift(c(1e-3, 1e-3), 3).unwrap() - l.e_k(3)).norm();
        let d4 = (l.wp_half_shift(c(1e-4, 1e-4), 3).unwrap() - l.e_k(3)).norm();
        assert!(d3 < 1e-3 && d4 < 1e-5);
        assert!((d3 / d4 - 100.0).abs() < 1.0, "ratio {}", d3 / d4);
        assert!(l.wp_half_shift(c(0.0, 0.0), 0).is_err());
    }

    #[test]
    fn small_imaginary_part_uses_reduced_frame() {
        let tau = c(0.2, 0.05);
        let l = Lattice::new(tau, 1e-14).unwrap();
        let [e1, e2, e3] = l.e();
        let scale = e1.norm() + e2.norm() + e3.norm();
        assert!((e1 + e2 + e3).norm() < 1e-12 * scale);
        let legendre = l.eta1() * tau - l.eta2();
        assert!((legendre - c(0.0, 2.0 * PI)).norm() < 1e-9);
        // periodicity across the original generators
        let z = c(0.137, 0.011);
        let w = l.wp(z).unwrap();
        assert!((l.wp(z + 1.0).unwrap() - w).norm() < 1e-10 * w.norm());
        assert!((l.wp(z + tau).unwrap() - w).norm() < 1e-10 * w.norm());
    }
}
