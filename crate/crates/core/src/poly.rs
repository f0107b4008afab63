//! Dense complex polynomials and the simultaneous (Aberth–Ehrlich) root finder
//! shared by the spectral and Heun code.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients lowest degree first. The leading stored coefficient is nonzero
/// unless the polynomial is identically zero, which is stored as `[0]`.
#[derive(Clone, PartialEq)]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

impl ComplexPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == Complex64::new(0.0, 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0))
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// `a x + b`.
    pub fn linear(a: Complex64, b: Complex64) -> Self {
        Self::new(vec![b, a])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| {
            &acc * &Self::linear(Complex64::new(1.0, 0.0), -r)
        })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == Complex64::new(0.0, 0.0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `(p(z), p'(z))` by a single Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn monic(&self) -> Result<Self> {
        let lead = self.leading();
        if lead == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidArgument(
                "cannot normalize the zero polynomial".into(),
            ));
        }
        Ok(self.scale(1.0 / lead))
    }

    /// `p(a x + b)`.
    pub fn compose_affine(&self, a: Complex64, b: Complex64) -> Self {
        let inner = Self::linear(a, b);
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, &c| &(&acc * &inner) + &Self::constant(c))
    }

    /// Drops leading coefficients whose magnitude is below `eps` times the
    /// largest coefficient.
    pub fn trim_relative(&self, eps: f64) -> Self {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().unwrap().norm() <= eps * max {
            coeffs.pop();
        }
        Self::new(coeffs)
    }

    /// Zeroes imaginary parts that are below `eps` times the coefficient's
    /// magnitude scale (the largest coefficient modulus).
    pub fn realify(&self, eps: f64) -> Self {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        Self::new(
            self.coeffs
                .iter()
                .map(|&c| {
                    if c.im.abs() <= eps * max.max(c.norm()) {
                        Complex64::new(c.re, 0.0)
                    } else {
                        c
                    }
                })
                .collect(),
        )
    }

    /// Largest imaginary part relative to the largest coefficient modulus.
    pub fn max_relative_imag(&self) -> f64 {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max) / max
    }

    /// Radius scale `max_k |a_k / a_n|^(1 / (n - k))`, a tight proxy for the
    /// largest root modulus.
    pub fn root_radius(&self) -> f64 {
        let n = self.degree();
        let lead = self.leading().norm();
        (0..n)
            .map(|k| (self.coeffs[k].norm() / lead).powf(1.0 / (n - k) as f64))
            .fold(0.0, f64::max)
    }

    /// Coefficient-vector distance after rescaling `x -> s x` with
    /// `s = 1 + root_radius(self)`, relative to the rescaled norm of `self`.
    /// This is the comparison used for cross-route agreement: it is invariant
    /// to the natural magnitude growth of low-order coefficients.
    pub fn relative_distance(&self, other: &Self) -> f64 {
        let s = 1.0 + self.root_radius();
        let n = self.degree().max(other.degree());
        let get = |p: &Self, k: usize| p.coeffs.get(k).copied().unwrap_or_default();
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for k in 0..=n {
            let w = s.powi(k as i32 - n as i32);
            num = num.max((get(self, k) - get(other, k)).norm() * w);
            den = den.max(get(self, k).norm() * w);
        }
        num / den
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or_default()
                        + rhs.coeffs.get(k).copied().unwrap_or_default()
                })
                .collect(),
        )
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        self + &(-rhs)
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPoly::new(out)
    }
}

/// A computed root with its residual `|p(root)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub residual: f64,
}

/// How the roots of a polynomial sit relative to the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootClass {
    RealDistinct,
    HasComplex,
    HasMultiple,
}

impl RootClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            RootClass::RealDistinct => "real_distinct",
            RootClass::HasComplex => "has_complex",
            RootClass::HasMultiple => "has_multiple",
        }
    }
}

impl fmt::Display for RootClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const MAX_ITER: usize = 800;

/// All roots of `p` by Aberth–Ehrlich iteration followed by Newton polishing
/// on the original coefficients. Roots come back sorted by real part, then by
/// imaginary part.
pub fn roots(p: &ComplexPoly) -> Result<Vec<Root>> {
    let n = p.degree();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "root finding needs degree >= 1".into(),
        ));
    }
    let monic = p.monic()?;
    let mut z: Vec<Complex64> = if n == 1 {
        vec![-monic.coeffs[0]]
    } else {
        initial_guesses(&monic)
    };

    if n > 1 {
        let mut converged = false;
        for _ in 0..MAX_ITER {
            let mut max_step: f64 = 0.0;
            for k in 0..n {
                let (pv, dpv) = monic.eval_with_derivative(z[k]);
                if pv == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let ratio = pv / dpv;
                let s: Complex64 = (0..n)
                    .filter(|&j| j != k)
                    .map(|j| 1.0 / (z[k] - z[j]))
                    .sum();
                let w = ratio / (1.0 - ratio * s);
                if w.re.is_finite() && w.im.is_finite() {
                    z[k] -= w;
                    max_step = max_step.max(w.norm() / (1.0 + z[k].norm()));
                }
            }
            if max_step < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged {
            // Aberth can stall at ~1e-13 on clustered roots; accept if the
            // residuals are already at rounding level.
            let scale = 1.0 + z.iter().map(|r| r.norm()).fold(0.0, f64::max);
            let tiny = z.iter().all(|&r| {
                monic.eval(r).norm() <= 1e-9 * scale.powi(n as i32)
            });
            if !tiny {
                return Err(Error::NoConvergence {
                    iterations: MAX_ITER,
                    partial: z,
                });
            }
        }
    }

    let mut out: Vec<Root> = z
        .into_iter()
        .map(|r| {
            let r = polish(p, r);
            Root {
                value: r,
                residual: p.eval(r).norm(),
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.value
            .re
            .partial_cmp(&b.value.re)
            .unwrap()
            .then(a.value.im.partial_cmp(&b.value.im).unwrap())
    });
    Ok(out)
}

/// Root values only.
pub fn root_values(p: &ComplexPoly) -> Result<Vec<Complex64>> {
    Ok(roots(p)?.into_iter().map(|r| r.value).collect())
}

fn initial_guesses(monic: &ComplexPoly) -> Vec<Complex64> {
    let n = monic.degree();
    let centre = -monic.coeffs[n - 1] / n as f64;
    let shifted = monic.compose_affine(Complex64::new(1.0, 0.0), centre);
    let r = shifted.root_radius().max(1e-3);
    (0..n)
        .map(|k| {
            let angle = 2.0 * PI * k as f64 / n as f64 + 0.4;
            centre + Complex64::from_polar(r, angle)
        })
        .collect()
}

/// A few Newton steps, kept only while they reduce the residual.
fn polish(p: &ComplexPoly, mut r: Complex64) -> Complex64 {
    let mut res = p.eval(r).norm();
    for _ in 0..4 {
        let (pv, dpv) = p.eval_with_derivative(r);
        if dpv == Complex64::new(0.0, 0.0) {
            break;
        }
        let cand = r - pv / dpv;
        let cres = p.eval(cand).norm();
        if cres < res {
            r = cand;
            res = cres;
        } else {
            break;
        }
    }
    r
}

/// Root-set classification with thresholds relative to `1 + max |root|`.
pub fn classify(roots: &[Complex64], tol_im: f64, tol_gap: f64) -> RootClass {
    let scale = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if (roots[i] - roots[j]).norm() <= tol_gap * scale {
                return RootClass::HasMultiple;
            }
        }
    }
    if roots.iter().any(|r| r.im.abs() > tol_im * scale) {
        RootClass::HasComplex
    } else {
        RootClass::RealDistinct
    }
}

/// Smallest pairwise distance in a point set (infinite for fewer than two).
pub fn min_gap(points: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min((points[i] - points[j]).norm());
        }
    }
    best
}

/// Matching distance between two point sets of equal size: the largest
/// nearest-neighbour distance in either direction, provided nearest neighbours
/// pair the sets bijectively. Returns `None` when they do not.
pub fn matching_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let nearest = |p: Complex64, set: &[Complex64]| -> (usize, f64) {
        set.iter()
            .enumerate()
            .map(|(i, q)| (i, (p - q).norm()))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap()
    };
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for &p in a {
        let (i, d) = nearest(p, b);
        if used[i] {
            return None;
        }
        used[i] = true;
        worst = worst.max(d);
    }
    for &q in b {
        worst = worst.max(nearest(q, a).1);
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cubic_with_integer_roots() {
        let p = ComplexPoly::from_real(&[-6.0, 11.0, -6.0, 1.0]);
        let r = root_values(&p).unwrap();
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - c(want, 0.0)).norm() < 1e-12);
        }
        assert_eq!(classify(&r, 1e-6, 1e-6), RootClass::RealDistinct);
    }

    #[test]
    fn conjugate_pair_is_complex() {
        let p = ComplexPoly::from_roots(&[c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]);
        let r = root_values(&p).unwrap();
        assert_eq!(classify(&r, 1e-6, 1e-6), RootClass::HasComplex);
    }

    #[test]
    fn double_root_is_multiple() {
        let p = ComplexPoly::from_roots(&[c(1.0, 0.0), c(1.0, 0.0), c(-2.0, 0.0)]);
        let r = root_values(&p).unwrap();
        assert_eq!(classify(&r, 1e-6, 1e-6), RootClass::HasMultiple);
    }

    #[test]
    fn degree_zero_is_rejected() {
        assert!(roots(&ComplexPoly::one()).is_err());
    }

    #[test]
    fn affine_composition() {
        // (x - 2)^2 composed with 3x + 1 = (3x - 1)^2 = 9x^2 - 6x + 1
        let p = ComplexPoly::from_roots(&[c(2.0, 0.0), c(2.0, 0.0)]);
        let q = p.compose_affine(c(3.0, 0.0), c(1.0, 0.0));
        let want = ComplexPoly::from_real(&[1.0, -6.0, 9.0]);
        assert!(q.relative_distance(&want) < 1e-15);
    }

    #[test]
    fn matching_requires_bijection() {
        let a = [c(0.0, 0.0), c(0.04, 0.0)];
        assert!(matching_distance(&a, &[c(0.03, 0.0), c(1.0, 0.0)]).is_none());
        let a = [c(0.0, 0.0), c(1.0, 0.0)];
        let b = [c(1.0, 1e-9), c(0.0, -1e-9)];
        assert!(matching_distance(&a, &b).unwrap() < 2e-9);
    }

    proptest! {
        #[test]
        fn recovers_well_separated_roots(
            seed in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..9)
        ) {
            let mut pts: Vec<Complex64> = seed.iter().map(|&(a, b)| c(a, b)).collect();
            pts.dedup_by(|a, b| (*a - *b).norm() < 0.3);
            prop_assume!(min_gap(&pts) > 0.3);
            let p = ComplexPoly::from_roots(&pts);
            let got = root_values(&p).unwrap();
            let d = matching_distance(&pts, &got).unwrap();
            prop_assert!(d < 1e-8, "matching distance {d}");
        }
    }
}
