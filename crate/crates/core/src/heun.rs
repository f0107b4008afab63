//! Polynomial solutions of the Heun equation
//!
//! ```text
//! y'' + (g1/(x-t1) + g2/(x-t2) + g3/(x-t3)) y' + (ab (x-t3) - q) / prod(x-tj) y = 0
//! ```
//!
//! with `a = -N`. Expanding `y = sum c_m (x - t3)^m`, each `c_m` is a degree-`m`
//! polynomial in the accessory parameter `q`; a root of `c_{N+1}` gives a
//! polynomial solution of degree at most `N`.

use num_complex::Complex64;

use crate::elliptic::Lattice;
use crate::error::{Error, Result};
use crate::poly::{self, ComplexPoly};

/// Local exponents `(a0, a1, a2, a3)`, each `-n_i/2` or `(n_i+1)/2`, stored
/// doubled so they stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TildeAlpha {
    doubled: [i32; 4],
}

impl TildeAlpha {
    /// From doubled exponents; `-sum / 2` must be a non-negative integer.
    pub fn from_doubled(doubled: [i32; 4]) -> Result<Self> {
        let s: i32 = doubled.iter().sum();
        if s > 0 || s % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "exponents {:?}/2 do not sum to a non-positive integer",
                doubled
            )));
        }
        Ok(Self { doubled })
    }

    /// Picks `(n_i + 1)/2` where `upper[i]` is set and `-n_i/2` otherwise.
    pub fn from_choice(n: [u32; 4], upper: [bool; 4]) -> Result<Self> {
        let mut doubled = [0i32; 4];
        for i in 0..4 {
            doubled[i] = if upper[i] {
                n[i] as i32 + 1
            } else {
                -(n[i] as i32)
            };
        }
        Self::from_doubled(doubled)
    }

    pub fn doubled(&self) -> [i32; 4] {
        self.doubled
    }

    pub fn values(&self) -> [f64; 4] {
        self.doubled.map(|d| d as f64 / 2.0)
    }

    /// `N = -(a0 + a1 + a2 + a3)`.
    pub fn n(&self) -> u32 {
        (-self.doubled.iter().sum::<i32>() / 2) as u32
    }
}

/// Parameters of the Heun equation together with the affine map `E -> q`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeunParams {
    pub t: [Complex64; 3],
    pub gamma: [Complex64; 3],
    pub alpha: Complex64,
    pub beta: Complex64,
    /// `N = -alpha`.
    pub n: u32,
    pub q_slope: Complex64,
    pub q_intercept: Complex64,
}

/// Builds the Heun parameters attached to `ta` on the lattice `l`: `t_i = e_i`,
/// `gamma_i = 2 a_i + 1/2`, `alpha = sum a_i`, `beta = -a0 + 1/2 + a1 + a2 + a3`.
pub fn heun_from_tuple(l: &Lattice, ta: &TildeAlpha) -> Result<HeunParams> {
    let a = ta.values();
    let e = l.e();
    let c = |x: f64| Complex64::new(x, 0.0);
    let alpha = c(a.iter().sum());
    let beta = c(-a[0] + 0.5 + a[1] + a[2] + a[3]);
    let gamma = [c(2.0 * a[1] + 0.5), c(2.0 * a[2] + 0.5), c(2.0 * a[3] + 0.5)];
    let q_intercept = e[0] * (a[2] + a[3]).powi(2)
        + e[1] * (a[1] + a[3]).powi(2)
        + e[2] * (a[1] + a[2]).powi(2)
        - e[2] * alpha * beta;
    let h = HeunParams {
        t: e,
        gamma,
        alpha,
        beta,
        n: ta.n(),
        q_slope: c(0.25),
        q_intercept,
    };
    h.validate()?;
    Ok(h)
}

impl HeunParams {
    pub fn validate(&self) -> Result<()> {
        let [t1, t2, t3] = self.t;
        let scale = 1.0 + t1.norm() + t2.norm() + t3.norm();
        if (t1 - t2).norm() < 1e-12 * scale
            || (t2 - t3).norm() < 1e-12 * scale
            || (t1 - t3).norm() < 1e-12 * scale
        {
            return Err(Error::InvalidArgument(
                "singular points t_i are not distinct".into(),
            ));
        }
        let g3 = self.gamma[2];
        if g3.im == 0.0 && g3.re <= 0.0 && g3.re.fract() == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "gamma3 = {} is a non-positive integer",
                g3.re
            )));
        }
        if (self.alpha + self.n as f64).norm() > 1e-12 {
            return Err(Error::InvalidArgument("alpha must equal -N".into()));
        }
        let fuchs = self.alpha + self.beta + 1.0 - self.gamma.iter().sum::<Complex64>();
        if fuchs.norm() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "alpha + beta + 1 != sum gamma (off by {fuchs})"
            )));
        }
        Ok(())
    }

    pub fn q_of_e(&self, e: Complex64) -> Complex64 {
        self.q_slope * e + self.q_intercept
    }

    pub fn e_of_q(&self, q: Complex64) -> Complex64 {
        (q - self.q_intercept) / self.q_slope
    }

    /// `(t1 - t3)(t2 - t3)`.
    pub fn d(&self) -> Complex64 {
        let [t1, t2, t3] = self.t;
        (t1 - t3) * (t2 - t3)
    }

    /// `c_0, ..., c_{m_max}` as polynomials in `q`.
    pub fn coeff_sequence(&self, m_max: usize) -> Result<Vec<ComplexPoly>> {
        let [t1, t2, t3] = self.t;
        let [g1, g2, g3] = self.gamma;
        let d = self.d();
        let q = ComplexPoly::linear(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let mut c = vec![ComplexPoly::one()];
        let mut prev = ComplexPoly::zero();
        for m in 0..m_max {
            let mf = m as f64;
            let denom = d * (mf + 1.0) * (mf + g3);
            if (mf + g3).norm() < 1e-14 {
                return Err(Error::RecursionDenominator { m });
            }
            let k = (mf - 1.0 + g3) * (t1 + t2 - 2.0 * t3) + (t2 - t3) * g1 + (t1 - t3) * g2;
            let diag = &ComplexPoly::constant(k * mf) + &q;
            let back = (mf - 1.0 + self.alpha) * (mf - 1.0 + self.beta);
            let next = &(&diag * &c[m]) - &prev.scale(back);
            prev = c[m].clone();
            c.push(next.scale(1.0 / denom));
        }
        Ok(c)
    }

    /// `f(x) = sum_{m <= N} c_m(q0) (x - t3)^m`, the truncated series at a root
    /// `q0` of `c_{N+1}`.
    pub fn polynomial_solution(&self, q0: Complex64) -> Result<ComplexPoly> {
        let c = self.coeff_sequence(self.n as usize)?;
        let shifted: Vec<Complex64> = c.iter().map(|cm| cm.eval(q0)).collect();
        Ok(ComplexPoly::new(shifted).compose_affine(Complex64::new(1.0, 0.0), -self.t[2]))
    }

    /// The Heun operator multiplied by `prod (x - t_j)`, applied to `f` at `x`.
    pub fn residual(&self, f: &ComplexPoly, q: Complex64, x: Complex64) -> Complex64 {
        let [t1, t2, t3] = self.t;
        let (u1, u2, u3) = (x - t1, x - t2, x - t3);
        let f0 = f.eval(x);
        let d1 = f.derivative();
        let f1 = d1.eval(x);
        let f2 = d1.derivative().eval(x);
        let [g1, g2, g3] = self.gamma;
        u1 * u2 * u3 * f2
            + (g1 * u2 * u3 + g2 * u1 * u3 + g3 * u1 * u2) * f1
            + (self.alpha * self.beta * u3 - q) * f0
    }
}

/// Monic `P(E)`: `c_{N+1}` rewritten in `E` through `q = E/4 + const`.
pub fn p_polynomial(l: &Lattice, ta: &TildeAlpha) -> Result<ComplexPoly> {
    let h = heun_from_tuple(l, ta)?;
    p_from_params(&h)
}

pub fn p_from_params(h: &HeunParams) -> Result<ComplexPoly> {
    let n = h.n as usize;
    let c = h.coeff_sequence(n + 1)?;
    c[n + 1].compose_affine(h.q_slope, h.q_intercept).monic()
}

/// Which real-root theorem's hypotheses the parameters fall under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SturmRegime {
    /// `gamma3 > 0`, `beta > 0`.
    Positive,
    /// `gamma3 = beta = 1/2 - n3 < 0` with `N >= 2 n3`.
    Reflected { n3: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterlacingReport {
    pub regime: SturmRegime,
    /// Sorted real parts of the roots of `c_m`, `m = 1..=N+1`.
    pub roots: Vec<Vec<f64>>,
    /// Every `c_m` has `m` real simple roots.
    pub all_real: bool,
    /// Consecutive root sets strictly interlace.
    pub interlaced: bool,
    /// Sign of the leading coefficient of `c_m`, `m = 0..=N+1`.
    pub leading_signs: Vec<i8>,
    /// Smallest `m` with `sign(lead c_{m+1}) != sign(lead c_m)`.
    pub first_flip: Option<usize>,
    /// Leading signs follow `+` up to `n3` then alternate (reflected regime),
    /// or alternate from the start (positive regime).
    pub leading_pattern_ok: bool,
    /// Sign of `c_{m+1} c_{m-1}` at every root of `c_m` matches the regime.
    pub recursion_sign_ok: bool,
}

/// Real-rootedness and interlacing of `c_1, ..., c_{N+1}`.
pub fn interlacing_check(h: &HeunParams) -> Result<InterlacingReport> {
    let real_tol = 1e-10;
    let all_real_params = h
        .t
        .iter()
        .chain(h.gamma.iter())
        .chain([h.alpha, h.beta].iter())
        .all(|z| z.im.abs() <= real_tol * (1.0 + z.norm()));
    if !all_real_params {
        return Err(Error::Precondition(
            "interlacing needs real t_i, gamma_i, alpha, beta".into(),
        ));
    }
    let d = h.d().re;
    if d >= 0.0 {
        return Err(Error::Precondition(
            "interlacing needs (t1 - t3)(t2 - t3) < 0".into(),
        ));
    }
    let g3 = h.gamma[2].re;
    let beta = h.beta.re;
    let regime = if g3 > 0.0 && beta > 0.0 {
        SturmRegime::Positive
    } else if g3 < 0.0 && (g3 - beta).abs() < 1e-12 && (0.5 - g3).fract().abs() < 1e-12 {
        let n3 = (0.5 - g3).round() as u32;
        if h.n < 2 * n3 {
            return Err(Error::Precondition(format!(
                "reflected regime needs N >= 2 n3 (N = {}, n3 = {n3})",
                h.n
            )));
        }
        SturmRegime::Reflected { n3 }
    } else {
        return Err(Error::Precondition(format!(
            "gamma3 = {g3}, beta = {beta} fit neither real-root regime"
        )));
    };

    let n = h.n as usize;
    let c: Vec<ComplexPoly> = h
        .coeff_sequence(n + 2)?
        .into_iter()
        .map(|p| p.realify(real_tol))
        .collect();

    let leading_signs: Vec<i8> = c.iter().map(|p| p.leading().re.signum() as i8).collect();
    let first_flip = (0..=n).find(|&m| leading_signs[m + 1] != leading_signs[m]);
    let leading_pattern_ok = (0..=n + 1).all(|m| {
        let want = match regime {
            SturmRegime::Positive => {
                if m % 2 == 0 {
                    1
                } else {
                    -1
                }
            }
            SturmRegime::Reflected { n3 } => {
                let n3 = n3 as usize;
                if m <= n3 || (m - n3).is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            }
        };
        leading_signs[m] == want
    });

    let mut roots = Vec::with_capacity(n + 1);
    let mut all_real = true;
    let mut recursion_sign_ok = true;
    for m in 1..=n + 1 {
        let r = poly::root_values(&c[m])?;
        let scale = 1.0 + r.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let real = r.iter().all(|z| z.im.abs() <= 1e-6 * scale);
        let simple = poly::min_gap(&r) > f64::max(1e-8, 1e-6 * scale);
        all_real &= real && simple;
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if m <= n {
            for &s in &re {
                let x = Complex64::new(s, 0.0);
                let below = c[m - 1].eval(x).re;
                let above = c[m + 1].eval(x).re;
                if below == 0.0 {
                    continue;
                }
                let want_positive = matches!(regime, SturmRegime::Reflected { n3 } if m == n3 as usize);
                if (above * below > 0.0) != want_positive {
                    recursion_sign_ok = false;
                }
            }
        }
        roots.push(re);
    }

    let interlaced = all_real
        && roots.windows(2).all(|w| {
            let (lo, hi) = (&w[0], &w[1]);
            (0..lo.len()).all(|i| hi[i] < lo[i] && lo[i] < hi[i + 1])
        });

    Ok(InterlacingReport {
        regime,
        roots,
        all_real,
        interlaced,
        leading_signs,
        first_flip,
        leading_pattern_ok,
        recursion_sign_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Lattice {
        Lattice::new(Complex64::new(0.0, 1.0), 1e-14).unwrap()
    }

    #[test]
    fn tilde_alpha_validation() {
        assert!(TildeAlpha::from_doubled([-1, 0, 0, 0]).is_err());
        assert!(TildeAlpha::from_doubled([2, 0, 0, 0]).is_err());
        let ta = TildeAlpha::from_choice([2, 2, 1, 1], [false; 4]).unwrap();
        assert_eq!(ta.n(), 3);
        assert_eq!(ta.values(), [-1.0, -1.0, -0.5, -0.5]);
    }

    #[test]
    fn parameter_map_for_2211() {
        let ta = TildeAlpha::from_choice([2, 2, 1, 1], [false; 4]).unwrap();
        let h = heun_from_tuple(&square(), &ta).unwrap();
        assert_eq!(h.n, 3);
        assert!((h.gamma[2] - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!((h.beta - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!((h.alpha - Complex64::new(-3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn first_coefficient_and_degrees() {
        let ta = TildeAlpha::from_choice([2, 2, 1, 1], [false; 4]).unwrap();
        let h = heun_from_tuple(&square(), &ta).unwrap();
        let c = h.coeff_sequence(4).unwrap();
        assert_eq!(c[0], ComplexPoly::one());
        let want = 1.0 / (h.d() * h.gamma[2]);
        assert!((c[1].coeffs()[1] - want).norm() < 1e-14);
        assert!(c[1].coeffs()[0].norm() < 1e-14);
        for (m, cm) in c.iter().enumerate() {
            assert_eq!(cm.degree(), m);
        }
    }

    #[test]
    fn all_zero_exponents_give_linear_p() {
        let ta = TildeAlpha::from_doubled([0, 0, 0, 0]).unwrap();
        let p = p_polynomial(&square(), &ta).unwrap();
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn n_equals_one_interlaces_by_hand() {
        // (2, 0, 0, 0) with a = (-1, 0, 0, 0): gamma3 = 1/2, beta = 3/2.
        let l = Lattice::new(Complex64::new(0.0, 1.3), 1e-14).unwrap();
        let ta = TildeAlpha::from_doubled([-2, 0, 0, 0]).unwrap();
        let h = heun_from_tuple(&l, &ta).unwrap();
        let rep = interlacing_check(&h).unwrap();
        assert_eq!(rep.regime, SturmRegime::Positive);
        assert_eq!(rep.roots.len(), 2);
        let s1 = rep.roots[0][0];
        let (lo, hi) = (rep.roots[1][0], rep.roots[1][1]);
        assert!(lo < s1 && s1 < hi);
        assert!(rep.interlaced && rep.all_real && rep.leading_pattern_ok);
        assert_eq!(rep.first_flip, Some(0));
    }

    #[test]
    fn reflected_regime_needs_room_above_n3() {
        let l = Lattice::new(Complex64::new(0.0, 1.3), 1e-14).unwrap();
        let ta = TildeAlpha::from_doubled([-1, 0, 0, -1]).unwrap();
        let h = heun_from_tuple(&l, &ta).unwrap();
        assert!(matches!(interlacing_check(&h), Err(Error::Precondition(_))));
    }
}
