//! Truncated Laurent series in a local variable `t`, used to read off
//! principal parts at the half periods.

use num_complex::Complex64;

use crate::elliptic::Lattice;

/// `sum_{e = lo}^{hi} c[e - lo] t^e`; exponents above `hi` are unknown.
#[derive(Debug, Clone)]
pub(crate) struct Series {
    lo: i32,
    c: Vec<Complex64>,
}

impl Series {
    pub fn new(lo: i32, c: Vec<Complex64>) -> Self {
        assert!(!c.is_empty());
        Self { lo, c }
    }

    pub fn constant(v: Complex64, hi: i32) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); (hi + 1) as usize];
        c[0] = v;
        Self::new(0, c)
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.c.len() as i32 - 1
    }

    pub fn coeff(&self, e: i32) -> Complex64 {
        assert!(e <= self.hi(), "exponent {e} beyond known range {}", self.hi());
        if e < self.lo {
            Complex64::new(0.0, 0.0)
        } else {
            self.c[(e - self.lo) as usize]
        }
    }

    pub fn mul(&self, other: &Series) -> Series {
        let lo = self.lo + other.lo;
        let hi = (self.hi() + other.lo).min(other.hi() + self.lo);
        let mut c = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in other.c.iter().enumerate() {
                let k = i + j;
                if k < c.len() {
                    c[k] += a * b;
                }
            }
        }
        Series::new(lo, c)
    }

    pub fn add(&self, other: &Series) -> Series {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().min(other.hi());
        Series::new(lo, (lo..=hi).map(|e| self.coeff(e) + other.coeff(e)).collect())
    }

    pub fn scale(&self, s: Complex64) -> Series {
        Series::new(self.lo, self.c.iter().map(|&v| v * s).collect())
    }

    pub fn derivative(&self) -> Series {
        Series::new(
            self.lo - 1,
            self.c
                .iter()
                .enumerate()
                .map(|(i, &v)| v * (self.lo + i as i32) as f64)
                .collect(),
        )
    }

    pub fn pow(&self, m: u32, hi: i32) -> Series {
        let mut out = Series::constant(Complex64::new(1.0, 0.0), hi);
        for _ in 0..m {
            out = out.mul(self);
        }
        out
    }
}

/// `wp(t)` around its pole, known through exponent `hi`.
pub(crate) fn wp_at_pole(l: &Lattice, hi: i32) -> Series {
    // wp = t^-2 + sum_{k>=2} c_k t^(2k-2)
    let kmax = ((hi + 2) / 2).max(2) as usize;
    let mut ck = vec![Complex64::new(0.0, 0.0); kmax + 1];
    if kmax >= 2 {
        ck[2] = l.g2() / 20.0;
    }
    if kmax >= 3 {
        ck[3] = l.g3() / 28.0;
    }
    for k in 4..=kmax {
        let s: Complex64 = (2..=k - 2).map(|m| ck[m] * ck[k - m]).sum();
        ck[k] = s * 3.0 / (((2 * k + 1) * (k - 3)) as f64);
    }
    let mut c = vec![Complex64::new(0.0, 0.0); (hi + 3) as usize];
    c[0] = Complex64::new(1.0, 0.0);
    for (k, &v) in ck.iter().enumerate().skip(2) {
        let e = 2 * k as i32 - 2;
        if e <= hi {
            c[(e + 2) as usize] = v;
        }
    }
    Series::new(-2, c)
}

/// `wp(t + omega_h / 2)` for `h` in 1..=3, a Taylor series in even powers.
pub(crate) fn wp_at_half_period(l: &Lattice, h: usize, hi: i32) -> Series {
    // f'' = 6 f^2 - g2/2 with f = sum a_j t^(2j)
    let jmax = (hi / 2).max(0) as usize;
    let mut a = vec![Complex64::new(0.0, 0.0); jmax + 1];
    a[0] = l.e_k(h);
    for j in 1..=jmax {
        let mut s: Complex64 = (0..j).map(|i| a[i] * a[j - 1 - i]).sum::<Complex64>() * 6.0;
        if j == 1 {
            s -= l.g2() / 2.0;
        }
        a[j] = s / ((2 * j * (2 * j - 1)) as f64);
    }
    let mut c = vec![Complex64::new(0.0, 0.0); (hi + 1) as usize];
    for (j, &v) in a.iter().enumerate() {
        c[2 * j] = v;
    }
    Series::new(0, c)
}

/// `wp(t + omega_k/2 + omega_j/2)`: the index arithmetic of the half periods
/// is the Klein four-group, i.e. bitwise XOR.
pub(crate) fn shifted_wp(l: &Lattice, k: usize, j: usize, hi: i32) -> Series {
    match k ^ j {
        0 => wp_at_pole(l, hi),
        h => wp_at_half_period(l, h, hi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pole_series_matches_direct_evaluation() {
        let l = Lattice::new(Complex64::new(0.2, 1.1), 1e-14).unwrap();
        let s = wp_at_pole(&l, 16);
        let t = Complex64::new(0.05, 0.03);
        let sum: Complex64 = (-2..=16).map(|e| s.coeff(e) * t.powi(e)).sum();
        assert!((sum - l.wp(t).unwrap()).norm() < 1e-11 * sum.norm());
    }

    #[test]
    fn half_period_series_matches_direct_evaluation() {
        let l = Lattice::new(Complex64::new(0.2, 1.1), 1e-14).unwrap();
        for h in 1..=3 {
            let s = wp_at_half_period(&l, h, 20);
            let t = Complex64::new(0.04, -0.02);
            let sum: Complex64 = (0..=20).map(|e| s.coeff(e) * t.powi(e)).sum();
            let direct = l.wp(t + l.half_period(h)).unwrap();
            assert!((sum - direct).norm() < 1e-11 * direct.norm().max(1.0));
        }
    }

    #[test]
    fn product_tracks_known_range() {
        let p = Series::new(-2, vec![Complex64::new(1.0, 0.0); 5]);
        let q = p.mul(&p);
        assert_eq!(q.hi(), 0);
        assert_eq!(q.coeff(-4), Complex64::new(1.0, 0.0));
        assert_eq!(q.coeff(-3), Complex64::new(2.0, 0.0));
    }
}
