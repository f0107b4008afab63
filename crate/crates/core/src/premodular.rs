//! Pre-modular forms `Z^(n)_{r,s}(tau)` for `n = 1..=4`, their behaviour on
//! the boundary of the `Gamma_0(2)` fundamental domain and Newton search for
//! their zeros.

use std::fmt;

use num_complex::Complex64;

use crate::elliptic::Lattice;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

const MAX_NEWTON: usize = 100;

/// Weight of `Z^(n)`: `n (n + 1) / 2`.
pub fn weight(n: u32) -> u32 {
    n * (n + 1) / 2
}

fn check_order(n: u32) -> Result<()> {
    if (1..=4).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "pre-modular forms are available for n = 1..=4, got {n}"
        )))
    }
}

/// True when `(r, s)` lies on the half-integer lattice, where every
/// `Z^(n)` degenerates.
pub fn is_half_lattice(r: f64, s: f64) -> bool {
    let half = |x: f64| ((2.0 * x) - (2.0 * x).round()).abs() < 1e-12;
    half(r) && half(s)
}

/// `zeta(r + s tau) - r eta1 - s eta2`.
pub fn z_rs(l: &Lattice, r: f64, s: f64) -> Result<Complex64> {
    let u = Complex64::new(r, 0.0) + l.tau() * s;
    Ok(l.zeta(u)? - l.eta1() * r - l.eta2() * s)
}

/// `Z^(n)_{r,s}(tau)` as a polynomial in `Z`, `wp`, `wp'`, `g2`, `g3`.
pub fn z_n(l: &Lattice, r: f64, s: f64, n: u32) -> Result<Complex64> {
    check_order(n)?;
    let z = z_rs(l, r, s)?;
    if n == 1 {
        return Ok(z);
    }
    let u = Complex64::new(r, 0.0) + l.tau() * s;
    let w = l.wp_all(u)?;
    let (p, dp) = (w.wp, w.dwp);
    let (g2, g3) = (l.g2(), l.g3());
    let v = match n {
        2 => z.powi(3) - 3.0 * p * z - dp,
        3 => {
            z.powi(6) - 15.0 * p * z.powi(4) - 20.0 * dp * z.powi(3)
                + (6.75 * g2 - 45.0 * p * p) * z * z
                - 12.0 * p * dp * z
                - 1.25 * dp * dp
        }
        _ => {
            let p2 = p * p;
            z.powi(10) - 45.0 * p * z.powi(8) - 120.0 * dp * z.powi(7)
                + (99.75 * g2 - 630.0 * p2) * z.powi(6)
                - 504.0 * p * dp * z.powi(5)
                - 3.75 * (280.0 * p2 * p - 49.0 * g2 * p - 115.0 * g3) * z.powi(4)
                + 15.0 * (11.0 * g2 - 24.0 * p2) * dp * z.powi(3)
                - 2.25 * (140.0 * p2 * p2 - 245.0 * g2 * p2 + 190.0 * g3 * p + 21.0 * g2 * g2)
                    * z
                    * z
                - (40.0 * p2 * p - 163.0 * g2 * p + 125.0 * g3) * dp * z
                + 0.75 * (25.0 * g2 - 3.0 * p2) * dp * dp
        }
    };
    Ok(v)
}

/// `Z^(n)_{r,s}` at `tau`, building the lattice from `tol`.
pub fn z_n_at(tau: Complex64, r: f64, s: f64, n: u32, tol: &Tolerances) -> Result<Complex64> {
    let l = Lattice::with_pole_guard(tau, tol.truncation, tol.pole_guard)?;
    z_n(&l, r, s, n)
}

/// An element `[[a, b], [c, d]]` of `SL(2, Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sl2([i64; 4]);

impl Sl2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a * d - b * c != 1 {
            return Err(Error::InvalidArgument(format!(
                "[[{a}, {b}], [{c}, {d}]] does not have determinant 1"
            )));
        }
        Ok(Self([a, b, c, d]))
    }

    pub fn entries(&self) -> [i64; 4] {
        self.0
    }

    pub fn act(&self, tau: Complex64) -> Complex64 {
        let [a, b, c, d] = self.0.map(|x| x as f64);
        (tau * a + b) / (tau * c + d)
    }

    pub fn automorphy(&self, tau: Complex64) -> Complex64 {
        let [_, _, c, d] = self.0.map(|x| x as f64);
        tau * c + d
    }

    /// `(r', s')` with `(s', r') = (s, r) gamma^{-1}`.
    pub fn act_rs(&self, r: f64, s: f64) -> (f64, f64) {
        let [a, b, c, d] = self.0.map(|x| x as f64);
        (r * a - s * b, s * d - r * c)
    }

    pub fn is_congruent_to_identity(&self, level: i64) -> bool {
        let [a, b, c, d] = self.0;
        (a - 1).rem_euclid(level) == 0
            && b.rem_euclid(level) == 0
            && c.rem_euclid(level) == 0
            && (d - 1).rem_euclid(level) == 0
    }
}

/// Both sides of `Z^(n)_{r',s'}(gamma tau) = (c tau + d)^w Z^(n)_{r,s}(tau)`.
#[derive(Debug, Clone, Copy)]
pub struct TransformCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `|lhs - rhs| / max(1, |rhs|)`.
    pub relative_error: f64,
}

pub fn transformation_check(
    gamma: &Sl2,
    tau: Complex64,
    r: f64,
    s: f64,
    n: u32,
    tol: &Tolerances,
) -> Result<TransformCheck> {
    let (r2, s2) = gamma.act_rs(r, s);
    let lhs = z_n_at(gamma.act(tau), r2, s2, n, tol)?;
    let rhs = gamma.automorphy(tau).powu(weight(n)) * z_n_at(tau, r, s, n, tol)?;
    Ok(TransformCheck {
        lhs,
        rhs,
        relative_error: (lhs - rhs).norm() / rhs.norm().max(1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum F0Location {
    Interior,
    BoundaryLeft,
    BoundaryRight,
    BoundaryCircle,
    Outside,
}

impl F0Location {
    pub fn as_str(&self) -> &'static str {
        match self {
            F0Location::Interior => "interior",
            F0Location::BoundaryLeft => "boundary_left",
            F0Location::BoundaryRight => "boundary_right",
            F0Location::BoundaryCircle => "boundary_circle",
            F0Location::Outside => "outside",
        }
    }
}

impl fmt::Display for F0Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F0Point {
    pub tau: Complex64,
    pub location: F0Location,
}

/// Locates `tau` relative to `{0 <= Re tau <= 1, |tau - 1/2| >= 1/2}`.
pub fn classify_f0(tau: Complex64, boundary_tol: f64) -> F0Point {
    let x = tau.re;
    let circle = (tau - 0.5).norm() - 0.5;
    let location = if tau.im <= 0.0 || x < -boundary_tol || x > 1.0 + boundary_tol || circle < -boundary_tol {
        F0Location::Outside
    } else if x.abs() <= boundary_tol {
        F0Location::BoundaryLeft
    } else if (x - 1.0).abs() <= boundary_tol {
        F0Location::BoundaryRight
    } else if circle.abs() <= boundary_tol {
        F0Location::BoundaryCircle
    } else {
        F0Location::Interior
    };
    F0Point { tau, location }
}

/// Which of the open triangles `0..=3` of `[0,1] x [0,1/2]` contains `(r, s)`.
pub fn triangle(r: f64, s: f64) -> Option<u8> {
    if !(0.0 < s && s < 0.5 && 0.0 < r && r < 1.0) {
        return None;
    }
    let t = r + s;
    if r < 0.5 {
        if t > 0.5 {
            Some(0)
        } else if t < 0.5 {
            Some(3)
        } else {
            None
        }
    } else if r > 0.5 {
        if t > 1.0 {
            Some(1)
        } else if t < 1.0 {
            Some(2)
        } else {
            None
        }
    } else {
        None
    }
}

/// Cell-centred grid `r = (i + 1/2)/nr`, `s = (j + 1/2)/(2 ns)` over
/// `(0, 1) x (0, 1/2)`.
pub fn rs_grid(nr: usize, ns: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(nr * ns);
    for i in 0..nr {
        for j in 0..ns {
            out.push(((i as f64 + 0.5) / nr as f64, (j as f64 + 0.5) / (2 * ns) as f64));
        }
    }
    out
}

/// `per_piece` points on each of `Re tau = 0`, `Re tau = 1` (heights
/// log-spaced in `[h_min, h_max]`) and on the circle `|tau - 1/2| = 1/2`
/// with `Im tau >= h_min`.
pub fn boundary_taus(per_piece: usize, h_min: f64, h_max: f64) -> Result<Vec<Complex64>> {
    if !(0.0 < h_min && h_min < h_max && h_min < 0.5) || per_piece < 2 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < h_min < min(h_max, 1/2) and per_piece >= 2, got {h_min}, {h_max}, {per_piece}"
        )));
    }
    let step = |k: usize| k as f64 / (per_piece - 1) as f64;
    let mut out = Vec::with_capacity(3 * per_piece);
    for re in [0.0, 1.0] {
        for k in 0..per_piece {
            let h = h_min * (h_max / h_min).powf(step(k));
            out.push(Complex64::new(re, h));
        }
    }
    let phi0 = (2.0 * h_min).asin();
    for k in 0..per_piece {
        let phi = phi0 + (std::f64::consts::PI - 2.0 * phi0) * step(k);
        out.push(Complex64::new(0.5, 0.0) + Complex64::from_polar(0.5, phi));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BoundaryScan {
    pub n: u32,
    pub points: usize,
    pub min_abs: f64,
    /// `(r, s, tau)` attaining `min_abs`.
    pub argmin: (f64, f64, Complex64),
    pub floor: f64,
    pub below_floor: usize,
}

impl BoundaryScan {
    pub fn passed(&self) -> bool {
        self.below_floor == 0 && self.min_abs > 0.0
    }
}

/// `min |Z^(n)|` over `rs x taus`, counting points at or below `floor`.
pub fn boundary_nonvanishing_scan(
    n: u32,
    rs: &[(f64, f64)],
    taus: &[Complex64],
    floor: f64,
    tol: &Tolerances,
) -> Result<BoundaryScan> {
    check_order(n)?;
    if let Some(&(r, s)) = rs.iter().find(|&&(r, s)| is_half_lattice(r, s)) {
        return Err(Error::InvalidArgument(format!(
            "(r, s) = ({r}, {s}) lies on the half-integer lattice"
        )));
    }
    let per_tau = |tau: &Complex64| -> Result<Vec<(f64, f64, f64)>> {
        let l = Lattice::with_pole_guard(*tau, tol.truncation, tol.pole_guard)?;
        rs.iter()
            .map(|&(r, s)| Ok((r, s, z_n(&l, r, s, n)?.norm())))
            .collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Result<Vec<(f64, f64, f64)>>> = {
        use rayon::prelude::*;
        taus.par_iter().map(per_tau).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Result<Vec<(f64, f64, f64)>>> = taus.iter().map(per_tau).collect();

    let mut scan = BoundaryScan {
        n,
        points: 0,
        min_abs: f64::INFINITY,
        argmin: (f64::NAN, f64::NAN, Complex64::new(f64::NAN, f64::NAN)),
        floor,
        below_floor: 0,
    };
    for (tau, row) in taus.iter().zip(rows) {
        for (r, s, v) in row? {
            scan.points += 1;
            if v <= floor {
                scan.below_floor += 1;
            }
            if v < scan.min_abs {
                scan.min_abs = v;
                scan.argmin = (r, s, *tau);
            }
        }
    }
    Ok(scan)
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroSearch {
    pub seed: Complex64,
    pub tau: Complex64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub location: F0Location,
}

impl ZeroSearch {
    pub fn inside_f0(&self) -> bool {
        self.converged && self.location != F0Location::Outside
    }
}

/// Newton iteration in `tau` with a central-difference derivative. Runs that
/// leave the upper half plane or hit a pole end unconverged.
pub fn zero_find(n: u32, r: f64, s: f64, seed: Complex64, tol: &Tolerances) -> Result<ZeroSearch> {
    check_order(n)?;
    if is_half_lattice(r, s) {
        return Err(Error::InvalidArgument(format!(
            "(r, s) = ({r}, {s}) lies on the half-integer lattice"
        )));
    }
    if !(seed.im > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "seed {seed} is not in the upper half plane"
        )));
    }
    let h = tol.newton_step;
    let f = |t: Complex64| z_n_at(t, r, s, n, tol);
    let mut out = ZeroSearch {
        seed,
        tau: seed,
        residual: f64::INFINITY,
        iterations: 0,
        converged: false,
        location: classify_f0(seed, tol.f0_boundary).location,
    };
    let mut tau = seed;
    for it in 1..=MAX_NEWTON {
        out.iterations = it;
        let step = (|| -> Result<(Complex64, Complex64)> {
            let v = f(tau)?;
            let d = (f(tau + h)? - f(tau - h)?) / (2.0 * h);
            Ok((v, v / d))
        })();
        let (v, dt) = match step {
            Ok(x) => x,
            Err(Error::Pole { .. }) | Err(Error::InvalidArgument(_)) => break,
            Err(e) => return Err(e),
        };
        out.residual = v.norm();
        if !dt.re.is_finite() || !dt.im.is_finite() {
            break;
        }
        let next = tau - dt;
        if !(next.im > 0.0) || next.norm() > 1e6 {
            break;
        }
        tau = next;
        out.tau = tau;
        if dt.norm() < tol.newton_tol {
            let v = f(tau)?;
            out.residual = v.norm();
            out.converged = out.residual < tol.newton_tol;
            break;
        }
    }
    out.location = classify_f0(out.tau, tol.f0_boundary).location;
    Ok(out)
}

/// `k x k` seeds in `F0`: real parts evenly inside `(0, 1)`, heights from
/// `0.6` to `2.4`.
pub fn f0_seed_lattice(k: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let x = (i as f64 + 0.5) / k as f64;
            let y = if k == 1 {
                1.0
            } else {
                0.6 + 1.8 * j as f64 / (k - 1) as f64
            };
            out.push(Complex64::new(x, y));
        }
    }
    out
}

pub fn zero_find_multistart(
    n: u32,
    r: f64,
    s: f64,
    seeds: &[Complex64],
    tol: &Tolerances,
) -> Result<Vec<ZeroSearch>> {
    seeds.iter().map(|&t| zero_find(n, r, s, t, tol)).collect()
}
