//! Monodromy of `y'' = I(z; E) y` along the two lattice cycles, and what can
//! be read off it: Hill discriminants, stability bands, Floquet exponents and
//! the unitarity test.
//!
//! Both cycles start from the base point `(1 + tau)/4`. The horizontal line
//! through it has imaginary part `Im tau / 4` and the line in direction `tau`
//! has lattice coordinate `1/4`, so neither meets a half period for any `tau`.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::elliptic::Lattice;
use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use crate::poly::{self, ComplexPoly};
use crate::spectral::{q_via_factorization, q_via_phi_ansatz, ConditionClass, MultiplicityTuple};
use crate::tolerance::Tolerances;

type Mat = Matrix2<Complex64>;

/// Band edges must match the roots of `Q` to this distance.
pub const EDGE_MATCH_TOL: f64 = 1e-5;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// The generalized Lamé equation for one tuple on one torus, with its
/// spectral polynomial attached.
#[derive(Debug, Clone)]
pub struct GleProblem {
    lattice: Lattice,
    n: MultiplicityTuple,
    tol: Tolerances,
    q: ComplexPoly,
}

#[derive(Debug, Clone)]
pub struct MonodromyRecord {
    pub base: Complex64,
    /// Transfer matrix along `z -> z + 1`, acting on `(y, y')`.
    pub m1: Mat,
    /// Transfer matrix along `z -> z + tau`.
    pub m2: Mat,
    pub delta1: Complex64,
    pub delta2: Complex64,
    pub theta1: Complex64,
    pub theta2: Complex64,
    /// Frobenius norm of `M1 M2 - M2 M1`.
    pub commutator_norm: f64,
    /// `max_j |det M_j - 1|`.
    pub wronskian_drift: f64,
}

impl MonodromyRecord {
    /// Commutator norm divided by `|M1| |M2|`.
    pub fn relative_commutator(&self) -> f64 {
        self.commutator_norm / (self.m1.norm() * self.m2.norm())
    }
}

/// A closed interval of the real `E` axis; `lo` may be `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn is_semi_infinite(&self) -> bool {
        self.lo == f64::NEG_INFINITY
    }

    fn intersect(&self, other: &Band) -> Option<Band> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Band { lo, hi })
    }
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub bands: Vec<Band>,
    /// Bisected band edges, ascending. The grid ends are not edges.
    pub edges: Vec<f64>,
    /// Real parts of the roots of `Q` inside the grid, ascending.
    pub roots: Vec<f64>,
    /// The last band runs into the upper end of the grid and is cut there.
    pub truncated_hi: bool,
    /// Largest edge-to-root distance when the counts agree.
    pub max_edge_error: Option<f64>,
    pub semi_infinite: usize,
    /// Largest `|Im Delta1|` seen on the grid.
    pub max_imag_delta: f64,
    /// Edges match the roots inside the grid within `EDGE_MATCH_TOL`, and the
    /// first band is semi-infinite exactly when the grid starts below every
    /// root.
    pub consistent: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct UnitarityProbe {
    pub unitary: bool,
    pub delta1: Complex64,
    pub delta2: Complex64,
    pub at_root: bool,
    /// `|Q(E)|`.
    pub q_abs: f64,
}

#[derive(Debug, Clone)]
pub struct DualTorusReport {
    pub bands: Vec<Band>,
    /// Bands of the dual torus problem, pulled back to `E`.
    pub dual_bands: Vec<Band>,
    pub intersections: Vec<Band>,
    pub roots: Vec<f64>,
    pub radius: f64,
    /// Intersections not contained in a ball of `radius` around one root.
    pub stray: Vec<Band>,
}

impl DualTorusReport {
    pub fn excluded(&self) -> bool {
        self.stray.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct RootTraceReport {
    pub roots: Vec<Complex64>,
    pub delta1: Vec<Complex64>,
    pub delta2: Vec<Complex64>,
    /// `max` over roots and both cycles of `min(|Delta - 2|, |Delta + 2|)`.
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PeriodicityReport {
    pub samples: usize,
    /// `max |G(z + 1) - G(z)| / |G(z)|`.
    pub drift1: f64,
    /// `max |G(z + tau) - G(z)| / |G(z)|`.
    pub drift2: f64,
    pub tolerance: f64,
}

impl PeriodicityReport {
    pub fn periodic(&self) -> bool {
        self.drift1 <= self.tolerance && self.drift2 <= self.tolerance
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CauchyMean {
    pub center: Complex64,
    pub mean: Complex64,
    pub relative_error: f64,
}

impl GleProblem {
    pub fn new(lattice: Lattice, n: MultiplicityTuple, tol: Tolerances) -> Result<Self> {
        let q = q_via_phi_ansatz(&lattice, &n, &tol)?.q;
        Ok(Self {
            lattice,
            n,
            tol,
            q,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Roots of `Q`. Where the factorization route applies and agrees, the
    /// roots are taken factor by factor: the factors have simple, separated
    /// roots even when `Q` itself has near-double ones.
    pub fn spectral_roots(&self) -> Result<Vec<Complex64>> {
        if let Ok(f) = q_via_factorization(&self.lattice, &self.n) {
            if self.q.relative_distance(&f.q) < 1e-8 {
                let mut out = Vec::with_capacity(self.q.degree());
                for fac in f.factors.iter().filter(|x| x.p.degree() > 0) {
                    out.extend(poly::root_values(&fac.p)?);
                }
                return Ok(out);
            }
        }
        poly::root_values(&self.q)
    }

    pub fn tuple(&self) -> MultiplicityTuple {
        self.n
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn spectral_polynomial(&self) -> &ComplexPoly {
        &self.q
    }

    pub fn default_base(&self) -> Complex64 {
        (ONE + self.lattice.tau()) * 0.25
    }

    /// `I(z; E) = sum n_k (n_k + 1) wp(z + omega_k/2) + E`.
    pub fn potential(&self, z: Complex64, e: Complex64) -> Result<Complex64> {
        let w = self.n.weights();
        let l = &self.lattice;
        let mut v = e;
        match l.wp(z) {
            Ok(wp) => {
                v += wp * w[0];
                for (k, &wk) in w.iter().enumerate().skip(1) {
                    if wk != 0.0 {
                        v += l.half_shift_from_wp(wp, k) * wk;
                    }
                }
            }
            Err(Error::Pole { .. }) if w[0] == 0.0 => {
                for (k, &wk) in w.iter().enumerate().skip(1) {
                    if wk != 0.0 {
                        v += l.wp(z + l.half_period(k))? * wk;
                    }
                }
            }
            Err(e) => return Err(e),
        }
        Ok(v)
    }

    /// Smallest distance from the segment `[a, b]` to a singular point.
    pub fn segment_pole_distance(&self, a: Complex64, b: Complex64) -> f64 {
        let tau = self.lattice.tau();
        let coords = |z: Complex64| {
            let y = z.im / tau.im;
            (z.re - y * tau.re, y)
        };
        let mut best = f64::INFINITY;
        for (k, &nk) in self.n.n().iter().enumerate() {
            if nk == 0 {
                continue;
            }
            let h = self.lattice.half_period(k);
            let (xa, ya) = coords(a - h);
            let (xb, yb) = coords(b - h);
            let (x0, x1) = (xa.min(xb).floor() as i64 - 1, xa.max(xb).ceil() as i64 + 1);
            let (y0, y1) = (ya.min(yb).floor() as i64 - 1, ya.max(yb).ceil() as i64 + 1);
            for m in x0..=x1 {
                for j in y0..=y1 {
                    let p = h + Complex64::new(m as f64, 0.0) + tau * j as f64;
                    best = best.min(point_segment_distance(p, a, b));
                }
            }
        }
        best
    }

    fn options(&self) -> OdeOptions {
        OdeOptions::new(self.tol.ode_rtol, self.tol.ode_atol)
    }

    /// Carries the frame `y` (columns `(y, y')`) along the segment `a -> b`.
    pub fn propagate(&self, a: Complex64, b: Complex64, e: Complex64, y: Mat) -> Result<Mat> {
        let d = self.segment_pole_distance(a, b);
        if d <= self.tol.pole_guard {
            return Err(Error::PathTooClose { distance: d });
        }
        let w = b - a;
        let rhs = |t: f64, s: &[Complex64; 4]| -> Result<[Complex64; 4]> {
            let i = self.potential(a + w * t, e)?;
            Ok([w * s[1], w * i * s[0], w * s[3], w * i * s[2]])
        };
        let y0 = [y[(0, 0)], y[(1, 0)], y[(0, 1)], y[(1, 1)]];
        let (s, _) = ode::integrate(rhs, 0.0, 1.0, y0, &self.options())?;
        Ok(Mat::new(s[0], s[2], s[1], s[3]))
    }

    /// Transfer matrix along `a -> b` from the identity frame.
    pub fn transfer(&self, a: Complex64, b: Complex64, e: Complex64) -> Result<Mat> {
        self.propagate(a, b, e, Mat::identity())
    }

    pub fn monodromy(&self, e: Complex64, base: Option<Complex64>) -> Result<MonodromyRecord> {
        let base = base.unwrap_or_else(|| self.default_base());
        let m1 = self.transfer(base, base + 1.0, e)?;
        let m2 = self.transfer(base, base + self.lattice.tau(), e)?;
        Ok(record(base, m1, m2))
    }

    /// `tr M1`, integrating only the first cycle.
    pub fn delta1(&self, e: Complex64) -> Result<Complex64> {
        let b = self.default_base();
        Ok(self.transfer(b, b + 1.0, e)?.trace())
    }

    pub fn delta2(&self, e: Complex64) -> Result<Complex64> {
        let b = self.default_base();
        Ok(self.transfer(b, b + self.lattice.tau(), e)?.trace())
    }

    fn at_root_threshold(&self, e: Complex64) -> f64 {
        self.tol.at_root * (1.0 + e.norm()).powi(self.q.degree() as i32)
    }

    fn is_stable_trace(&self, d: Complex64) -> bool {
        let slack = self.tol.band * (1.0 + d.norm());
        d.im.abs() <= slack && d.re.abs() <= 2.0 + slack
    }

    pub fn unitarity_probe(&self, e: Complex64) -> Result<UnitarityProbe> {
        let m = self.monodromy(e, None)?;
        let q_abs = self.q.eval(e).norm();
        let at_root = q_abs <= self.at_root_threshold(e);
        Ok(UnitarityProbe {
            unitary: !at_root && self.is_stable_trace(m.delta1) && self.is_stable_trace(m.delta2),
            delta1: m.delta1,
            delta2: m.delta2,
            at_root,
            q_abs,
        })
    }

    fn require_rectangular_neither(&self) -> Result<()> {
        if !self.lattice.is_rectangular() {
            return Err(Error::Precondition(format!(
                "band scans need a rectangular torus, got tau = {}",
                self.lattice.tau()
            )));
        }
        if self.n.condition_class() != ConditionClass::Neither {
            return Err(Error::Precondition(format!(
                "band scans need a NEITHER tuple, ({}) is {}",
                self.n,
                self.n.condition_class()
            )));
        }
        Ok(())
    }

    fn real_roots(&self) -> Result<Vec<f64>> {
        let mut r: Vec<f64> = self.spectral_roots()?.iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(r)
    }

    /// `{E in [lo, hi] : Delta1(E) in [-2, 2]}` with bisected edges.
    pub fn stability_set_1d(&self, lo: f64, hi: f64, steps: usize) -> Result<StabilityReport> {
        self.require_rectangular_neither()?;
        let (bands, max_imag_delta) =
            stable_bands(|x| self.delta1(Complex64::new(x, 0.0)), lo, hi, steps, &self.tol)?;
        let all_roots = self.real_roots()?;
        let roots: Vec<f64> = all_roots.iter().copied().filter(|&r| lo < r && r < hi).collect();
        let truncated_hi = bands.last().is_some_and(|b| b.hi == hi);
        let mut edges: Vec<f64> = bands
            .iter()
            .flat_map(|b| [b.lo, b.hi])
            .filter(|x| x.is_finite())
            .collect();
        if truncated_hi {
            edges.pop();
        }
        let max_edge_error = (edges.len() == roots.len()).then(|| {
            edges
                .iter()
                .zip(&roots)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        });
        let semi_infinite = bands.iter().filter(|b| b.is_semi_infinite()).count();
        let below_all = all_roots.first().is_some_and(|&r| lo < r);
        Ok(StabilityReport {
            consistent: semi_infinite == usize::from(below_all)
                && max_edge_error.is_some_and(|d| d <= EDGE_MATCH_TOL),
            bands,
            edges,
            roots,
            truncated_hi,
            max_edge_error,
            semi_infinite,
            max_imag_delta,
        })
    }

    /// Intersects the stability set with the one seen from the torus
    /// `-1/tau`, both over the real grid `[lo, hi]`.
    pub fn dual_torus_exclusion(
        &self,
        lo: f64,
        hi: f64,
        steps: usize,
        radius: f64,
    ) -> Result<DualTorusReport> {
        self.require_rectangular_neither()?;
        let tau = self.lattice.tau();
        let dual = GleProblem::new(
            Lattice::with_pole_guard(-1.0 / tau, self.tol.truncation, self.tol.pole_guard)?,
            self.n.dual(),
            self.tol,
        )?;
        let t2 = tau * tau;
        let (bands, _) =
            stable_bands(|x| self.delta1(Complex64::new(x, 0.0)), lo, hi, steps, &self.tol)?;
        let (dual_bands, _) =
            stable_bands(|x| dual.delta1(t2 * x), lo, hi, steps, &self.tol)?;
        let roots = self.real_roots()?;
        let intersections: Vec<Band> = bands
            .iter()
            .flat_map(|a| dual_bands.iter().filter_map(move |b| a.intersect(b)))
            .collect();
        let stray = intersections
            .iter()
            .copied()
            .filter(|b| {
                !roots
                    .iter()
                    .any(|&r| (b.lo - r).abs() <= radius && (b.hi - r).abs() <= radius)
            })
            .collect();
        Ok(DualTorusReport {
            bands,
            dual_bands,
            intersections,
            roots,
            radius,
            stray,
        })
    }

    /// Both traces at every root of `Q`.
    pub fn root_trace_check(&self) -> Result<RootTraceReport> {
        let roots = self.spectral_roots()?;
        let mut delta1 = Vec::with_capacity(roots.len());
        let mut delta2 = Vec::with_capacity(roots.len());
        let mut max_deviation: f64 = 0.0;
        for &r in &roots {
            let m = self.monodromy(r, None)?;
            for d in [m.delta1, m.delta2] {
                max_deviation = max_deviation.max((d - 2.0).norm().min((d + 2.0).norm()));
            }
            delta1.push(m.delta1);
            delta2.push(m.delta2);
        }
        Ok(RootTraceReport {
            roots,
            delta1,
            delta2,
            max_deviation,
        })
    }

    /// Checks that `|y1|^2 + |y2|^2` of the Floquet pair is doubly periodic
    /// at the sample points. Refuses energies where the monodromy is not
    /// unitary.
    pub fn developing_map_periodicity(
        &self,
        e: Complex64,
        sample_z: &[Complex64],
    ) -> Result<PeriodicityReport> {
        let probe = self.unitarity_probe(e)?;
        if !probe.unitary {
            return Err(Error::Precondition(format!(
                "monodromy at E = {e} is not unitary (at_root = {}, Delta1 = {}, Delta2 = {})",
                probe.at_root, probe.delta1, probe.delta2
            )));
        }
        let base = self.default_base();
        let m = self.monodromy(e, Some(base))?;
        let frame = floquet_frame(&m.m1, &m.m2).ok_or_else(|| {
            Error::Precondition("monodromy is not diagonalizable at this energy".into())
        })?;
        let tau = self.lattice.tau();
        let g = |y: &Mat| {
            let s = y * frame;
            s[(0, 0)].norm_sqr() + s[(0, 1)].norm_sqr()
        };
        let (mut drift1, mut drift2) = (0.0f64, 0.0f64);
        for &z in sample_z {
            let y = self.propagate(base, z, e, Mat::identity())?;
            let g0 = g(&y);
            let g1 = g(&self.propagate(z, z + 1.0, e, y)?);
            let g2 = g(&self.propagate(z, z + tau, e, y)?);
            drift1 = drift1.max((g1 - g0).abs() / g0);
            drift2 = drift2.max((g2 - g0).abs() / g0);
        }
        Ok(PeriodicityReport {
            samples: sample_z.len(),
            drift1,
            drift2,
            tolerance: self.tol.ode_rtol * 1e2,
        })
    }

    /// Mean of `Delta1` over `points` equispaced nodes on the circle
    /// `|E - center| = radius`, against its value at the center.
    pub fn cauchy_mean_check(
        &self,
        center: Complex64,
        radius: f64,
        points: usize,
    ) -> Result<CauchyMean> {
        let nodes: Vec<f64> = (0..points)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / points as f64)
            .collect();
        let vals = map_grid(&nodes, |a| {
            self.delta1(center + Complex64::from_polar(radius, a))
        });
        let mut sum = ZERO;
        for v in vals {
            sum += v?;
        }
        let mean = sum / points as f64;
        let c = self.delta1(center)?;
        Ok(CauchyMean {
            center: c,
            mean,
            relative_error: (mean - c).norm() / (1.0 + c.norm()),
        })
    }
}

fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

fn record(base: Complex64, m1: Mat, m2: Mat) -> MonodromyRecord {
    let delta1 = m1.trace();
    let delta2 = m2.trace();
    let (theta1, theta2) = floquet_exponents(&m1, &m2);
    MonodromyRecord {
        base,
        commutator_norm: (m1 * m2 - m2 * m1).norm(),
        wronskian_drift: (m1.determinant() - ONE)
            .norm()
            .max((m2.determinant() - ONE).norm()),
        m1,
        m2,
        delta1,
        delta2,
        theta1,
        theta2,
    }
}

/// Eigenvector of `m` for eigenvalue `lambda`, if `m - lambda` has rank one.
fn eigenvector(m: &Mat, lambda: Complex64) -> Option<[Complex64; 2]> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let v1 = [b, lambda - a];
    let v2 = [lambda - d, c];
    let n1 = v1[0].norm() + v1[1].norm();
    let n2 = v2[0].norm() + v2[1].norm();
    let scale = 1e-8 * (1.0 + m.norm());
    if n1.max(n2) <= scale {
        None
    } else if n1 >= n2 {
        Some(v1)
    } else {
        Some(v2)
    }
}

/// `theta1` from the principal arccosine; `theta2` from the eigenvalue of
/// `M2` on the eigenvector of `M1` for `exp(i pi theta1)`, with real part in
/// `(-1, 1]`.
pub fn floquet_exponents(m1: &Mat, m2: &Mat) -> (Complex64, Complex64) {
    let pi = std::f64::consts::PI;
    let theta = |d: Complex64| (d * 0.5).acos() / pi;
    let theta1 = theta(m1.trace());
    let lambda = (Complex64::i() * pi * theta1).exp();
    let theta2 = match eigenvector(m1, lambda) {
        Some(v) => {
            let w = [
                m2[(0, 0)] * v[0] + m2[(0, 1)] * v[1],
                m2[(1, 0)] * v[0] + m2[(1, 1)] * v[1],
            ];
            let mu = (v[0].conj() * w[0] + v[1].conj() * w[1])
                / (v[0].norm_sqr() + v[1].norm_sqr());
            let t = mu.ln() / (Complex64::i() * pi);
            if t.re <= -1.0 {
                t + 2.0
            } else {
                t
            }
        }
        None => theta(m2.trace()),
    };
    (theta1, theta2)
}

/// Columns are common eigenvectors of the commuting pair `(m1, m2)`.
fn floquet_frame(m1: &Mat, m2: &Mat) -> Option<Mat> {
    for m in [m1, m2] {
        let tr = m.trace();
        let disc = (tr * tr - 4.0 * m.determinant()).sqrt();
        if disc.norm() <= 1e-6 * (1.0 + tr.norm()) {
            continue;
        }
        let v1 = eigenvector(m, (tr + disc) * 0.5)?;
        let v2 = eigenvector(m, (tr - disc) * 0.5)?;
        return Some(Mat::new(v1[0], v2[0], v1[1], v2[1]));
    }
    None
}

fn map_grid<T, F>(xs: &[f64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        xs.par_iter().map(|&x| f(x)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        xs.iter().map(|&x| f(x)).collect()
    }
}

/// Real-`E` stability set of a trace function, refined by bisection on
/// `|Re Delta| = 2`. A band touching `lo` is taken to extend to `-inf`; one
/// touching `hi` is cut at `hi`.
fn stable_bands<F>(
    delta: F,
    lo: f64,
    hi: f64,
    steps: usize,
    tol: &Tolerances,
) -> Result<(Vec<Band>, f64)>
where
    F: Fn(f64) -> Result<Complex64> + Sync + Send,
{
    if !(lo < hi) || steps < 2 || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "band grid needs lo < hi and at least 2 steps, got [{lo}, {hi}] x {steps}"
        )));
    }
    let grid = crate::spectral::linspace(lo, hi, steps);
    let vals = map_grid(&grid, &delta);
    let mut deltas = Vec::with_capacity(steps);
    for v in vals {
        deltas.push(v?);
    }
    let max_imag = deltas.iter().map(|d| d.im.abs()).fold(0.0, f64::max);
    let inside = |d: Complex64| d.re.abs() <= 2.0 + tol.band;
    let flags: Vec<bool> = deltas.iter().map(|&d| inside(d)).collect();

    let edge = |a: f64, b: f64, a_inside: bool| -> Result<f64> {
        let (mut a, mut b) = (a, b);
        while b - a > tol.band_bisect {
            let m = 0.5 * (a + b);
            if inside(delta(m)?) == a_inside {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    };

    let mut bands = Vec::new();
    let mut start = flags[0].then_some(f64::NEG_INFINITY);
    for i in 1..steps {
        if flags[i] == flags[i - 1] {
            continue;
        }
        let x = edge(grid[i - 1], grid[i], flags[i - 1])?;
        if flags[i] {
            start = Some(x);
        } else if let Some(s) = start.take() {
            bands.push(Band { lo: s, hi: x });
        }
    }
    if let Some(s) = start {
        bands.push(Band { lo: s, hi });
    }
    Ok((bands, max_imag))
}
