//! Spectral polynomial `Q(E)` of the potential
//! `sum n_k (n_k + 1) wp(z + omega_k / 2)`: construction, roots,
//! classification and checks across the modulus.

mod factor;
mod laurent;
mod phi;
mod tuple;

pub use factor::{
    even_representative, factor_exponents, l_transform, q_via_factorization, Factor, FactorRoute,
};
pub use phi::{q_via_phi_ansatz, PhiRoute};
pub use tuple::{genus_of, ConditionClass, MultiplicityTuple};

use num_complex::Complex64;

use crate::elliptic::Lattice;
use crate::error::{Error, Result};
use crate::poly::{self, ComplexPoly, Root, RootClass};
use crate::tolerance::Tolerances;

/// Root set of `Q` with residual bounds and classification.
#[derive(Debug, Clone)]
pub struct RootReport {
    pub roots: Vec<Root>,
    /// `1e-8 (1 + |r|)^deg Q` for each root, in the same order.
    pub residual_bounds: Vec<f64>,
    pub classification: RootClass,
}

impl RootReport {
    pub fn values(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| r.value).collect()
    }

    pub fn residuals_ok(&self) -> bool {
        self.roots
            .iter()
            .zip(&self.residual_bounds)
            .all(|(r, &b)| r.residual <= b)
    }

    /// Real parts, ascending; meaningful when the classification is real.
    pub fn sorted_real(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.roots.iter().map(|r| r.value.re).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}

pub fn roots_and_classify(q: &ComplexPoly, tol: &Tolerances) -> Result<RootReport> {
    let roots = poly::roots(q)?;
    let deg = q.degree() as i32;
    let residual_bounds = roots
        .iter()
        .map(|r| 1e-8 * (1.0 + r.value.norm()).powi(deg))
        .collect();
    let values: Vec<Complex64> = roots.iter().map(|r| r.value).collect();
    Ok(RootReport {
        classification: poly::classify(&values, tol.tol_im, tol.tol_gap),
        roots,
        residual_bounds,
    })
}

/// Which construction produced `Q` and how well the routes agree.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub phi_z_discrepancy: f64,
    pub phi_kernel_gap: f64,
    /// Relative coefficient distance to the factorization route, when that
    /// route was attempted and is constructible.
    pub route_discrepancy: Option<f64>,
    /// The even tuple used by the factorization route.
    pub factorization_tuple: Option<MultiplicityTuple>,
    /// Why the factorization route was skipped or declined.
    pub factorization_note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub tuple: MultiplicityTuple,
    pub tau: Complex64,
    pub genus: u32,
    pub q: ComplexPoly,
    pub roots: RootReport,
    pub provenance: Provenance,
}

impl SpectralReport {
    pub fn classification(&self) -> RootClass {
        self.roots.classification
    }
}

pub fn make_lattice(tau: Complex64, tol: &Tolerances) -> Result<Lattice> {
    Lattice::with_pole_guard(tau, tol.truncation, tol.pole_guard)
}

/// Builds `Q` by the Phi route and, when `cross_check` is set, compares it
/// with the factorization route.
pub fn spectral_report(
    l: &Lattice,
    n: &MultiplicityTuple,
    tol: &Tolerances,
    cross_check: bool,
) -> Result<SpectralReport> {
    let phi = q_via_phi_ansatz(l, n, tol)?;
    let mut provenance = Provenance {
        phi_z_discrepancy: phi.z_discrepancy,
        phi_kernel_gap: phi.kernel_gap,
        route_discrepancy: None,
        factorization_tuple: None,
        factorization_note: None,
    };
    if cross_check {
        match q_via_factorization(l, n) {
            Ok(f) => {
                provenance.route_discrepancy = Some(phi.q.relative_distance(&f.q));
                provenance.factorization_tuple = Some(f.used);
            }
            Err(e) => provenance.factorization_note = Some(e.to_string()),
        }
    } else {
        provenance.factorization_note = Some("not requested".into());
    }
    let roots = roots_and_classify(&phi.q, tol)?;
    Ok(SpectralReport {
        tuple: *n,
        tau: l.tau(),
        genus: n.genus(),
        q: phi.q,
        roots,
        provenance,
    })
}

/// Roots of `Q` on `tau` and of the relabelled tuple on `-1/tau`, compared
/// after scaling the former by `tau^2`.
#[derive(Debug, Clone)]
pub struct CovarianceReport {
    pub roots: Vec<Complex64>,
    pub dual_roots: Vec<Complex64>,
    pub mapped: Vec<Complex64>,
    pub matching_distance: Option<f64>,
    /// `1 + max |mapped root|`.
    pub scale: f64,
}

pub fn modular_covariance_check(
    l: &Lattice,
    n: &MultiplicityTuple,
    tol: &Tolerances,
) -> Result<CovarianceReport> {
    let tau = l.tau();
    let dual = make_lattice(-1.0 / tau, tol)?;
    let q = q_via_phi_ansatz(l, n, tol)?.q;
    let qd = q_via_phi_ansatz(&dual, &n.dual(), tol)?.q;
    let roots = poly::root_values(&q)?;
    let dual_roots = poly::root_values(&qd)?;
    let mapped: Vec<Complex64> = roots.iter().map(|&e| tau * tau * e).collect();
    let scale = 1.0 + mapped.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(CovarianceReport {
        matching_distance: poly::matching_distance(&mapped, &dual_roots),
        roots,
        dual_roots,
        mapped,
        scale,
    })
}

/// One point of a scan along the imaginary axis.
#[derive(Debug, Clone)]
pub struct ScanPoint {
    pub b: f64,
    pub report: std::result::Result<SpectralReport, Error>,
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// `Q` and its classification for `tau = i b` over a grid of `b`. Point
/// errors are kept in place; output order follows the grid.
pub fn tau_scan(
    n: &MultiplicityTuple,
    b_lo: f64,
    b_hi: f64,
    steps: usize,
    tol: &Tolerances,
    cross_check: bool,
) -> Result<Vec<ScanPoint>> {
    if !(b_lo > 0.0 && b_hi >= b_lo && b_hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "b range [{b_lo}, {b_hi}] must lie in (0, inf)"
        )));
    }
    let grid = linspace(b_lo, b_hi, steps);
    let one = |&b: &f64| ScanPoint {
        b,
        report: make_lattice(Complex64::new(0.0, b), tol)
            .and_then(|l| spectral_report(&l, n, tol, cross_check)),
    };
    #[cfg(feature = "parallel")]
    let out = {
        use rayon::prelude::*;
        grid.par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let out = grid.iter().map(one).collect();
    Ok(out)
}

/// Aggregate of a scan against the expectation for the tuple's class.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSummary {
    pub points: usize,
    pub errors: usize,
    pub real_distinct: usize,
    /// `b` values where the classification is not `real_distinct`.
    pub exceptional: Vec<f64>,
    /// For `NEITHER` tuples: every point real-distinct, no errors.
    pub expectation_met: Option<bool>,
}

pub fn summarize_scan(n: &MultiplicityTuple, scan: &[ScanPoint]) -> ScanSummary {
    let mut s = ScanSummary {
        points: scan.len(),
        errors: 0,
        real_distinct: 0,
        exceptional: Vec::new(),
        expectation_met: None,
    };
    for p in scan {
        match &p.report {
            Ok(r) if r.classification() == RootClass::RealDistinct => s.real_distinct += 1,
            Ok(_) => s.exceptional.push(p.b),
            Err(_) => s.errors += 1,
        }
    }
    if n.condition_class() == ConditionClass::Neither {
        s.expectation_met = Some(s.errors == 0 && s.exceptional.is_empty());
    }
    s
}
