//! Spectral polynomial from the even elliptic solution of the second
//! symmetric product equation `Phi''' - 4 I Phi' - 2 I' Phi = 0`.
//!
//! `Phi = c0(E) + sum_k sum_{m=1}^{n_k} b_{k,m}(E) wp(z + omega_k/2)^m`. The
//! principal parts of the left-hand side at the half periods are linear in the
//! unknowns and affine in `E`, so the coefficient vector is the minimal-degree
//! polynomial kernel of a pencil `A0 + E A1`. That kernel is computed directly
//! (degree `g`, via a block-Toeplitz system), after which `Q` follows from
//! exact polynomial arithmetic.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::laurent::{shifted_wp, Series};
use super::tuple::MultiplicityTuple;
use crate::elliptic::Lattice;
use crate::error::{Error, Result};
use crate::poly::ComplexPoly;
use crate::tolerance::Tolerances;

/// Output of the Phi route, with the internal consistency diagnostics.
#[derive(Debug, Clone)]
pub struct PhiRoute {
    pub q: ComplexPoly,
    /// `c0(E)`, monic of degree `g`.
    pub c0: ComplexPoly,
    /// `b_{k,m}(E)` in basis order (k ascending, then m ascending).
    pub b: Vec<ComplexPoly>,
    /// Relative coefficient distance between `Q` built at two base points.
    pub z_discrepancy: f64,
    /// Smallest over second-smallest singular value of the kernel system.
    pub kernel_gap: f64,
    /// Largest `|E^g coefficient of b| / max|coefficient of b|`.
    pub b_degree_excess: f64,
    /// Sample energies and the numerical nullity of `A(E)` at each.
    pub sample_nullity: Vec<(f64, usize)>,
    /// Half-width of the Chebyshev sample interval.
    pub sample_radius: f64,
}

/// Fixed generic base points for evaluating `Q`.
pub(crate) fn base_points(tau: Complex64) -> [Complex64; 2] {
    [
        Complex64::new(0.27, 0.0) + tau * 0.31,
        Complex64::new(0.23, 0.0) + tau * 0.69,
    ]
}

struct Pencil {
    a0: DMatrix<Complex64>,
    a1: DMatrix<Complex64>,
}

/// Column layout: index 0 is the constant; then `(k, m)` for `m = 1..=n_k`.
fn basis(n: &MultiplicityTuple) -> Vec<(usize, u32)> {
    let mut out = vec![(0, 0)];
    for (k, &nk) in n.n().iter().enumerate() {
        for m in 1..=nk {
            out.push((k, m));
        }
    }
    out
}

fn pencil(l: &Lattice, n: &MultiplicityTuple) -> Pencil {
    let nn = n.n();
    let w = n.weights();
    let cols = basis(n);
    let nmax = *nn.iter().max().unwrap() as i32;
    let hi = 2 * nmax + 6;
    let mut rows_a0: Vec<Vec<Complex64>> = Vec::new();
    let mut rows_a1: Vec<Vec<Complex64>> = Vec::new();

    for k in 0..4 {
        if nn[k] == 0 {
            continue;
        }
        let local: Vec<Series> = (0..4).map(|j| shifted_wp(l, k, j, hi)).collect();
        let mut v = Series::constant(Complex64::new(0.0, 0.0), hi);
        for j in 0..4 {
            if w[j] != 0.0 {
                v = v.add(&local[j].scale(Complex64::new(w[j], 0.0)));
            }
        }
        let dv = v.derivative();
        let mut l0_cols = Vec::with_capacity(cols.len());
        let mut l1_cols = Vec::with_capacity(cols.len());
        for &(j, m) in &cols {
            let f = if m == 0 {
                Series::constant(Complex64::new(1.0, 0.0), hi)
            } else {
                local[j].pow(m, hi)
            };
            let f1 = f.derivative();
            let f3 = f1.derivative().derivative();
            let l0 = f3
                .add(&v.mul(&f1).scale(Complex64::new(-4.0, 0.0)))
                .add(&dv.mul(&f).scale(Complex64::new(-2.0, 0.0)));
            l0_cols.push(l0);
            l1_cols.push(f1.scale(Complex64::new(-4.0, 0.0)));
        }
        let top = 2 * nn[k] as i32 + 3;
        for e in (-top..=-1).step_by(2) {
            rows_a0.push(l0_cols.iter().map(|s| s.coeff(e)).collect());
            rows_a1.push(l1_cols.iter().map(|s| s.coeff(e)).collect());
        }
    }
    let r = rows_a0.len();
    let c = cols.len();
    Pencil {
        a0: DMatrix::from_fn(r, c, |i, j| rows_a0[i][j]),
        a1: DMatrix::from_fn(r, c, |i, j| rows_a1[i][j]),
    }
}

/// Sorted singular values (descending) of `m` after scaling every column
/// to unit norm, plus the right singular vectors as columns in the same order.
fn equilibrated_svd(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>, Vec<f64>) {
    let scales: Vec<f64> = (0..m.ncols())
        .map(|j| {
            let s = m.column(j).norm();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = m.clone();
    for (j, &s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    // Pad with zero rows so the decomposition always returns a full V.
    if scaled.nrows() < scaled.ncols() {
        let (r, extra) = (scaled.nrows(), scaled.ncols() - scaled.nrows());
        scaled = scaled.insert_rows(r, extra, Complex64::new(0.0, 0.0));
    }
    let svd = scaled.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = DMatrix::from_fn(v_t.ncols(), order.len(), |i, j| v_t[(order[j], i)].conj());
    (sv, v, scales)
}

fn nullity(sv: &[f64], rank_tol: f64) -> usize {
    let top = sv[0];
    sv.iter().filter(|&&s| s <= rank_tol * top).count()
}

/// Runs the Phi route for `n` on `l`.
pub fn q_via_phi_ansatz(
    l: &Lattice,
    n: &MultiplicityTuple,
    tol: &Tolerances,
) -> Result<PhiRoute> {
    let g = n.genus() as usize;
    let p = pencil(l, n);
    let (rows, cols) = (p.a0.nrows(), p.a0.ncols());
    let emax = l.e().iter().map(|e| e.norm()).fold(0.0, f64::max);
    let wsum: f64 = n.weights().iter().sum();
    let radius = 4.0 * (1.0 + wsum * emax);

    // Structural check at Chebyshev energies: A(E) has a one-dimensional kernel.
    let samples = 2 * g + 2;
    let mut sample_nullity = Vec::with_capacity(samples);
    for j in 0..samples {
        let x = (std::f64::consts::PI * (2 * j + 1) as f64 / (2 * samples) as f64).cos();
        let e = radius * x;
        let a = &p.a0 + &p.a1 * Complex64::new(e, 0.0);
        let (sv, _, _) = equilibrated_svd(&a);
        let k = nullity(&sv, tol.rank).max(usize::from(cols > rows));
        sample_nullity.push((e, k));
        if k != 1 {
            return Err(Error::NullspaceDegenerate {
                detail: format!("nullity {k} at E = {e:.6e} for ({n})"),
            });
        }
    }

    // The sample radius only sets the conditioning of the kernel system;
    // on degeneracy retry with rescaled radii.
    let mut last_err = None;
    let mut found = None;
    for f in [1.0, 0.5, 2.0, 0.25, 4.0] {
        match polynomial_kernel(&p, g, radius * f, tol.rank) {
            Ok(k) => {
                found = Some((k, radius * f));
                break;
            }
            Err(e) => last_err = Some(e),
        }
    }
    let ((c0, b, kernel_gap), radius) = match found {
        Some(k) => k,
        None => return Err(last_err.expect("at least one attempt")),
    };
    let b_degree_excess = b
        .iter()
        .map(|p| {
            let max = p.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
            if p.degree() < g || max == 0.0 {
                0.0
            } else {
                p.leading().norm() / max
            }
        })
        .fold(0.0, f64::max);

    let [z0, z1] = base_points(l.tau());
    let q0 = q_at(l, n, &c0, &b, z0)?;
    let q1 = q_at(l, n, &c0, &b, z1)?;
    let z_discrepancy = q0.relative_distance(&q1);
    if z_discrepancy > tol.z_consistency {
        return Err(Error::Inconsistent(format!(
            "Q differs between base points by {z_discrepancy:.3e}"
        )));
    }
    let q = q0.monic()?;
    if q.degree() != 2 * g + 1 {
        return Err(Error::Inconsistent(format!(
            "Q has degree {} instead of {}",
            q.degree(),
            2 * g + 1
        )));
    }
    Ok(PhiRoute {
        q,
        c0,
        b,
        z_discrepancy,
        kernel_gap,
        b_degree_excess,
        sample_nullity,
        sample_radius: radius,
    })
}

/// Minimal-degree polynomial kernel `x(E)` of `A0 + E A1`, of degree `g`,
/// normalized so that `c0` is monic. Returns `(c0, b, kernel_gap)`.
fn polynomial_kernel(
    p: &Pencil,
    g: usize,
    radius: f64,
    rank_tol: f64,
) -> Result<(ComplexPoly, Vec<ComplexPoly>, f64)> {
    let (rows, cols) = (p.a0.nrows(), p.a0.ncols());
    // x(eps) = sum_d x_d eps^d with E = radius * eps:
    // A0 x_d + radius A1 x_{d-1} = 0 for d = 0..=g+1.
    let big_r = (g + 2) * rows;
    let big_c = (g + 1) * cols;
    let mut big = DMatrix::<Complex64>::zeros(big_r, big_c);
    let a1s = &p.a1 * Complex64::new(radius, 0.0);
    for d in 0..=g {
        big.view_mut((d * rows, d * cols), (rows, cols)).copy_from(&p.a0);
        big.view_mut(((d + 1) * rows, d * cols), (rows, cols))
            .copy_from(&a1s);
    }
    let (sv, v, scales) = equilibrated_svd(&big);
    let last = sv.len() - 1;
    let kernel_gap = sv[last] / sv[last - 1].max(f64::MIN_POSITIVE);
    if sv[last] > rank_tol * sv[0] || sv[last - 1] <= rank_tol * sv[0] {
        return Err(Error::NullspaceDegenerate {
            detail: format!(
                "degree-{g} kernel at radius {radius:.3e}: smallest singular values {:.3e}, {:.3e} (largest {:.3e})",
                sv[last],
                sv[last - 1],
                sv[0]
            ),
        });
    }
    let x: Vec<Complex64> = (0..big_c).map(|i| v[(i, last)] / scales[i]).collect();

    let unit = |d: usize| Complex64::new(radius.powi(-(d as i32)), 0.0);
    let comp = |i: usize| -> ComplexPoly {
        ComplexPoly::new((0..=g).map(|d| x[d * cols + i] * unit(d)).collect())
    };
    let c0 = comp(0);
    if c0.degree() != g {
        return Err(Error::NullspaceDegenerate {
            detail: format!("c0 has degree {} instead of {g}", c0.degree()),
        });
    }
    let lead = c0.leading();
    let b = (1..cols).map(|i| comp(i).scale(1.0 / lead)).collect();
    Ok((c0.scale(1.0 / lead), b, kernel_gap))
}

/// `Q(E) = I Phi^2 + Phi'^2/4 - Phi Phi''/2` at the base point `z`.
fn q_at(
    l: &Lattice,
    n: &MultiplicityTuple,
    c0: &ComplexPoly,
    b: &[ComplexPoly],
    z: Complex64,
) -> Result<ComplexPoly> {
    let w = n.weights();
    let mut wp = [[Complex64::new(0.0, 0.0); 3]; 4];
    let mut v = Complex64::new(0.0, 0.0);
    for k in 0..4 {
        let vals = l.wp_all(z + l.half_period(k))?;
        wp[k] = [vals.wp, vals.dwp, vals.d2wp];
        v += vals.wp * w[k];
    }
    let mut phi = [c0.clone(), ComplexPoly::zero(), ComplexPoly::zero()];
    for (&(k, m), bk) in basis(n).iter().skip(1).zip(b) {
        let [p, dp, d2p] = wp[k];
        let mf = m as f64;
        let f0 = p.powi(m as i32);
        let f1 = p.powi(m as i32 - 1) * dp * mf;
        let f2 = if m >= 2 {
            p.powi(m as i32 - 2) * dp * dp * (mf * (mf - 1.0))
        } else {
            Complex64::new(0.0, 0.0)
        } + p.powi(m as i32 - 1) * d2p * mf;
        phi[0] = &phi[0] + &bk.scale(f0);
        phi[1] = &phi[1] + &bk.scale(f1);
        phi[2] = &phi[2] + &bk.scale(f2);
    }
    let [p0, p1, p2] = phi;
    let i = ComplexPoly::linear(Complex64::new(1.0, 0.0), v);
    let q = &(&(&i * &(&p0 * &p0)) + &(&p1 * &p1).scale(Complex64::new(0.25, 0.0)))
        - &(&p0 * &p2).scale(Complex64::new(0.5, 0.0));
    Ok(q)
}
