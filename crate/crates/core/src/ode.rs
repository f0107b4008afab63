//! Adaptive Dormand–Prince 5(4) integration of complex systems over a real
//! parameter interval.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order weights minus the embedded fourth-order ones.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step as a fraction of the interval.
    pub initial_step: f64,
}

impl OdeOptions {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            initial_step: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

fn axpy<const N: usize>(y: &[Complex64; N], terms: &[(f64, &[Complex64; N])], h: f64) -> [Complex64; N] {
    let mut out = *y;
    for &(a, k) in terms {
        for i in 0..N {
            out[i] += k[i] * (a * h);
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` and returns `y(t1)`.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: [Complex64; N],
    opts: &OdeOptions,
) -> Result<([Complex64; N], OdeStats)>
where
    F: FnMut(f64, &[Complex64; N]) -> Result<[Complex64; N]>,
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok((y0, OdeStats::default()));
    }
    let dir = span.signum();
    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut h = span.abs() * opts.initial_step;
    let h_min = span.abs() * 1e-14;
    let mut k1 = f(t, &y)?;
    stats.evaluations += 1;

    while (t1 - t) * dir > 0.0 {
        if stats.accepted + stats.rejected >= MAX_STEPS {
            return Err(Error::StepUnderflow { t });
        }
        let last = h >= (t1 - t).abs();
        if last {
            h = (t1 - t).abs();
        }
        let hs = h * dir;

        let k2 = f(t + C2 * hs, &axpy(&y, &[(A21, &k1)], hs))?;
        let k3 = f(t + C3 * hs, &axpy(&y, &[(A31, &k1), (A32, &k2)], hs))?;
        let k4 = f(t + C4 * hs, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs))?;
        let k5 = f(
            t + C5 * hs,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs),
        )?;
        let k6 = f(
            t + hs,
            &axpy(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                hs,
            ),
        )?;
        let y_new = axpy(
            &y,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            hs,
        );
        let k7 = f(t + hs, &y_new)?;
        stats.evaluations += 6;

        let mut err = 0.0;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                * hs;
            let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            err += (e.norm() / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();

        if err <= 1.0 {
            t = if last { t1 } else { t + hs };
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= if err <= 1.0 { factor } else { factor.min(1.0) };
        if h < h_min {
            return Err(Error::StepUnderflow { t });
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let i = Complex64::new(0.0, 1.0);
        let lambda = Complex64::new(-0.3, 2.0);
        let (y, _) = integrate(
            |_, y: &[Complex64; 1]| Ok([lambda * y[0]]),
            0.0,
            3.0,
            [Complex64::new(1.0, 0.0)],
            &OdeOptions::new(1e-11, 1e-13),
        )
        .unwrap();
        assert!((y[0] - (lambda * 3.0).exp()).norm() < 1e-9);
        let (y, _) = integrate(
            |_, y: &[Complex64; 2]| Ok([y[1], -y[0]]),
            0.0,
            std::f64::consts::PI,
            [Complex64::new(0.0, 0.0), i],
            &OdeOptions::new(1e-11, 1e-13),
        )
        .unwrap();
        assert!(y[0].norm() < 1e-9 && (y[1] + i).norm() < 1e-9);
    }

    #[test]
    fn backwards_and_errors_propagate() {
        let (y, _) = integrate(
            |_, y: &[Complex64; 1]| Ok([y[0]]),
            1.0,
            0.0,
            [Complex64::new(1.0, 0.0)],
            &OdeOptions::new(1e-10, 1e-12),
        )
        .unwrap();
        assert!((y[0].re - (-1.0f64).exp()).abs() < 1e-9);
        let r = integrate(
            |t, y: &[Complex64; 1]| {
                if t > 0.5 {
                    Err(Error::PathTooClose { distance: 0.0 })
                } else {
                    Ok([y[0]])
                }
            },
            0.0,
            1.0,
            [Complex64::new(1.0, 0.0)],
            &OdeOptions::new(1e-10, 1e-12),
        );
        assert!(matches!(r, Err(Error::PathTooClose { .. })));
    }
}
