use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use finitegap::{MultiplicityTuple, Tolerances};
use num_complex::Complex64;

/// Spectral polynomials, band diagrams and pre-modular forms for the
/// Treibich-Verdier potential sum n_k (n_k + 1) wp(z + omega_k / 2).
///
/// Exit codes: 0 success, 1 usage error, 2 a reported check failed,
/// 3 numerical non-convergence. Grid work uses RAYON_NUM_THREADS threads
/// when set.
#[derive(Debug, Parser)]
#[command(name = "finitegap", version)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write the payload here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Where the summary JSON of a CSV run goes (default: stderr).
    #[arg(long, global = true)]
    pub summary: Option<PathBuf>,
    /// Tolerance override NAME=VALUE, repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE", global = true)]
    pub tol: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral polynomial Q(E), its roots and classification.
    ///
    /// CSV columns: kind (coefficient|root), index, value, residual.
    Qpoly {
        #[arg(long, value_parser = parse_tuple)]
        n: MultiplicityTuple,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        /// Skip the factorization-route cross-check.
        #[arg(long)]
        no_cross_check: bool,
    },
    /// Classification of Q along tau = i b.
    ///
    /// CSV columns: b, classification, genus, min_gap, max_abs_imag,
    /// route_discrepancy, error.
    Scan {
        #[arg(long, value_parser = parse_tuple)]
        n: MultiplicityTuple,
        /// START:STOP:COUNT for b.
        #[arg(long, value_parser = parse_range)]
        b: Range,
        /// Also build Q by factorization at every point.
        #[arg(long)]
        cross_check: bool,
    },
    /// Stability bands {E real : |Delta1(E)| <= 2} on a rectangular torus.
    ///
    /// CSV columns: band, lo, hi. With --trace, a two-column E, Delta1 file
    /// is written for plotting.
    Bands {
        #[arg(long, value_parser = parse_tuple)]
        n: MultiplicityTuple,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        /// START:STOP:COUNT for E.
        #[arg(long = "E", value_parser = parse_range, allow_hyphen_values = true)]
        e: Range,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Unitarity of the monodromy over a complex E grid.
    ///
    /// CSV columns: re, im, delta1, delta2, at_root, unitary, error.
    Unitary {
        #[arg(long, value_parser = parse_tuple)]
        n: MultiplicityTuple,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        /// START:STOP:COUNT for Re E.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        re: Range,
        /// START:STOP:COUNT for Im E.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        im: Range,
    },
    /// Pre-modular forms Z^(n)_{r,s}(tau), n = 1..=4.
    Premodular(PremodularArgs),
}

#[derive(Debug, Args)]
pub struct PremodularArgs {
    #[arg(long, value_enum)]
    pub op: PremodularOp,
    #[arg(long)]
    pub n: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    /// tau for transform.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub tau: Option<Complex64>,
    /// A,B,C,D of the SL(2,Z) element for transform.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// (r, s) grid size per axis for boundary-scan.
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    /// Boundary samples per piece for boundary-scan.
    #[arg(long, default_value_t = 20)]
    pub per_piece: usize,
    #[arg(long, default_value_t = 0.05)]
    pub h_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub h_max: f64,
    /// Smallest |Z| accepted on the boundary.
    #[arg(long, default_value_t = 1e-8)]
    pub floor: f64,
    /// K for the K x K seed lattice of zero-find.
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,
    /// Extra uniformly drawn seeds for zero-find.
    #[arg(long, default_value_t = 0)]
    pub random_seeds: usize,
    /// RNG seed for the extra seeds.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// START:STOP:COUNT for Re tau of heatmap.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub re: Option<Range>,
    /// START:STOP:COUNT for Im tau of heatmap.
    #[arg(long, value_parser = parse_range)]
    pub im: Option<Range>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PremodularOp {
    /// min |Z| over (r, s) at sampled boundary points of F0.
    /// CSV columns: tau, location, min_abs, r, s.
    BoundaryScan,
    /// Newton search from a seed lattice.
    /// CSV columns: seed, tau, residual, iterations, converged, location.
    ZeroFind,
    /// Both sides of the SL(2,Z) transformation law.
    /// CSV columns: lhs, rhs, relative_error.
    Transform,
    /// |Z| over a tau grid. CSV columns: re, im, abs_z.
    Heatmap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        finitegap::spectral::linspace(self.start, self.stop, self.count)
    }
}

pub fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected START:STOP:COUNT, got {s:?}"));
    }
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
    let (start, stop) = (num(parts[0])?, num(parts[1])?);
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|e| format!("{:?}: {e}", parts[2]))?;
    if !start.is_finite() || !stop.is_finite() || stop < start || count == 0 {
        return Err(format!("need finite START <= STOP and COUNT >= 1, got {s:?}"));
    }
    Ok(Range { start, stop, count })
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    Complex64::from_str(s.trim()).map_err(|e| format!("{s:?} is not a complex number a+bi: {e}"))
}

pub fn parse_tuple(s: &str) -> Result<MultiplicityTuple, String> {
    MultiplicityTuple::from_str(s).map_err(|e| e.to_string())
}

pub fn resolve_tolerances(overrides: &[String]) -> Result<Tolerances, String> {
    let mut t = Tolerances::default();
    for o in overrides {
        let (name, value) = o
            .split_once('=')
            .ok_or_else(|| format!("tolerance override {o:?} is not NAME=VALUE"))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|e| format!("tolerance {name}: {e}"))?;
        t.set(name.trim(), v).map_err(|e| e.to_string())?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let r = parse_range("-8:4:4001").unwrap();
        assert_eq!((r.start, r.stop, r.count), (-8.0, 4.0, 4001));
        assert_eq!(r.values().len(), 4001);
        assert!(parse_range("1:0:3").is_err());
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("0:1:0").is_err());
    }

    #[test]
    fn complex_numbers() {
        assert_eq!(parse_complex("0+1.2i").unwrap(), Complex64::new(0.0, 1.2));
        assert_eq!(parse_complex("0.5-2i").unwrap(), Complex64::new(0.5, -2.0));
        assert!(parse_complex("i1").is_err());
    }

    #[test]
    fn tolerance_overrides() {
        let t = resolve_tolerances(&["tol_gap=1e-9".into()]).unwrap();
        assert_eq!(t.tol_gap, 1e-9);
        assert!(resolve_tolerances(&["tol_gap".into()]).is_err());
        assert!(resolve_tolerances(&["tol_gap=-1".into()]).is_err());
    }
}
