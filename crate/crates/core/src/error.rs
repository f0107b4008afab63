use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pole: z = {z} lies within {distance:e} of the lattice (guard {guard:e})")]
    Pole { z: Complex64, distance: f64, guard: f64 },

    #[error("Heun recursion denominator vanishes at m = {m} (m + gamma3 = 0)")]
    RecursionDenominator { m: usize },

    #[error("nullspace dimension is not 1 ({detail})")]
    NullspaceDegenerate { detail: String },

    #[error("tuple {0:?} is not constructible by the factorization route")]
    NotConstructible([u32; 4]),

    #[error("root finder did not converge after {iterations} iterations")]
    NoConvergence {
        iterations: usize,
        partial: Vec<Complex64>,
    },

    #[error("integration path passes within {distance:e} of a singular point")]
    PathTooClose { distance: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
