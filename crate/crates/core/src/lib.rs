//! Spectral polynomials, monodromy and pre-modular forms for the generalized
//! Lamé equation `y'' = [sum n_k (n_k + 1) wp(z + omega_k / 2) + E] y`.

pub mod elliptic;
pub mod error;
pub mod heun;
pub mod hill;
pub mod ode;
pub mod poly;
pub mod premodular;
pub mod spectral;
pub mod tolerance;

pub use elliptic::{Lattice, WpValues};
pub use error::{Error, Result};
pub use poly::{ComplexPoly, RootClass};
pub use spectral::{MultiplicityTuple, SpectralReport};
pub use tolerance::Tolerances;
pub use hill::{GleProblem, MonodromyRecord};
