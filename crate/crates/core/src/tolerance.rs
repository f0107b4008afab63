use crate::error::{Error, Result};

/// Every numerical threshold used across the crate, resolved in one place so
/// reports can embed the exact set that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative cutoff for theta/Lambert series.
    pub truncation: f64,
    /// Distance to the lattice below which elliptic functions report a pole.
    pub pole_guard: f64,
    /// Relative singular-value threshold for numerical rank.
    pub rank: f64,
    /// Relative agreement of Q evaluated at two generic base points.
    pub z_consistency: f64,
    /// Imaginary-part threshold (relative to root scale) for "real".
    pub tol_im: f64,
    /// Pairwise gap threshold (relative to root scale) for "distinct".
    pub tol_gap: f64,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    /// |Q(E)| <= at_root * (1+|E|)^(2g+1) means E is treated as a root.
    pub at_root: f64,
    /// Bracket width at which band-edge bisection stops.
    pub band_bisect: f64,
    /// Slack on |Delta| <= 2 and on Im(Delta) = 0 for stability tests.
    pub band: f64,
    pub newton_step: f64,
    pub newton_tol: f64,
    pub f0_boundary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            truncation: 1e-14,
            pole_guard: 1e-6,
            rank: 1e-8,
            z_consistency: 1e-9,
            tol_im: 1e-6,
            tol_gap: 1e-6,
            ode_rtol: 1e-10,
            ode_atol: 1e-12,
            at_root: 1e-4,
            band_bisect: 1e-8,
            band: 1e-8,
            newton_step: 1e-6,
            newton_tol: 1e-10,
            f0_boundary: 1e-9,
        }
    }
}

impl Tolerances {
    /// Name/value pairs in a fixed order, for report headers.
    pub fn entries(&self) -> [(&'static str, f64); 14] {
        [
            ("truncation", self.truncation),
            ("pole_guard", self.pole_guard),
            ("rank", self.rank),
            ("z_consistency", self.z_consistency),
            ("tol_im", self.tol_im),
            ("tol_gap", self.tol_gap),
            ("ode_rtol", self.ode_rtol),
            ("ode_atol", self.ode_atol),
            ("at_root", self.at_root),
            ("band_bisect", self.band_bisect),
            ("band", self.band),
            ("newton_step", self.newton_step),
            ("newton_tol", self.newton_tol),
            ("f0_boundary", self.f0_boundary),
        ]
    }

    /// Overrides one entry by its name in `entries`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tolerance {name} must be positive and finite, got {value}"
            )));
        }
        let slot = match name {
            "truncation" => &mut self.truncation,
            "pole_guard" => &mut self.pole_guard,
            "rank" => &mut self.rank,
            "z_consistency" => &mut self.z_consistency,
            "tol_im" => &mut self.tol_im,
            "tol_gap" => &mut self.tol_gap,
            "ode_rtol" => &mut self.ode_rtol,
            "ode_atol" => &mut self.ode_atol,
            "at_root" => &mut self.at_root,
            "band_bisect" => &mut self.band_bisect,
            "band" => &mut self.band,
            "newton_step" => &mut self.newton_step,
            "newton_tol" => &mut self.newton_tol,
            "f0_boundary" => &mut self.f0_boundary,
            _ => return Err(Error::InvalidArgument(format!("unknown tolerance {name:?}"))),
        };
        *slot = value;
        Ok(())
    }

    pub fn all_positive(&self) -> bool {
        self.entries().iter().all(|(_, v)| *v > 0.0 && v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_by_name() {
        let mut t = Tolerances::default();
        t.set("tol_gap", 1e-9).unwrap();
        assert_eq!(t.tol_gap, 1e-9);
        for (name, _) in Tolerances::default().entries() {
            t.set(name, 0.5).unwrap();
        }
        assert!(t.entries().iter().all(|(_, v)| *v == 0.5));
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("band", -1.0).is_err());
        assert!(t.set("band", f64::NAN).is_err());
    }
}
