use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which of the two sufficient conditions for non-real spectra a tuple meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConditionClass {
    /// `n1 + n2 - n0 - n3 >= 2` with `n1, n2 >= 1`.
    C1,
    /// `n1 + n2 - n0 - n3 <= -2` with `n0, n3 >= 1`.
    C2,
    Neither,
}

impl ConditionClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionClass::C1 => "C1",
            ConditionClass::C2 => "C2",
            ConditionClass::Neither => "NEITHER",
        }
    }
}

impl fmt::Display for ConditionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Multiplicities `(n0, n1, n2, n3)` of the singular sources at the half
/// periods `0, 1/2, tau/2, (1+tau)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiplicityTuple {
    n: [u32; 4],
}

impl MultiplicityTuple {
    pub fn new(n: [u32; 4]) -> Result<Self> {
        if n.iter().all(|&k| k == 0) {
            return Err(Error::InvalidArgument(
                "at least one multiplicity must be positive".into(),
            ));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> [u32; 4] {
        self.n
    }

    pub fn sum(&self) -> u32 {
        self.n.iter().sum()
    }

    pub fn parity(&self) -> u32 {
        self.sum() % 2
    }

    pub fn genus(&self) -> u32 {
        genus_sorted(self.n)
    }

    /// Degree of the spectral polynomial, `2g + 1`.
    pub fn spectral_degree(&self) -> usize {
        2 * self.genus() as usize + 1
    }

    pub fn condition_class(&self) -> ConditionClass {
        let [n0, n1, n2, n3] = self.n.map(|k| k as i64);
        let d = n1 + n2 - n0 - n3;
        if d >= 2 && n1 >= 1 && n2 >= 1 {
            ConditionClass::C1
        } else if d <= -2 && n0 >= 1 && n3 >= 1 {
            ConditionClass::C2
        } else {
            ConditionClass::Neither
        }
    }

    /// `(n0, n2, n1, n3)`: the tuple seen from the torus `-1/tau`.
    pub fn dual(&self) -> Self {
        let [n0, n1, n2, n3] = self.n;
        Self {
            n: [n0, n2, n1, n3],
        }
    }

    /// The three relabellings obtained by translating `z` by a half period,
    /// all of which leave the spectral polynomial unchanged.
    pub fn translates(&self) -> [Self; 3] {
        let [n0, n1, n2, n3] = self.n;
        [
            Self {
                n: [n1, n0, n3, n2],
            },
            Self {
                n: [n2, n3, n0, n1],
            },
            Self {
                n: [n3, n2, n1, n0],
            },
        ]
    }

    /// `n_k (n_k + 1)`, the potential's coefficient at each half period.
    pub fn weights(&self) -> [f64; 4] {
        self.n.map(|k| (k * (k + 1)) as f64)
    }
}

impl fmt::Display for MultiplicityTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.n;
        write!(f, "{a},{b},{c},{d}")
    }
}

impl FromStr for MultiplicityTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "expected four comma-separated integers, got {s:?}"
            )));
        }
        let mut n = [0u32; 4];
        for (slot, p) in n.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("not a non-negative integer: {p:?}")))?;
        }
        Self::new(n)
    }
}

/// Arithmetic genus of `F^2 = Q(E)`.
pub fn genus_of(n: [u32; 4]) -> Result<u32> {
    Ok(MultiplicityTuple::new(n)?.genus())
}

fn genus_sorted(n: [u32; 4]) -> u32 {
    let mut m = n;
    m.sort_unstable_by(|a, b| b.cmp(a));
    let [m0, m1, m2, m3] = m;
    let sum = m0 + m1 + m2 + m3;
    if sum % 2 == 0 {
        if m0 + m3 >= m1 + m2 {
            m0
        } else {
            (m0 + m1 + m2 - m3) / 2
        }
    } else if m0 > m1 + m2 + m3 {
        m0
    } else {
        sum.div_ceil(2)
    }
}
