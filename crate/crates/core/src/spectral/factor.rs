//! Spectral polynomial as a product of four Heun `P`-polynomials.
//!
//! For an even total multiplicity `Q = P0 P1 P2 P3`, each factor being the
//! normalized `c_{N+1}` of a Heun equation with a specific exponent choice.
//! Odd totals are first mapped to an even tuple with the same `Q` using the
//! `l`-transform, the reflection `l -> -l - 1` and the half-period
//! relabellings; if no even tuple is reachable the route declines.

use std::collections::{HashSet, VecDeque};

use super::tuple::MultiplicityTuple;
use crate::elliptic::Lattice;
use crate::error::{Error, Result};
use crate::heun::{p_polynomial, TildeAlpha};
use crate::poly::ComplexPoly;

#[derive(Debug, Clone)]
pub struct Factor {
    /// Exponent choice, `None` when the factor is the constant 1.
    pub exponents: Option<TildeAlpha>,
    pub p: ComplexPoly,
}

#[derive(Debug, Clone)]
pub struct FactorRoute {
    pub q: ComplexPoly,
    /// The even-sum tuple whose factorization was used.
    pub used: MultiplicityTuple,
    pub factors: Vec<Factor>,
}

/// Exponent choices for `P0..P3` (`None` for a constant factor). `upper[i]`
/// selects `(n_i + 1)/2` over `-n_i/2`.
pub fn factor_exponents(n: [u32; 4]) -> [Option<[bool; 4]>; 4] {
    let [n0, n1, n2, n3] = n.map(|k| k as i64);
    let pick = |lhs: i64, rhs: i64, ge: [bool; 4], le: [bool; 4]| {
        if lhs >= rhs + 2 {
            Some(ge)
        } else if lhs == rhs {
            None
        } else {
            debug_assert!(lhs <= rhs - 2);
            Some(le)
        }
    };
    [
        Some([false; 4]),
        pick(n0 + n1, n2 + n3, [false, false, true, true], [true, true, false, false]),
        pick(n0 + n2, n1 + n3, [false, true, false, true], [true, false, true, false]),
        pick(n0 + n3, n1 + n2, [false, true, true, false], [true, false, false, true]),
    ]
}

/// `(l0, l1, l2, l3)` for an odd-sum tuple, negatives reflected.
pub fn l_transform(n: [u32; 4]) -> [u32; 4] {
    let [n0, n1, n2, n3] = n.map(|k| k as i64);
    let l = [
        (n0 + n1 + n2 + n3 + 1) / 2,
        (n0 + n1 - n2 - n3 - 1) / 2,
        (n0 - n1 + n2 - n3 - 1) / 2,
        (n0 - n1 - n2 + n3 - 1) / 2,
    ];
    l.map(|v| if v < 0 { (-v - 1) as u32 } else { v as u32 })
}

/// Breadth-first search through the transforms that preserve `Q` for an even
/// tuple. Returns `None` if the closure contains only odd tuples.
pub fn even_representative(n: MultiplicityTuple) -> Option<MultiplicityTuple> {
    if n.parity() == 0 {
        return Some(n);
    }
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(n);
    queue.push_back(n);
    while let Some(t) = queue.pop_front() {
        let mut next: Vec<MultiplicityTuple> = t.translates().to_vec();
        if t.parity() == 1 {
            if let Ok(l) = MultiplicityTuple::new(l_transform(t.n())) {
                next.push(l);
            }
        }
        for s in next {
            if s.parity() == 0 {
                return Some(s);
            }
            if seen.insert(s) {
                queue.push_back(s);
            }
        }
    }
    None
}

pub fn q_via_factorization(l: &Lattice, n: &MultiplicityTuple) -> Result<FactorRoute> {
    let used = even_representative(*n).ok_or(Error::NotConstructible(n.n()))?;
    let mut q = ComplexPoly::one();
    let mut factors = Vec::with_capacity(4);
    for choice in factor_exponents(used.n()) {
        match choice {
            None => factors.push(Factor {
                exponents: None,
                p: ComplexPoly::one(),
            }),
            Some(upper) => {
                let ta = TildeAlpha::from_choice(used.n(), upper)?;
                let p = p_polynomial(l, &ta)?;
                q = &q * &p;
                factors.push(Factor {
                    exponents: Some(ta),
                    p,
                });
            }
        }
    }
    Ok(FactorRoute { q, used, factors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: [u32; 4]) -> MultiplicityTuple {
        MultiplicityTuple::new(n).unwrap()
    }

    #[test]
    fn odd_tuples() {
        assert_eq!(even_representative(t([1, 1, 1, 0])), Some(t([2, 0, 0, 0])));
        assert_eq!(even_representative(t([3, 0, 0, 0])), None);
        assert_eq!(even_representative(t([1, 0, 0, 0])), None);
        assert_eq!(l_transform([3, 0, 0, 0]), [2, 1, 1, 1]);
    }

    #[test]
    fn exponent_table_for_1001() {
        let e = factor_exponents([1, 0, 0, 1]);
        assert_eq!(e[0], Some([false; 4]));
        assert_eq!(e[1], None);
        assert_eq!(e[2], None);
        assert_eq!(e[3], Some([false, true, true, false]));
    }

    #[test]
    fn degrees_add_up() {
        let l = Lattice::new(num_complex::Complex64::new(0.0, 1.0), 1e-14).unwrap();
        for n in [[2, 0, 0, 0], [1, 0, 0, 1], [1, 1, 1, 1], [2, 2, 1, 1], [2, 1, 1, 0]] {
            let n = t(n);
            let r = q_via_factorization(&l, &n).unwrap();
            assert_eq!(r.q.degree(), n.spectral_degree(), "{n}");
        }
    }
}
