//! Dimension groups of Bratteli diagrams given by a finite prefix of
//! incidence matrices followed by one stationary matrix.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::smith::{mat_vec, smith_normal_form, Matrix};
use crate::cantor::OdometerSystem;
use crate::{Error, Result};

pub const DEFAULT_BRATTELI_BOUND: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

/// `ℤ^{V₀} → ℤ^{V₁} → …` where the map out of level `n` is `prefix[n]`
/// for `n < prefix.len()` and `stationary` afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BratteliDiagram {
    prefix: Vec<Matrix>,
    stationary: Matrix,
}

fn nonsingular(a: &Matrix) -> bool {
    let n = a.len();
    n == a.first().map_or(0, Vec::len) && smith_normal_form(a).rank() == n
}

impl BratteliDiagram {
    pub fn new(prefix: Vec<Matrix>, stationary: Matrix) -> Result<Self> {
        let sq = stationary.len();
        if sq == 0 || stationary.iter().any(|r| r.len() != sq) {
            return Err(Error::Invalid("stationary incidence matrix must be square and non-empty".into()));
        }
        let mut dims = Vec::new();
        for (i, a) in prefix.iter().enumerate() {
            let cols = a.first().map_or(0, Vec::len);
            if a.is_empty() || a.iter().any(|r| r.len() != cols) {
                return Err(Error::Invalid(format!("incidence matrix {i} is ragged or empty")));
            }
            dims.push((a.len(), cols));
        }
        for w in dims.windows(2) {
            if w[0].0 != w[1].1 {
                return Err(Error::Invalid("incidence matrix shapes do not chain".into()));
            }
        }
        if let Some(last) = dims.last() {
            if last.0 != sq {
                return Err(Error::Invalid("prefix does not feed the stationary matrix".into()));
            }
        }
        for a in prefix.iter().chain(std::iter::once(&stationary)) {
            if a.iter().flatten().any(|x| x.is_negative()) {
                return Err(Error::Invalid("incidence matrices must be non-negative".into()));
            }
        }
        Ok(BratteliDiagram { prefix, stationary })
    }

    /// Single-vertex diagram of an odometer: multiplication by
    /// `m_{n+1}/m_n`, stationary from the end of the listed prefix.
    pub fn from_odometer(sys: &OdometerSystem) -> Self {
        let len = sys.prefix().len();
        let prefix = (0..len)
            .map(|n| vec![vec![BigInt::from(sys.m(n + 1) / sys.m(n))]])
            .collect();
        BratteliDiagram::new(prefix, vec![vec![BigInt::from(sys.growth())]]).expect("valid odometer data")
    }

    pub fn vertices(&self, level: usize) -> usize {
        match self.prefix.get(level) {
            Some(a) => a[0].len(),
            None => self.stationary.len(),
        }
    }

    fn matrix(&self, level: usize) -> &Matrix {
        self.prefix.get(level).unwrap_or(&self.stationary)
    }

    pub fn push(&self, v: &[BigInt], from: usize, to: usize) -> Vec<BigInt> {
        assert!(to >= from);
        assert_eq!(v.len(), self.vertices(from));
        let mut cur = v.to_vec();
        for n in from..to {
            cur = mat_vec(self.matrix(n), &cur);
        }
        cur
    }

    /// Whether every connecting map from `level` on is injective.
    fn injective_from(&self, level: usize) -> bool {
        self.prefix.iter().skip(level).all(nonsingular) && nonsingular(&self.stationary)
    }

    pub fn equal(&self, a: (usize, &[BigInt]), b: (usize, &[BigInt]), bound: usize) -> Tri {
        let top = a.0.max(b.0);
        let mut x = self.push(a.1, a.0, top);
        let mut y = self.push(b.1, b.0, top);
        for level in top..=top + bound {
            if x == y {
                return Tri::Yes;
            }
            if self.injective_from(level) {
                return Tri::No;
            }
            x = self.push(&x, level, level + 1);
            y = self.push(&y, level, level + 1);
        }
        Tri::Unknown
    }

    /// Positivity in the limit order: some image is entrywise ≥ 0.
    pub fn positive(&self, a: (usize, &[BigInt]), bound: usize) -> Tri {
        let mut x = a.1.to_vec();
        for level in a.0..=a.0 + bound {
            if x.iter().all(|c| !c.is_negative()) {
                return Tri::Yes;
            }
            let nonpositive = x.iter().all(|c| !c.is_positive());
            if nonpositive && x.iter().any(|c| !c.is_zero()) && self.injective_from(level) {
                // −a is a nonzero positive element; cones of simple groups are proper
                return Tri::No;
            }
            x = self.push(&x, level, level + 1);
        }
        Tri::Unknown
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgroup::smith::from_i64;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn odometer_diagram_matches_rationals() {
        let sys = OdometerSystem::uniform(3);
        let d = BratteliDiagram::from_odometer(&sys);
        // 1 at level 1 is 3 at level 2: both equal 1/3
        assert_eq!(d.equal((1, &v(&[1])), (2, &v(&[3])), 16), Tri::Yes);
        assert_eq!(d.equal((1, &v(&[1])), (2, &v(&[4])), 16), Tri::No);
        assert_eq!(d.positive((2, &v(&[-1])), 16), Tri::No);
        assert_eq!(d.positive((2, &v(&[0])), 16), Tri::Yes);
    }

    #[test]
    fn fibonacci_diagram() {
        // stationary [[1,1],[1,0]]: positivity of (a, b) ⇔ aφ + b > 0
        let d = BratteliDiagram::new(vec![], from_i64(&[vec![1, 1], vec![1, 0]])).unwrap();
        assert_eq!(d.positive((0, &v(&[2, -3])), 16), Tri::Yes);
        assert_eq!(d.positive((0, &v(&[-2, 3])), 16), Tri::No);
        assert_eq!(d.equal((0, &v(&[1, 0])), (1, &v(&[1, 1])), 16), Tri::Yes);
    }

    #[test]
    fn singular_maps_stay_unknown() {
        let d = BratteliDiagram::new(vec![], from_i64(&[vec![1, 1], vec![1, 1]])).unwrap();
        assert_eq!(d.equal((0, &v(&[1, 0])), (0, &v(&[0, 1])), 16), Tri::Yes);
        assert_eq!(d.equal((0, &v(&[1, 0])), (0, &v(&[0, 2])), 4), Tri::Unknown);
        assert!(BratteliDiagram::new(vec![], from_i64(&[vec![1, -1], vec![1, 1]])).is_err());
    }
}
