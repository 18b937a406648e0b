use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `2/p + 1/q = 1/2`.
pub const ADMISSIBILITY_TOLERANCE: f64 = 1e-12;

/// `(p, q)` on the line `2/p + 1/q = 1/2`. `q = ∞` (at `p = 4`) is the endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub p: f64,
    pub q: f64,
}

impl AdmissiblePair {
    /// The pair with the given `p ≥ 4`.
    pub fn from_p(p: f64) -> Result<Self> {
        if !(p >= 4.0) {
            return Err(Error::InvalidInput(format!("admissible pairs need p >= 4, got {p}")));
        }
        let inv_q = 0.5 - 2.0 / p;
        let q = if inv_q <= 0.0 { f64::INFINITY } else { 1.0 / inv_q };
        Ok(Self { p, q })
    }

    /// Checks the relation for an explicit `(p, q)`.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        let pair = Self { p, q };
        if !(p >= 4.0) || !(q >= 2.0) || pair.defect() > ADMISSIBILITY_TOLERANCE {
            return Err(Error::InvalidInput(format!("(p, q) = ({p}, {q}) is not admissible: 2/p + 1/q = 1/2 fails")));
        }
        Ok(pair)
    }

    /// `|2/p + 1/q − 1/2|`.
    pub fn defect(&self) -> f64 {
        (2.0 / self.p + 1.0 / self.q - 0.5).abs()
    }

    pub fn is_endpoint(&self) -> bool {
        self.q.is_infinite()
    }
}

impl fmt::Display for AdmissiblePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_endpoint() {
            write!(f, "({}, inf)", self.p)
        } else {
            write!(f, "({}, {})", self.p, self.q)
        }
    }
}

/// `(5, 10)`, `(6, 6)`, `(8, 4)`.
pub fn standard_pairs() -> [AdmissiblePair; 3] {
    [AdmissiblePair { p: 5.0, q: 10.0 }, AdmissiblePair { p: 6.0, q: 6.0 }, AdmissiblePair { p: 8.0, q: 4.0 }]
}

/// `count` pairs with `1/p` evenly spaced on `(0, 1/4]`, starting at the endpoint `(4, ∞)`.
pub fn admissible_pairs(count: usize) -> Result<Vec<AdmissiblePair>> {
    if count == 0 {
        return Err(Error::InvalidInput("need at least one pair".into()));
    }
    (0..count)
        .map(|k| {
            let inv_p = 0.25 * (count - k) as f64 / count as f64;
            AdmissiblePair::from_p(1.0 / inv_p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!((AdmissiblePair::from_p(6.0).unwrap().q - 6.0).abs() < 1e-13);
        assert!((AdmissiblePair::from_p(8.0).unwrap().q - 4.0).abs() < 1e-14);
        assert!((AdmissiblePair::from_p(5.0).unwrap().q - 10.0).abs() < 1e-12);
        assert!(AdmissiblePair::from_p(4.0).unwrap().is_endpoint());
        assert!(AdmissiblePair::from_p(3.0).is_err());
        assert!(AdmissiblePair::new(8.0, 8.0 / 3.0).is_err());
        for pair in standard_pairs() {
            assert!(AdmissiblePair::new(pair.p, pair.q).is_ok());
        }
    }

    #[test]
    fn sampled_line() {
        let pairs = admissible_pairs(5).unwrap();
        assert_eq!(pairs.len(), 5);
        assert!(pairs[0].is_endpoint() && pairs[1..].iter().all(|p| !p.is_endpoint()));
        assert!(pairs.iter().all(|p| p.defect() <= ADMISSIBILITY_TOLERANCE));
        assert!(admissible_pairs(0).is_err());
    }
}
