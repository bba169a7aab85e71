use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Conjugate exponent `p/(p-1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// The exponents `(p1, p2, q)` of the bilinear inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSystem {
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "id")]
pub enum CaseId {
    /// `1 < max(p1, p2) ≤ q`
    #[serde(rename = "I")]
    CaseI,
    /// `min ≤ q < max`; `swapped` when `p2 ≤ q < p1`, so the roles of the indices are
    /// exchanged to reach the form `p1 ≤ q < p2`.
    #[serde(rename = "II")]
    CaseII { swapped: bool },
    /// `q < min(p1, p2)` and `1/q ≤ 1/p1 + 1/p2`
    #[serde(rename = "III")]
    CaseIII,
    /// `q < min(p1, p2)` and `1/q > 1/p1 + 1/p2`
    #[serde(rename = "IV")]
    CaseIV,
    #[serde(rename = "not_covered")]
    NotCovered { reason: String },
}

impl CaseId {
    pub fn label(&self) -> &'static str {
        match self {
            CaseId::CaseI => "I",
            CaseId::CaseII { .. } => "II",
            CaseId::CaseIII => "III",
            CaseId::CaseIV => "IV",
            CaseId::NotCovered { .. } => "not covered",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseId::CaseII { swapped: true } => write!(f, "II (indices swapped)"),
            CaseId::NotCovered { reason } => write!(f, "not covered: {reason}"),
            other => write!(f, "{}", other.label()),
        }
    }
}

impl ExponentSystem {
    pub fn new(p1: f64, p2: f64, q: f64) -> Result<Self> {
        for (name, p) in [("p1", p1), ("p2", p2)] {
            if !(p > 1.0 && p.is_finite()) {
                return Err(Error::Exponent(format!("{name} must lie in (1, ∞), got {p}")));
            }
        }
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::Exponent(format!("q must lie in (0, ∞), got {q}")));
        }
        Ok(Self { p1, p2, q })
    }

    pub fn p(&self, i: usize) -> f64 {
        match i {
            1 => self.p1,
            2 => self.p2,
            _ => panic!("index must be 1 or 2"),
        }
    }

    /// `p_i'`
    pub fn p_conj(&self, i: usize) -> f64 {
        conjugate(self.p(i))
    }

    /// `q'`, defined for `q > 1`.
    pub fn q_conj(&self) -> Option<f64> {
        (self.q > 1.0).then(|| conjugate(self.q))
    }

    /// `r_i` with `1/r_i = 1/q - 1/p_i`, defined for `q < p_i`.
    pub fn r(&self, i: usize) -> Option<f64> {
        let p = self.p(i);
        (self.q < p).then(|| 1.0 / (1.0 / self.q - 1.0 / p))
    }

    /// `k` with `1/k = 1/q - 1/p1 - 1/p2`, defined when positive.
    pub fn k(&self) -> Option<f64> {
        let inv = 1.0 / self.q - 1.0 / self.p1 - 1.0 / self.p2;
        (inv > 0.0).then(|| 1.0 / inv)
    }

    /// The system with the two indices exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            p1: self.p2,
            p2: self.p1,
            q: self.q,
        }
    }

    pub fn dispatch(&self) -> CaseId {
        let Self { p1, p2, q } = *self;
        if q <= 1.0 {
            return CaseId::NotCovered {
                reason: format!("q = {q} ≤ 1: no characterization is available for 0 < q ≤ 1"),
            };
        }
        let (lo, hi) = (p1.min(p2), p1.max(p2));
        if hi <= q {
            CaseId::CaseI
        } else if lo <= q {
            CaseId::CaseII { swapped: p2 <= q }
        } else if 1.0 / q <= 1.0 / p1 + 1.0 / p2 {
            CaseId::CaseIII
        } else {
            CaseId::CaseIV
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derived_exponents() {
        let e = ExponentSystem::new(2.0, 4.0, 2.0).unwrap();
        assert_eq!(e.p_conj(1), 2.0);
        assert_relative_eq!(e.p_conj(2), 4.0 / 3.0);
        assert_eq!(e.q_conj(), Some(2.0));
        assert_eq!(e.r(1), None);
        assert_relative_eq!(e.r(2).unwrap(), 4.0);
        assert_eq!(e.k(), None);
        let e = ExponentSystem::new(4.0, 5.0, 1.5).unwrap();
        assert_relative_eq!(1.0 / e.k().unwrap(), 2.0 / 3.0 - 0.25 - 0.2, max_relative = 1e-14);
    }

    #[test]
    fn dispatch_examples() {
        let d = |p1, p2, q| ExponentSystem::new(p1, p2, q).unwrap().dispatch();
        assert_eq!(d(2.0, 2.0, 2.0), CaseId::CaseI);
        assert_eq!(d(2.0, 3.0, 2.5), CaseId::CaseII { swapped: false });
        assert_eq!(d(3.0, 2.0, 2.5), CaseId::CaseII { swapped: true });
        assert_eq!(d(4.0, 5.0, 1.5), CaseId::CaseIV);
        assert_eq!(d(3.0, 3.0, 1.5), CaseId::CaseIII);
        assert!(matches!(d(2.0, 2.0, 0.8), CaseId::NotCovered { .. }));
    }

    #[test]
    fn rejects_invalid() {
        assert!(ExponentSystem::new(1.0, 2.0, 2.0).is_err());
        assert!(ExponentSystem::new(2.0, 0.5, 2.0).is_err());
        assert!(ExponentSystem::new(2.0, 2.0, 0.0).is_err());
        assert!(ExponentSystem::new(2.0, 2.0, f64::INFINITY).is_err());
    }
}
