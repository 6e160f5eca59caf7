//! Loewner-order comparison and weak majorization.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::HermitianMatrix;
use crate::spectral::eigenvalues;

/// Default relative slack for Loewner verdicts.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Absolute slack used by [`weak_majorization_leq`], scaled by the largest
/// entry magnitude.
pub const MAJORIZATION_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    Leq,
    Geq,
    Equal,
    Incomparable,
}

impl Relation {
    /// `A <= B` holds (including equality).
    pub fn is_leq(self) -> bool {
        matches!(self, Relation::Leq | Relation::Equal)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Leq => "LEQ",
            Relation::Geq => "GEQ",
            Relation::Equal => "EQUAL",
            Relation::Incomparable => "INCOMPARABLE",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of comparing `A` against `B`; `gap_spectrum` holds the ascending
/// eigenvalues of `B - A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LoewnerVerdict {
    pub relation: Relation,
    pub gap_spectrum: Vec<f64>,
    pub tolerance: f64,
}

impl LoewnerVerdict {
    /// Builds the verdict from a gap spectrum (eigenvalues of `B - A`).
    ///
    /// `LEQ` iff `min(gap) >= -tol * (1 + ||B - A||_2)`, `GEQ` iff
    /// `max(gap) <= tol * (1 + ||B - A||_2)`, `EQUAL` iff both.
    pub fn from_gap_spectrum(mut gap_spectrum: Vec<f64>, tolerance: f64) -> Self {
        gap_spectrum.sort_by(|a, b| a.partial_cmp(b).expect("finite gap spectrum"));
        let lo = gap_spectrum.first().copied().unwrap_or(0.0);
        let hi = gap_spectrum.last().copied().unwrap_or(0.0);
        let norm = lo.abs().max(hi.abs());
        let slack = tolerance * (1.0 + norm);
        let leq = lo >= -slack;
        let geq = hi <= slack;
        let relation = match (leq, geq) {
            (true, true) => Relation::Equal,
            (true, false) => Relation::Leq,
            (false, true) => Relation::Geq,
            (false, false) => Relation::Incomparable,
        };
        Self {
            relation,
            gap_spectrum,
            tolerance,
        }
    }

    pub fn holds_leq(&self) -> bool {
        self.relation.is_leq()
    }

    pub fn min_gap(&self) -> f64 {
        self.gap_spectrum.first().copied().unwrap_or(0.0)
    }
}

/// Compares `A` with `B` in the Loewner order at relative tolerance `tol`.
pub fn loewner_compare(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<LoewnerVerdict> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::Parameter(format!("tolerance {tol} must be finite and >= 0")));
    }
    let gap = b.try_sub(a)?;
    Ok(LoewnerVerdict::from_gap_spectrum(eigenvalues(&gap)?, tol))
}

/// Sorts descending.
pub fn descending(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    out.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
    out
}

/// `u ≺_w v`: every sum of the `k` largest entries of `u` is at most the
/// corresponding sum for `v`, up to `1e-9 * scale` where scale is
/// `1 + max |entry|` over both sequences.
pub fn weak_majorization_leq(u: &[f64], v: &[f64]) -> Result<bool> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let scale = 1.0
        + u.iter()
            .chain(v.iter())
            .fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let slack = MAJORIZATION_RTOL * scale;
    let (du, dv) = (descending(u), descending(v));
    let mut su = 0.0;
    let mut sv = 0.0;
    for (a, b) in du.iter().zip(dv.iter()) {
        su += a;
        sv += b;
        if su > sv + slack {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_below_twice_identity() {
        let v = loewner_compare(&HermitianMatrix::identity(3), &HermitianMatrix::identity(3).scale(2.0), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(v.relation, Relation::Leq);
        assert_eq!(v.gap_spectrum, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn incomparable_pair() {
        let a = HermitianMatrix::from_real_diagonal(&[1.0, 3.0]);
        let b = HermitianMatrix::from_real_diagonal(&[2.0, 2.0]);
        let v = loewner_compare(&a, &b, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(v.relation, Relation::Incomparable);
        assert_eq!(v.gap_spectrum, vec![-1.0, 1.0]);
    }

    #[test]
    fn equal_and_geq() {
        let a = HermitianMatrix::from_real_diagonal(&[1.0, 3.0]);
        assert_eq!(loewner_compare(&a, &a, 0.0).unwrap().relation, Relation::Equal);
        let b = HermitianMatrix::from_real_diagonal(&[0.0, 3.0]);
        assert_eq!(loewner_compare(&a, &b, DEFAULT_TOLERANCE).unwrap().relation, Relation::Geq);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(loewner_compare(&HermitianMatrix::identity(2), &HermitianMatrix::identity(3), 1e-9).is_err());
        assert!(weak_majorization_leq(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn majorization_examples() {
        assert!(weak_majorization_leq(&[1.0, 0.0], &[2.0, 0.0]).unwrap());
        assert!(!weak_majorization_leq(&[2.0, 0.0], &[1.0, 1.0]).unwrap());
        assert!(!weak_majorization_leq(&[3.0, 0.0], &[2.0, 2.0]).unwrap());
        // order of entries is irrelevant
        assert!(weak_majorization_leq(&[0.0, 1.0], &[0.5, 1.5]).unwrap());
    }
}
