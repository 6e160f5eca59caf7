//! Polynomial compressions `Phi(X) = V* (a_0 I + a_1 X + ... + a_I X^I) V`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{isometry_defect, CMatrix, HermitianMatrix, MatrixJson};
use crate::random::{hermitian_with_spectrum, rng_from_seed};
use crate::spectral::eigenvalues;

/// Allowed `max |V*V - I|`.
pub const ISOMETRY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct PhiMap {
    v: CMatrix,
    coeffs: Vec<f64>,
    positive_idx: Vec<usize>,
    negative_idx: Vec<usize>,
}

impl PhiMap {
    /// `v` is `n x k` with `k <= n` and orthonormal columns; `coeffs` are
    /// `a_0, ..., a_I`.
    pub fn new(v: CMatrix, coeffs: Vec<f64>) -> Result<Self> {
        if v.ncols() == 0 || v.ncols() > v.nrows() {
            return Err(Error::InvalidMatrix(format!(
                "V is {}x{}; need 1 <= k <= n",
                v.nrows(),
                v.ncols()
            )));
        }
        let defect = isometry_defect(&v);
        if !(defect <= ISOMETRY_TOL) {
            return Err(Error::InvalidMatrix(format!(
                "V is not an isometry: max |V*V - I| = {defect:e}"
            )));
        }
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parameter("coefficients must be a non-empty list of finite reals".into()));
        }
        let positive_idx = (0..coeffs.len()).filter(|&i| coeffs[i] >= 0.0).collect();
        let negative_idx = (0..coeffs.len()).filter(|&i| coeffs[i] < 0.0).collect();
        Ok(Self {
            v,
            coeffs,
            positive_idx,
            negative_idx,
        })
    }

    /// `Phi(X) = V* X V`.
    pub fn compression(v: CMatrix) -> Result<Self> {
        Self::new(v, vec![0.0, 1.0])
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Indices with `a_i >= 0`.
    pub fn positive_idx(&self) -> &[usize] {
        &self.positive_idx
    }

    /// Indices with `a_i < 0`.
    pub fn negative_idx(&self) -> &[usize] {
        &self.negative_idx
    }

    pub fn input_dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.v.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.v.nrows() == self.v.ncols()
    }

    /// `a_1 = 1` and every other coefficient zero.
    pub fn is_identity_polynomial(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, &c)| c == if i == 1 { 1.0 } else { 0.0 })
            && self.coeffs.len() >= 2
    }
}

#[derive(Serialize, Deserialize)]
struct PhiMapJson {
    #[serde(rename = "V")]
    v: MatrixJson,
    coeffs: Vec<f64>,
}

impl Serialize for PhiMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PhiMapJson {
            v: MatrixJson::from_matrix(&self.v),
            coeffs: self.coeffs.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PhiMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = PhiMapJson::deserialize(d)?;
        let v = json.v.to_matrix().map_err(serde::de::Error::custom)?;
        PhiMap::new(v, json.coeffs).map_err(serde::de::Error::custom)
    }
}

/// `sum_i a_i X^i` with `X^0 = I` (Horner).
pub fn coefficient_polynomial(coeffs: &[f64], x: &HermitianMatrix) -> HermitianMatrix {
    let n = x.dim();
    let mut acc = HermitianMatrix::identity(n).scale(*coeffs.last().expect("non-empty"));
    for &c in coeffs.iter().rev().skip(1) {
        acc = HermitianMatrix::from_computed(acc.product(x)).shift(c);
    }
    acc
}

/// `V* (sum_i a_i X^i) V`.
pub fn phi_apply(phi: &PhiMap, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    if x.dim() != phi.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: phi.input_dim(),
            found: x.dim(),
        });
    }
    coefficient_polynomial(&phi.coeffs, x).congruence(&phi.v)
}

/// `(Phi(A))^j`: a matrix power of the image, not a `j`-fold composition.
pub fn phi_power(phi: &PhiMap, a: &HermitianMatrix, j: u32) -> Result<HermitianMatrix> {
    Ok(phi_apply(phi, a)?.powi(j))
}

/// Outcome of [`is_normalized_positive_linear`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NplEvidence {
    pub identity_polynomial: bool,
    /// `max |Phi(I) - I|`.
    pub normalization_defect: f64,
    /// `max |Phi(2I) - 2 Phi(I)|`.
    pub scaling_defect: f64,
    pub positivity_trials: usize,
    /// Most negative eigenvalue of `Phi(P)` over the PSD trial inputs.
    pub worst_positivity: f64,
    pub violations: Vec<String>,
}

/// Normalized positive linear test: structural (the polynomial is `x`) plus
/// positivity on `trials` random PSD inputs drawn from `seed`.
pub fn is_normalized_positive_linear(phi: &PhiMap, trials: usize, seed: u64) -> Result<(bool, NplEvidence)> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let n = phi.input_dim();
    let id = HermitianMatrix::identity(n);
    let phi_i = phi_apply(phi, &id)?;
    let phi_2i = phi_apply(phi, &id.scale(2.0))?;
    let mut ev = NplEvidence {
        identity_polynomial: phi.is_identity_polynomial(),
        normalization_defect: phi_i.max_abs_diff(&HermitianMatrix::identity(phi.output_dim())),
        scaling_defect: phi_2i.max_abs_diff(&phi_i.scale(2.0)),
        positivity_trials: trials,
        worst_positivity: f64::INFINITY,
        violations: Vec::new(),
    };
    if !ev.identity_polynomial {
        ev.violations
            .push(format!("polynomial {:?} is not the identity polynomial", phi.coeffs));
    }
    if ev.normalization_defect > 1e-10 {
        ev.violations
            .push(format!("Phi(I) differs from I by {:e}", ev.normalization_defect));
    }
    if ev.scaling_defect > 1e-10 {
        ev.violations
            .push(format!("Phi(2I) differs from 2 Phi(I) by {:e}", ev.scaling_defect));
    }
    let mut rng = rng_from_seed(seed);
    for t in 0..trials {
        let p = hermitian_with_spectrum(n, 0.0, 1.0, &mut rng)?;
        let image = phi_apply(phi, &p)?;
        let low = eigenvalues(&image)?[0];
        ev.worst_positivity = ev.worst_positivity.min(low);
        if low < -1e-10 * (1.0 + image.max_abs()) {
            ev.violations
                .push(format!("trial {t}: Phi(P) has eigenvalue {low:e} for PSD P"));
        }
    }
    Ok((ev.violations.is_empty(), ev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_isometry, random_unitary};

    fn sample(n: usize, seed: u64) -> HermitianMatrix {
        hermitian_with_spectrum(n, -1.0, 2.0, &mut rng_from_seed(seed)).unwrap()
    }

    #[test]
    fn rejects_non_isometry() {
        let v = CMatrix::identity(3, 2) * num_complex::Complex64::new(2.0, 0.0);
        assert!(PhiMap::new(v, vec![0.0, 1.0]).is_err());
        assert!(PhiMap::new(CMatrix::identity(2, 3), vec![1.0]).is_err());
    }

    #[test]
    fn index_sets_follow_signs() {
        let phi = PhiMap::new(CMatrix::identity(2, 2), vec![0.0, -1.0, 2.0]).unwrap();
        assert_eq!(phi.positive_idx(), &[0, 2]);
        assert_eq!(phi.negative_idx(), &[1]);
    }

    #[test]
    fn identity_polynomial_cases() {
        let mut rng = rng_from_seed(1);
        let u = random_unitary(3, &mut rng);
        let phi = PhiMap::compression(u.clone()).unwrap();
        let x = sample(3, 2);
        assert!(phi_apply(&phi, &x).unwrap().max_abs_diff(&x.congruence(&u).unwrap()) < 1e-14);
        let w = random_isometry(4, 2, &mut rng);
        let phi = PhiMap::compression(w).unwrap();
        let img = phi_apply(&phi, &HermitianMatrix::identity(4)).unwrap();
        assert!(img.max_abs_diff(&HermitianMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn term_by_term_sum() {
        let v = random_isometry(4, 3, &mut rng_from_seed(3));
        let phi = PhiMap::new(v.clone(), vec![0.7, -1.2, 0.4]).unwrap();
        let x = sample(4, 4);
        let id = HermitianMatrix::identity(4);
        let direct = &(&id.congruence(&v).unwrap().scale(0.7) + &x.congruence(&v).unwrap().scale(-1.2))
            + &x.square().congruence(&v).unwrap().scale(0.4);
        assert!(phi_apply(&phi, &x).unwrap().max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn powers_and_square_unitary() {
        let x = sample(3, 5);
        let w = random_isometry(3, 2, &mut rng_from_seed(6));
        let phi = PhiMap::compression(w).unwrap();
        assert!(phi_power(&phi, &x, 0).unwrap().max_abs_diff(&HermitianMatrix::identity(2)) == 0.0);
        assert!(phi_power(&phi, &x, 1).unwrap().max_abs_diff(&phi_apply(&phi, &x).unwrap()) == 0.0);
        let squared = phi_power(&phi, &x, 2).unwrap();
        assert!(squared.max_abs_diff(&phi_apply(&phi, &x.square()).unwrap()) > 1e-6);
        let u = PhiMap::compression(random_unitary(3, &mut rng_from_seed(8))).unwrap();
        let sq = phi_power(&u, &x, 2).unwrap();
        assert!(sq.max_abs_diff(&phi_apply(&u, &x.square()).unwrap()) < 1e-12);
    }

    #[test]
    fn npl_detection() {
        let v = random_isometry(3, 2, &mut rng_from_seed(9));
        let (ok, ev) = is_normalized_positive_linear(&PhiMap::compression(v.clone()).unwrap(), 10, 1).unwrap();
        assert!(ok, "{ev:?}");
        let (ok, ev) = is_normalized_positive_linear(&PhiMap::new(v.clone(), vec![1.0, 0.0]).unwrap(), 5, 1).unwrap();
        assert!(!ok && ev.scaling_defect > 0.5);
        let (ok, _) = is_normalized_positive_linear(&PhiMap::new(v, vec![0.0, 0.0, 1.0]).unwrap(), 5, 1).unwrap();
        assert!(!ok);
    }

    #[test]
    fn json_round_trip() {
        let v = random_isometry(3, 2, &mut rng_from_seed(10));
        let phi = PhiMap::new(v, vec![0.5, 0.25]).unwrap();
        let text = serde_json::to_string(&phi).unwrap();
        assert!(text.starts_with("{\"V\":{\"n\":3"));
        let back: PhiMap = serde_json::from_str(&text).unwrap();
        assert_eq!(back, phi);
    }
}
