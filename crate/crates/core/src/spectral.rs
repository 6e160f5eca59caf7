//! Hermitian eigendecomposition (cyclic complex Jacobi) and the functional
//! calculus built on it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::funcspec::ScalarFunction;
use crate::matrix::{CMatrix, HermitianMatrix};

/// Sweep cap for the Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;
/// Converged once off-diagonal Frobenius mass <= this times `||A||_F`.
pub const OFF_DIAGONAL_RTOL: f64 = 1e-14;
/// Positive-definiteness threshold relative to the spectral radius.
pub const POSITIVITY_RTOL: f64 = 1e-10;

/// Components below this modulus are skipped when normalizing eigenvector
/// phases.
const PHASE_FIX_THRESHOLD: f64 = 1e-10;

/// `A = U diag(eigenvalues) U*` with eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub basis: CMatrix,
}

impl SpectralDecomposition {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// `U diag(values) U*`.
    pub fn reconstruct_with(&self, values: &[f64]) -> HermitianMatrix {
        let n = self.basis.nrows();
        let mut scaled = self.basis.clone();
        for j in 0..n {
            let s = Complex64::new(values[j], 0.0);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        HermitianMatrix::from_computed(scaled * self.basis.adjoint())
    }

    /// Functional calculus through a fallible scalar map.
    pub fn map<F>(&self, mut f: F) -> Result<HermitianMatrix>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let values = self
            .eigenvalues
            .iter()
            .map(|&l| f(l))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.reconstruct_with(&values))
    }

    /// Errors unless `min eigenvalue > 1e-10 * spectral radius`.
    pub fn require_positive_definite(&self, context: &str) -> Result<()> {
        let threshold = POSITIVITY_RTOL * self.spectral_radius();
        if self.min() > threshold && self.min() > 0.0 {
            Ok(())
        } else {
            Err(Error::Positivity {
                min_eigenvalue: self.min(),
                context: context.to_string(),
            })
        }
    }
}

fn off_diagonal_mass(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Each rotation first removes the phase of `a_pq` with a diagonal unitary and
/// then applies a real Givens rotation, so the whole iteration is a product
/// of 2x2 unitaries. Output is deterministic: eigenvalues ascending (stable
/// on ties), and the first component above `1e-10` in modulus of every
/// eigenvector is made real and positive.
pub fn spectral_decompose(a: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let n = a.dim();
    let src = a.as_matrix();
    let mut w: Vec<Complex64> = (0..n * n).map(|k| src[(k / n, k % n)]).collect();
    let mut u: Vec<Complex64> = (0..n * n)
        .map(|k| {
            if k / n == k % n {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();

    let norm_f = a.frobenius_norm();
    let target = OFF_DIAGONAL_RTOL * norm_f;
    let mut converged = false;
    let mut sweeps = 0;
    let mut off = off_diagonal_mass(&w, n);

    while sweeps <= MAX_SWEEPS {
        if off <= target {
            converged = true;
            break;
        }
        if sweeps == MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let alpha = w[p * n + p].re;
                let beta = w[q * n + q].re;
                let tau = (beta - alpha) / (2.0 * r);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + 1.0_f64.hypot(tau))
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let eph = phase.conj();
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = eph * (-s);
                let g_qq = eph * c;

                for k in 0..n {
                    let akp = w[k * n + p];
                    let akq = w[k * n + q];
                    w[k * n + p] = akp * g_pp + akq * g_qp;
                    w[k * n + q] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = w[p * n + k];
                    let aqk = w[q * n + k];
                    w[p * n + k] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    w[q * n + k] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                w[p * n + q] = Complex64::new(0.0, 0.0);
                w[q * n + p] = Complex64::new(0.0, 0.0);
                w[p * n + p] = Complex64::new(alpha - t * r, 0.0);
                w[q * n + q] = Complex64::new(beta + t * r, 0.0);

                for k in 0..n {
                    let ukp = u[k * n + p];
                    let ukq = u[k * n + q];
                    u[k * n + p] = ukp * g_pp + ukq * g_qp;
                    u[k * n + q] = ukp * g_pq + ukq * g_qq;
                }
            }
        }
        off = off_diagonal_mass(&w, n);
    }

    if !converged {
        return Err(Error::Convergence {
            sweeps,
            residual: off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        w[i * n + i]
            .re
            .partial_cmp(&w[j * n + j].re)
            .expect("finite eigenvalues")
            .then(i.cmp(&j))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| w[i * n + i].re).collect();
    let mut basis = CMatrix::zeros(n, n);
    for (col, &src_col) in order.iter().enumerate() {
        for row in 0..n {
            basis[(row, col)] = u[row * n + src_col];
        }
        if let Some(lead) = (0..n)
            .map(|row| basis[(row, col)])
            .find(|z| z.norm() > PHASE_FIX_THRESHOLD)
        {
            let rot = lead.conj() / lead.norm();
            for row in 0..n {
                basis[(row, col)] *= rot;
            }
        }
    }

    let decomposition = SpectralDecomposition { eigenvalues, basis };
    let residual = residual_max(a, &decomposition);
    let allowed = 1e-9 * (1.0 + decomposition.spectral_radius());
    if residual > allowed {
        return Err(Error::Convergence { sweeps, residual });
    }
    Ok(decomposition)
}

/// `max |A U - U diag(lambda)|`.
pub fn residual_max(a: &HermitianMatrix, d: &SpectralDecomposition) -> f64 {
    let au = a.as_matrix() * &d.basis;
    let n = a.dim();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..n {
            let diff = au[(i, j)] - d.basis[(i, j)] * d.eigenvalues[j];
            worst = worst.max(diff.norm());
        }
    }
    worst
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(a: &HermitianMatrix) -> Result<Vec<f64>> {
    Ok(spectral_decompose(a)?.eigenvalues)
}

/// `f(A) = U diag(f(lambda_i)) U*`; every eigenvalue must lie in `f`'s domain.
pub fn apply_function(f: &ScalarFunction, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let d = spectral_decompose(a)?;
    d.map(|l| {
        if !f.domain().contains(l) {
            return Err(Error::Domain(format!(
                "eigenvalue {l:e} outside the domain {} of {}",
                f.domain(),
                f.describe()
            )));
        }
        f.eval(l)
    })
}

fn is_nonnegative_integer(r: f64) -> bool {
    r >= 0.0 && r.fract() == 0.0 && r <= i32::MAX as f64
}

/// `A^r` through the functional calculus. Fractional or negative exponents
/// require `A` positive definite.
pub fn matrix_power_real(a: &HermitianMatrix, r: f64) -> Result<HermitianMatrix> {
    if !r.is_finite() {
        return Err(Error::Parameter(format!("exponent {r} is not finite")));
    }
    let d = spectral_decompose(a)?;
    power_from_decomposition(&d, r)
}

pub(crate) fn power_from_decomposition(d: &SpectralDecomposition, r: f64) -> Result<HermitianMatrix> {
    if is_nonnegative_integer(r) {
        let k = r as i32;
        return d.map(|l| Ok(l.powi(k)));
    }
    d.require_positive_definite(&format!("real power {r}"))?;
    d.map(|l| Ok(l.powf(r)))
}

/// Weighted geometric mean `A #_q B = A^{1/2} (A^{-1/2} B A^{-1/2})^q A^{1/2}`.
pub fn geometric_mean_q(a: &HermitianMatrix, b: &HermitianMatrix, q: f64) -> Result<HermitianMatrix> {
    a.check_same_dim(b)?;
    let da = spectral_decompose(a)?;
    da.require_positive_definite("A in A #_q B")?;
    let sqrt_a = da.map(|l| Ok(l.sqrt()))?;
    let inv_sqrt_a = da.map(|l| Ok(1.0 / l.sqrt()))?;
    let c = b.sandwich_by(&inv_sqrt_a)?;
    let dc = spectral_decompose(&c)?;
    if !is_nonnegative_integer(q) {
        dc.require_positive_definite("B in A #_q B (non-integer weight)")?;
    }
    let cq = power_from_decomposition(&dc, q)?;
    cq.sandwich_by(&sqrt_a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::{CatalogFunction, ScalarFunction};

    fn rotation_conjugate(diag: &[f64; 2], theta: f64, phase: f64) -> HermitianMatrix {
        let (s, c) = theta.sin_cos();
        let e = Complex64::from_polar(1.0, phase);
        let r = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(c, 0.0),
                -e * s,
                e.conj() * s,
                Complex64::new(c, 0.0),
            ],
        );
        let d = HermitianMatrix::from_real_diagonal(diag);
        HermitianMatrix::new(&r * d.as_matrix() * r.adjoint()).unwrap()
    }

    #[test]
    fn diagonal_input_sorted() {
        let d = spectral_decompose(&HermitianMatrix::from_real_diagonal(&[3.0, 1.0])).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, 3.0]);
        assert_eq!(d.basis[(1, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(d.basis[(0, 1)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let d = spectral_decompose(&HermitianMatrix::identity(4)).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0; 4]);
    }

    #[test]
    fn conjugated_diagonal_recovers_factors() {
        let a = rotation_conjugate(&[1.0, 2.0], 0.7, 0.3);
        let d = spectral_decompose(&a).unwrap();
        assert!((d.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((d.eigenvalues[1] - 2.0).abs() < 1e-12);
        assert!(residual_max(&a, &d) <= 1e-9);
        let back = d.reconstruct_with(&d.eigenvalues);
        assert!(back.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn phase_fix_makes_leading_component_real_positive() {
        let a = rotation_conjugate(&[-1.0, 5.0], 1.1, 2.0);
        let d = spectral_decompose(&a).unwrap();
        for j in 0..2 {
            let lead = (0..2).map(|i| d.basis[(i, j)]).find(|z| z.norm() > 1e-10).unwrap();
            assert!(lead.im.abs() < 1e-15 && lead.re > 0.0);
        }
    }

    #[test]
    fn identity_function_is_identity() {
        let a = rotation_conjugate(&[-0.5, 2.0], 0.4, 1.0);
        let fa = apply_function(&ScalarFunction::catalog(CatalogFunction::Identity), &a).unwrap();
        assert!(fa.max_abs_diff(&a) < 1e-10);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let a = HermitianMatrix::from_real_diagonal(&[1.0, 4.0]);
        let r = apply_function(&ScalarFunction::catalog(CatalogFunction::Sqrt), &a).unwrap();
        assert!(r.max_abs_diff(&HermitianMatrix::from_real_diagonal(&[1.0, 2.0])) < 1e-14);
    }

    #[test]
    fn exp_matches_power_series() {
        let a = rotation_conjugate(&[0.0, 1.0], 0.9, 0.5);
        let e = apply_function(&ScalarFunction::catalog(CatalogFunction::Exp), &a).unwrap();
        // truncated Taylor series oracle
        let mut term = CMatrix::identity(2, 2);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * a.as_matrix() / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        let series = HermitianMatrix::from_computed(sum);
        assert!(e.max_abs_diff(&series) < 1e-8);
    }

    #[test]
    fn domain_error_names_eigenvalue() {
        let a = HermitianMatrix::from_real_diagonal(&[-2.0, 1.0]);
        let err = apply_function(&ScalarFunction::catalog(CatalogFunction::Log), &a).unwrap_err();
        match err {
            Error::Domain(msg) => assert!(msg.contains("-2e0"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn powers() {
        let i = HermitianMatrix::identity(3);
        assert!(matrix_power_real(&i, -0.5).unwrap().max_abs_diff(&i) < 1e-15);
        let d = HermitianMatrix::from_real_diagonal(&[4.0, 9.0]);
        let s = matrix_power_real(&d, 0.5).unwrap();
        assert!(s.max_abs_diff(&HermitianMatrix::from_real_diagonal(&[2.0, 3.0])) < 1e-14);
        let indefinite = HermitianMatrix::from_real_diagonal(&[-1.0, 1.0]);
        assert!(matches!(
            matrix_power_real(&indefinite, 0.5),
            Err(Error::Positivity { .. })
        ));
        assert!(matrix_power_real(&indefinite, 2.0).is_ok());
    }

    #[test]
    fn geometric_mean_special_cases() {
        let a = HermitianMatrix::from_real_diagonal(&[1.0, 2.0]);
        let b = HermitianMatrix::from_real_diagonal(&[4.0, 8.0]);
        let g = geometric_mean_q(&a, &b, 0.5).unwrap();
        assert!(g.max_abs_diff(&HermitianMatrix::from_real_diagonal(&[2.0, 4.0])) < 1e-12);
        assert!(geometric_mean_q(&a, &b, 1.0).unwrap().max_abs_diff(&b) < 1e-12);
        assert!(geometric_mean_q(&a, &b, 0.0).unwrap().max_abs_diff(&a) < 1e-12);
        let i = HermitianMatrix::identity(2);
        let bq = geometric_mean_q(&i, &b, 0.3).unwrap();
        assert!(bq.max_abs_diff(&matrix_power_real(&b, 0.3).unwrap()) < 1e-12);
    }
}
