//! Seeded random matrices and the per-trial seed-splitting rule.
//!
//! Every generator takes an explicit 64-bit seed and draws from a
//! `ChaCha8Rng`, so the produced bytes do not depend on platform or thread.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::loewner::{loewner_compare, DEFAULT_TOLERANCE};
use crate::matrix::{CMatrix, HermitianMatrix};
use crate::spectral::{eigenvalues, matrix_power_real};

pub type Rng64 = ChaCha8Rng;

/// The 64-bit finalizer of SplitMix64.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Seed of trial `index` under base seed `seed`:
/// `mix64(seed + (index + 1) * 0x9e3779b97f4a7c15)` with wrapping arithmetic.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_gaussian(rng: &mut Rng64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// `n x k` matrix with orthonormal columns: Gram-Schmidt (two passes) of a
/// complex Gaussian matrix.
pub fn random_isometry(n: usize, k: usize, rng: &mut Rng64) -> CMatrix {
    assert!(k >= 1 && k <= n, "isometry needs 1 <= k <= n");
    let mut v = CMatrix::from_fn(n, k, |_, _| complex_gaussian(rng));
    for j in 0..k {
        for _ in 0..2 {
            for i in 0..j {
                let proj: Complex64 = (0..n).map(|r| v[(r, i)].conj() * v[(r, j)]).sum();
                for r in 0..n {
                    let vi = v[(r, i)];
                    v[(r, j)] -= proj * vi;
                }
            }
        }
        let norm = (0..n).map(|r| v[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            v[(r, j)] /= norm;
        }
    }
    v
}

pub fn random_unitary(n: usize, rng: &mut Rng64) -> CMatrix {
    random_isometry(n, n, rng)
}

/// Spectrum for [`hermitian_with_spectrum`]: uniform on `[m, M]` with the
/// first two values pinned to `m` and `M` when `n >= 2`.
pub fn pinned_spectrum(n: usize, m: f64, big_m: f64, rng: &mut Rng64) -> Vec<f64> {
    (0..n)
        .map(|i| match (i, n >= 2) {
            (0, true) => m,
            (1, true) => big_m,
            _ => rng.gen_range(m..=big_m),
        })
        .collect()
}

/// `U diag(lambda) U*` for a unitary `U`.
pub fn conjugate_diagonal(u: &CMatrix, lambda: &[f64]) -> HermitianMatrix {
    let d = HermitianMatrix::from_real_diagonal(lambda);
    d.congruence(&u.adjoint()).expect("square unitary")
}

/// Hermitian matrix with spectrum drawn by [`pinned_spectrum`] in a random
/// eigenbasis, drawing from `rng`.
pub fn hermitian_with_spectrum(n: usize, m: f64, big_m: f64, rng: &mut Rng64) -> Result<HermitianMatrix> {
    if n == 0 || !(m < big_m) {
        return Err(Error::Parameter(format!("need n >= 1 and m < M, got n={n}, [{m}, {big_m}]")));
    }
    let lambda = pinned_spectrum(n, m, big_m, rng);
    let u = random_unitary(n, rng);
    let a = conjugate_diagonal(&u, &lambda);
    let ev = eigenvalues(&a)?;
    let margin = 1e-10 * (1.0 + m.abs().max(big_m.abs()));
    if ev[0] < m - margin || ev[n - 1] > big_m + margin {
        return Err(Error::Assumption(format!(
            "generated spectrum [{}, {}] left [{m}, {big_m}]",
            ev[0],
            ev[n - 1]
        )));
    }
    Ok(a)
}

/// Seeded form of [`hermitian_with_spectrum`].
pub fn gen_hermitian_with_spectrum(n: usize, m: f64, big_m: f64, seed: u64) -> Result<HermitianMatrix> {
    hermitian_with_spectrum(n, m, big_m, &mut rng_from_seed(seed))
}

/// `A` with spectrum in `[1, 2]` and `B = A^{1/2} C A^{1/2}` with
/// `Lambda(C)` in `[m, M]`, so that `m A <= B <= M A`. With `commuting`,
/// `A` and `C` share one eigenbasis.
pub fn gen_sandwiched_pair(
    n: usize,
    m: f64,
    big_m: f64,
    seed: u64,
    commuting: bool,
) -> Result<(HermitianMatrix, HermitianMatrix)> {
    if !(m > 0.0 && m < big_m) {
        return Err(Error::Parameter(format!("need 0 < m < M, got [{m}, {big_m}]")));
    }
    let mut rng = rng_from_seed(seed);
    let (a, c) = if commuting {
        let u = random_unitary(n, &mut rng);
        let la: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..=2.0)).collect();
        let lc = pinned_spectrum(n, m, big_m, &mut rng);
        (conjugate_diagonal(&u, &la), conjugate_diagonal(&u, &lc))
    } else {
        let a = hermitian_with_spectrum(n, 1.0, 2.0, &mut rng)?;
        let c = hermitian_with_spectrum(n, m, big_m, &mut rng)?;
        (a, c)
    };
    let b = c.sandwich_by(&matrix_power_real(&a, 0.5)?)?;
    let lower = loewner_compare(&a.scale(m), &b, DEFAULT_TOLERANCE)?;
    let upper = loewner_compare(&b, &a.scale(big_m), DEFAULT_TOLERANCE)?;
    if !lower.holds_leq() || !upper.holds_leq() {
        return Err(Error::Assumption(format!(
            "generated pair violates m A <= B <= M A (min gaps {}, {})",
            lower.min_gap(),
            upper.min_gap()
        )));
    }
    Ok((a, b))
}

/// Commuting pair `A = U diag(a) U*`, `B = U diag(a c) U*` whose eigenvalue
/// pairs satisfy `c in [m, M]` and `phi(a c) / phi(a) in [m, M]` for
/// `phi(x) = sum_i coeffs[i] x^i`, together with a square unitary `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibleInstance {
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
    pub basis: CMatrix,
    pub v: CMatrix,
    pub a_eigs: Vec<f64>,
    pub c_eigs: Vec<f64>,
}

const MAX_REJECTIONS: usize = 100_000;

/// Draws each eigenvalue pair by rejection: `a ~ U[1, 2]`, `c ~ U[m, M]`.
pub fn gen_admissible_commuting(n: usize, m: f64, big_m: f64, coeffs: &[f64], seed: u64) -> Result<AdmissibleInstance> {
    if n == 0 || !(m > 0.0 && m < big_m) {
        return Err(Error::Parameter(format!("need n >= 1 and 0 < m < M, got n={n}, [{m}, {big_m}]")));
    }
    let poly = |x: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
    let mut rng = rng_from_seed(seed);
    let mut a_eigs = Vec::with_capacity(n);
    let mut c_eigs = Vec::with_capacity(n);
    for _ in 0..n {
        let mut accepted = None;
        for _ in 0..MAX_REJECTIONS {
            let a: f64 = rng.gen_range(1.0..=2.0);
            let c: f64 = rng.gen_range(m..=big_m);
            let (pa, pb) = (poly(a), poly(a * c));
            if pa > 0.0 && pb >= m * pa && pb <= big_m * pa {
                accepted = Some((a, c));
                break;
            }
        }
        let (a, c) = accepted.ok_or_else(|| {
            Error::Assumption(format!("no admissible eigenvalue pair for coefficients {coeffs:?}"))
        })?;
        a_eigs.push(a);
        c_eigs.push(c);
    }
    let basis = random_unitary(n, &mut rng);
    let v = random_unitary(n, &mut rng);
    let b_eigs: Vec<f64> = a_eigs.iter().zip(&c_eigs).map(|(a, c)| a * c).collect();
    Ok(AdmissibleInstance {
        a: conjugate_diagonal(&basis, &a_eigs),
        b: conjugate_diagonal(&basis, &b_eigs),
        basis,
        v,
        a_eigs,
        c_eigs,
    })
}
