//! Jensen-type operator bounds for polynomial compressions: power bounds
//! through Kantorovich constants, brackets for `Phi(f(A))` and `f(Phi(A))`,
//! the combined `W/X/Y/Z` sandwich, its eigenvalue majorization chain and the
//! classical compression inequality `f(V*AV) <= V*f(A)V`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspec::ScalarFunction;
use crate::kantorovich::{kantorovich_r, widen_if_degenerate, SpectralInterval};
use crate::loewner::{loewner_compare, weak_majorization_leq, LoewnerVerdict, DEFAULT_TOLERANCE};
use crate::matrix::{CMatrix, HermitianMatrix};
use crate::phimap::{phi_apply, PhiMap};
use crate::sandwich::{build_sandwich, SandwichPair};
use crate::spectral::{apply_function, eigenvalues, power_from_decomposition, spectral_decompose};

/// Relative slack for "p_L(A) is positive semidefinite".
pub const PSD_RTOL: f64 = 1e-10;

/// Flag recorded whenever an exponent-one term is bracketed without a
/// Kantorovich factor.
pub const R1_FLAG: &str = "r=1: K:=1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdjScales {
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl CdjScales {
    pub fn new(c: f64, d: f64, e: f64) -> Result<Self> {
        for (name, v) in [("c", c), ("d", d), ("e", e)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("scale {name} must be positive, got {v}")));
            }
        }
        Ok(Self { c, d, e })
    }

    pub fn unit() -> Self {
        Self { c: 1.0, d: 1.0, e: 1.0 }
    }
}

impl Default for CdjScales {
    fn default() -> Self {
        Self::unit()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

/// Output of [`lemma1_power_bounds`]: `lower <= f(A)^i <= upper` is the claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PowerBounds {
    pub exponent: i32,
    pub lower: HermitianMatrix,
    pub upper: HermitianMatrix,
    /// `K` on the spectrum of `p_L(A)`; the lower bound carries `1/k_lower`.
    pub k_lower: f64,
    /// `K` on the spectrum of `p_U(A)`.
    pub k_upper: f64,
    pub interval_lower: SpectralInterval,
    pub interval_upper: SpectralInterval,
    pub flags: Vec<String>,
}

fn interval_tolerance(lo: f64, hi: f64) -> f64 {
    1e-10 * (1.0 + lo.abs().max(hi.abs()))
}

fn check_spectrum_inside(a: &HermitianMatrix, pair: &SandwichPair, what: &str) -> Result<(f64, f64)> {
    let ev = eigenvalues(a)?;
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    let tol = interval_tolerance(pair.interval[0], pair.interval[1]);
    if lo < pair.interval[0] - tol || hi > pair.interval[1] + tol {
        return Err(Error::Assumption(format!(
            "spectrum of {what} [{lo}, {hi}] is not inside the sandwich interval [{}, {}]",
            pair.interval[0], pair.interval[1]
        )));
    }
    Ok((lo, hi))
}

/// Bounds `K^{-1}(p_L) p_L(A)^i <= f(A)^i <= K(p_U) p_U(A)^i`, where each `K`
/// is taken on the extreme eigenvalues of the respective polynomial image.
///
/// `Sign::Plus` requires `i >= 0`; `Sign::Minus` admits negative `i`, which
/// needs both polynomial images positive definite. Exponent 0 gives
/// `(I, I)`; exponent 1 gives `(p_L(A), p_U(A))` with the [`R1_FLAG`].
pub fn lemma1_power_bounds(pair: &SandwichPair, a: &HermitianMatrix, i: i32, sign: Sign) -> Result<PowerBounds> {
    if sign == Sign::Plus && i < 0 {
        return Err(Error::Parameter(format!("exponent {i} is negative but the sign is plus")));
    }
    check_spectrum_inside(a, pair, "A")?;
    let pl = pair.lower.eval_matrix(a);
    let pu = pair.upper.eval_matrix(a);
    let dl = spectral_decompose(&pl)?;
    let du = spectral_decompose(&pu)?;
    let scale = 1.0 + dl.spectral_radius();
    if dl.min() < -PSD_RTOL * scale {
        return Err(Error::Assumption(format!(
            "p_L(A) is not positive semidefinite (min eigenvalue {:e})",
            dl.min()
        )));
    }
    let interval_lower = widen_if_degenerate(dl.min(), dl.max());
    let interval_upper = widen_if_degenerate(du.min(), du.max());
    let mut flags = Vec::new();
    if interval_lower.widened || interval_upper.widened {
        flags.push(format!("i={i}: degenerate spectrum widened"));
    }
    let n = a.dim();
    match i {
        0 => {
            return Ok(PowerBounds {
                exponent: 0,
                lower: HermitianMatrix::identity(n),
                upper: HermitianMatrix::identity(n),
                k_lower: 1.0,
                k_upper: 1.0,
                interval_lower,
                interval_upper,
                flags,
            })
        }
        1 => {
            flags.push(R1_FLAG.to_string());
            return Ok(PowerBounds {
                exponent: 1,
                lower: pl,
                upper: pu,
                k_lower: 1.0,
                k_upper: 1.0,
                interval_lower,
                interval_upper,
                flags,
            });
        }
        _ => {}
    }
    for (name, iv) in [("p_L(A)", &interval_lower), ("p_U(A)", &interval_upper)] {
        if !(iv.lo > 0.0) {
            return Err(Error::Assumption(format!(
                "Kantorovich constant for exponent {i} needs {name} positive definite (min eigenvalue {:e})",
                iv.lo
            )));
        }
    }
    let k_lower = kantorovich_r(interval_lower.lo, interval_lower.hi, i as f64)?;
    let k_upper = kantorovich_r(interval_upper.lo, interval_upper.hi, i as f64)?;
    let lower = power_from_decomposition(&dl, i as f64)?.scale(1.0 / k_lower);
    let upper = power_from_decomposition(&du, i as f64)?.scale(k_upper);
    Ok(PowerBounds {
        exponent: i,
        lower,
        upper,
        k_lower,
        k_upper,
        interval_lower,
        interval_upper,
        flags,
    })
}

/// Per-exponent record kept in bound metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TermRecord {
    pub exponent: usize,
    pub coefficient: f64,
    pub k_lower: f64,
    pub k_upper: f64,
    pub flags: Vec<String>,
}

/// Bracket of `Phi(f(A))` (`UB` = upper, `LB` = lower).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiFBounds {
    pub lower: HermitianMatrix,
    pub upper: HermitianMatrix,
    pub terms: Vec<TermRecord>,
}

/// `upper = V*{ sum_{a_i >= 0} a_i K_U p_U(A)^i + sum_{a_i < 0} a_i K_L^{-1} p_L(A)^i } V`
/// and `lower` with the roles swapped. Zero coefficients are skipped.
pub fn lemma2_phi_f_bounds(phi: &PhiMap, pair: &SandwichPair, a: &HermitianMatrix) -> Result<PhiFBounds> {
    if a.dim() != phi.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: phi.input_dim(),
            found: a.dim(),
        });
    }
    let n = a.dim();
    let mut lower = HermitianMatrix::zeros(n);
    let mut upper = HermitianMatrix::zeros(n);
    let mut terms = Vec::new();
    for (i, &coef) in phi.coeffs().iter().enumerate() {
        if coef == 0.0 {
            continue;
        }
        let b = lemma1_power_bounds(pair, a, i as i32, Sign::Plus)?;
        let (lo_term, hi_term) = if coef > 0.0 {
            (b.lower.scale(coef), b.upper.scale(coef))
        } else {
            (b.upper.scale(coef), b.lower.scale(coef))
        };
        lower = &lower + &lo_term;
        upper = &upper + &hi_term;
        terms.push(TermRecord {
            exponent: i,
            coefficient: coef,
            k_lower: b.k_lower,
            k_upper: b.k_upper,
            flags: b.flags,
        });
    }
    Ok(PhiFBounds {
        lower: lower.congruence(phi.v())?,
        upper: upper.congruence(phi.v())?,
        terms,
    })
}

/// Bracket of `f(Phi(A))` (`Y~UB` = upper, `Z~LB` = lower).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FPhiBounds {
    pub lower: HermitianMatrix,
    pub upper: HermitianMatrix,
    pub tilde: SandwichPair,
    pub interval: SpectralInterval,
}

/// Builds a sandwich of `f` on the spectral interval of `Phi(A)` and returns
/// `p~_L(Phi(A)) <= f(Phi(A)) <= p~_U(Phi(A))`.
pub fn lemma3_f_phi_bounds(phi: &PhiMap, f: &ScalarFunction, a: &HermitianMatrix, epsilon: f64) -> Result<FPhiBounds> {
    let image = phi_apply(phi, a)?;
    let ev = eigenvalues(&image)?;
    let interval = widen_if_degenerate(ev[0], ev[ev.len() - 1]);
    let tilde = build_sandwich(f, interval.lo, interval.hi, epsilon)?;
    Ok(FPhiBounds {
        lower: tilde.lower.eval_matrix(&image),
        upper: tilde.upper.eval_matrix(&image),
        tilde,
        interval,
    })
}

/// As [`lemma3_f_phi_bounds`] with a prescribed sandwich, which must cover
/// the spectrum of `Phi(A)`.
pub fn lemma3_with_sandwich(phi: &PhiMap, tilde: &SandwichPair, a: &HermitianMatrix) -> Result<FPhiBounds> {
    let image = phi_apply(phi, a)?;
    let (lo, hi) = check_spectrum_inside(&image, tilde, "Phi(A)")?;
    Ok(FPhiBounds {
        lower: tilde.lower.eval_matrix(&image),
        upper: tilde.upper.eval_matrix(&image),
        tilde: tilde.clone(),
        interval: SpectralInterval {
            lo,
            hi,
            widened: false,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MajorizationChain {
    /// Descending eigenvalues of the lower operator, the center and the upper operator.
    pub lower: Vec<f64>,
    pub center: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower_link: bool,
    pub upper_link: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundMetadata {
    pub epsilon: f64,
    pub tilde_epsilon: f64,
    pub scales: CdjScales,
    pub interval_a: [f64; 2],
    pub interval_phi: SpectralInterval,
    pub terms: Vec<TermRecord>,
    pub flags: Vec<String>,
    pub underflow: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundReport {
    pub lower_op: HermitianMatrix,
    pub upper_op: HermitianMatrix,
    #[serde(rename = "W")]
    pub w: HermitianMatrix,
    #[serde(rename = "X")]
    pub x: HermitianMatrix,
    #[serde(rename = "Y")]
    pub y: HermitianMatrix,
    #[serde(rename = "Z")]
    pub z: HermitianMatrix,
    pub center: HermitianMatrix,
    /// `Phi(f(A))`.
    pub phi_f: HermitianMatrix,
    pub verdict_lower: LoewnerVerdict,
    pub verdict_upper: LoewnerVerdict,
    pub majorization: Option<MajorizationChain>,
    pub metadata: BoundMetadata,
}

impl BoundReport {
    /// Both sides of the chain hold in the Loewner order.
    pub fn holds(&self) -> bool {
        self.verdict_lower.holds_leq() && self.verdict_upper.holds_leq()
    }
}

/// Builds the sandwich on the spectral interval of `A` and the tilde sandwich
/// on that of `Phi(A)`, both at accuracy `epsilon`, then assembles the report.
pub fn theorem1_sandwich(
    phi: &PhiMap,
    f: &ScalarFunction,
    a: &HermitianMatrix,
    epsilon: f64,
    scales: CdjScales,
) -> Result<BoundReport> {
    let ev = eigenvalues(a)?;
    let iv = widen_if_degenerate(ev[0], ev[ev.len() - 1]);
    let pair = build_sandwich(f, iv.lo, iv.hi, epsilon)?;
    let l3 = lemma3_f_phi_bounds(phi, f, a, epsilon)?;
    let mut report = assemble_theorem1(phi, f, a, &pair, l3, scales)?;
    if iv.widened {
        report.metadata.flags.push("spectrum of A widened".into());
    }
    Ok(report)
}

/// The combined sandwich for prescribed pairs: `pair` must cover the spectrum
/// of `A` and `tilde` that of `Phi(A)`.
pub fn theorem1_with_sandwiches(
    phi: &PhiMap,
    f: &ScalarFunction,
    a: &HermitianMatrix,
    pair: &SandwichPair,
    tilde: &SandwichPair,
    scales: CdjScales,
) -> Result<BoundReport> {
    let l3 = lemma3_with_sandwich(phi, tilde, a)?;
    assemble_theorem1(phi, f, a, pair, l3, scales)
}

fn assemble_theorem1(
    phi: &PhiMap,
    f: &ScalarFunction,
    a: &HermitianMatrix,
    pair: &SandwichPair,
    l3: FPhiBounds,
    s: CdjScales,
) -> Result<BoundReport> {
    let l2 = lemma2_phi_f_bounds(phi, pair, a)?;
    let phi_f = phi_apply_to_function(phi, f, a)?;
    let image = phi_apply(phi, a)?;
    let center = apply_function(f, &image)?;
    let w = l2.upper.scale(s.e / s.d);
    let x = l2.lower.scale(s.e / s.c);
    let y = l3.upper.scale(1.0 / s.c);
    let z = l3.lower.scale(1.0 / s.d);
    let lower_op = &phi_f.scale(s.e) - &(&w - &z).scale(s.d);
    let upper_op = &phi_f.scale(s.e) - &(&x - &y).scale(s.c);
    let verdict_lower = loewner_compare(&lower_op, &center, DEFAULT_TOLERANCE)?;
    let verdict_upper = loewner_compare(&center, &upper_op, DEFAULT_TOLERANCE)?;
    let mut flags: Vec<String> = Vec::new();
    for t in &l2.terms {
        for fl in &t.flags {
            if !flags.contains(fl) {
                flags.push(fl.clone());
            }
        }
    }
    if l3.interval.widened {
        flags.push("spectrum of Phi(A) widened".into());
    }
    Ok(BoundReport {
        lower_op,
        upper_op,
        w,
        x,
        y,
        z,
        center,
        phi_f,
        verdict_lower,
        verdict_upper,
        majorization: None,
        metadata: BoundMetadata {
            epsilon: pair.epsilon,
            tilde_epsilon: l3.tilde.epsilon,
            scales: s,
            interval_a: pair.interval,
            interval_phi: l3.interval,
            terms: l2.terms,
            flags,
            underflow: pair.underflow || l3.tilde.underflow,
            seed: None,
        },
    })
}

/// `Phi(f(A))`.
pub fn phi_apply_to_function(phi: &PhiMap, f: &ScalarFunction, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    phi_apply(phi, &apply_function(f, a)?)
}

/// Fills in the weak-majorization chain `lambda(lowerOp) <_w lambda(center) <_w lambda(upperOp)`.
pub fn corollary_majorization(mut report: BoundReport) -> Result<BoundReport> {
    let desc = |m: &HermitianMatrix| -> Result<Vec<f64>> {
        let mut ev = eigenvalues(m)?;
        ev.reverse();
        Ok(ev)
    };
    let lower = desc(&report.lower_op)?;
    let center = desc(&report.center)?;
    let upper = desc(&report.upper_op)?;
    report.majorization = Some(MajorizationChain {
        lower_link: weak_majorization_leq(&lower, &center)?,
        upper_link: weak_majorization_leq(&center, &upper)?,
        lower,
        center,
        upper,
    });
    Ok(report)
}

/// Verdict of `f(V*AV)` against `V*f(A)V`; `LEQ` or `EQUAL` means the
/// classical inequality holds.
pub fn classical_cdj_check(v: &CMatrix, f: &ScalarFunction, a: &HermitianMatrix) -> Result<LoewnerVerdict> {
    let phi = PhiMap::compression(v.clone())?;
    let lhs = apply_function(f, &phi_apply(&phi, a)?)?;
    let rhs = phi_apply(&phi, &apply_function(f, a)?)?;
    loewner_compare(&lhs, &rhs, DEFAULT_TOLERANCE)
}
