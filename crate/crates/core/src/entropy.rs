//! Tsallis relative entropy `T_q(A|B) = (A #_q B - A)/q`, relative operator
//! entropy, and quadratic operator bounds for both, with and without a
//! polynomial compression `Phi`.

use serde::{Deserialize, Serialize};

use crate::cdj::R1_FLAG;
use crate::error::{Error, Result};
use crate::kantorovich::{kantorovich_r, widen_if_degenerate, SpectralInterval};
use crate::loewner::{loewner_compare, LoewnerVerdict, DEFAULT_TOLERANCE};
use crate::matrix::{max_abs_entry, HermitianMatrix};
use crate::phimap::{phi_apply, PhiMap};
use crate::sandwich::{omega_scalar, tsallis_constants, tsallis_sandwich_polynomials_with, SandwichPair};
use crate::spectral::{geometric_mean_q, power_from_decomposition, spectral_decompose, SpectralDecomposition};

/// Commutator tolerance (relative) for the commuting-family requirement.
pub const COMMUTATOR_RTOL: f64 = 1e-8;
/// Tolerance of the scalar inequality grid check.
pub const SCALAR_TOL: f64 = 1e-12;
/// Weight used to compare the relative-entropy bounds with the Tsallis ones.
pub const LIMIT_Q: f64 = 1e-6;
pub const LIMIT_RTOL: f64 = 1e-4;

pub const OUTSIDE_HYPOTHESES: &str = "outside stated hypotheses";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntropyParams {
    pub q: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    /// Skip the `m >= 2`, `M >= 5m` hypotheses.
    #[serde(default)]
    pub relaxed: bool,
}

impl EntropyParams {
    pub fn new(q: f64, m: f64, big_m: f64) -> Self {
        Self {
            q,
            m,
            big_m,
            relaxed: false,
        }
    }

    pub fn relaxed(mut self) -> Self {
        self.relaxed = true;
        self
    }

    /// Whether `m >= 2` and `M >= 5m` hold.
    pub fn within_hypotheses(&self) -> bool {
        self.m >= 2.0 && self.big_m >= 5.0 * self.m
    }

    /// Checks `0 < q <= 1`, `0 < m < M` and (unless relaxed) `m >= 2`, `M >= 5m`.
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::Constraint(format!("0 < q <= 1 required, got q = {}", self.q)));
        }
        self.validate_interval()
    }

    fn validate_interval(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m < self.big_m && self.big_m.is_finite()) {
            return Err(Error::Constraint(format!(
                "0 < m < M required, got m = {}, M = {}",
                self.m, self.big_m
            )));
        }
        if !self.relaxed && !self.within_hypotheses() {
            return Err(Error::Constraint(format!(
                "m >= 2 and M >= 5m required, got m = {}, M = {}",
                self.m, self.big_m
            )));
        }
        Ok(())
    }

    fn flags(&self) -> Vec<String> {
        if self.within_hypotheses() {
            Vec::new()
        } else {
            vec![OUTSIDE_HYPOTHESES.to_string()]
        }
    }
}

/// `(A #_q B - A) / q` for `A, B > 0`, `-1 <= q <= 1`, `q != 0`.
pub fn tsallis_relative_entropy(a: &HermitianMatrix, b: &HermitianMatrix, q: f64) -> Result<HermitianMatrix> {
    if !(-1.0..=1.0).contains(&q) || q == 0.0 {
        return Err(Error::Parameter(format!("q must lie in [-1, 1] without 0, got {q}")));
    }
    spectral_decompose(b)?.require_positive_definite("B in T_q(A|B)")?;
    let mean = geometric_mean_q(a, b, q)?;
    Ok((&mean - a).scale(1.0 / q))
}

/// `A^{1/2} log(A^{-1/2} B A^{-1/2}) A^{1/2}` for `A, B > 0`.
pub fn relative_operator_entropy(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    a.check_same_dim(b)?;
    let da = spectral_decompose(a)?;
    da.require_positive_definite("A in S(A|B)")?;
    spectral_decompose(b)?.require_positive_definite("B in S(A|B)")?;
    let sqrt_a = da.map(|l| Ok(l.sqrt()))?;
    let inv_sqrt_a = da.map(|l| Ok(1.0 / l.sqrt()))?;
    let c = b.sandwich_by(&inv_sqrt_a)?;
    let dc = spectral_decompose(&c)?;
    dc.require_positive_definite("A^{-1/2} B A^{-1/2}")?;
    dc.map(|l| Ok(l.ln()))?.sandwich_by(&sqrt_a)
}

/// The bound ingredients `Gamma`, `Psi`, `Omega`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GammaPsiOmega {
    pub gamma: HermitianMatrix,
    pub psi: HermitianMatrix,
    pub omega: HermitianMatrix,
    pub omega_scalar: f64,
    pub underflow: bool,
}

/// `Psi = A #_2 B - (M+m) B + M m A`.
fn psi(a: &HermitianMatrix, b: &HermitianMatrix, m: f64, big_m: f64) -> Result<HermitianMatrix> {
    let mean2 = geometric_mean_q(a, b, 2.0)?;
    Ok(&(&mean2 - &b.scale(m + big_m)) + &a.scale(m * big_m))
}

/// `Gamma = -[(B - mA)(1 - M^q) + (MA - B)(1 - m^q)] / (q (M - m))`,
/// `Psi = A #_2 B - (M+m) B + M m A`, `Omega = m^q / (M+m)^(M m) * A`
/// (scalar in log space; underflow gives the zero matrix and sets the flag).
pub fn gamma_psi_omega(a: &HermitianMatrix, b: &HermitianMatrix, params: &EntropyParams) -> Result<GammaPsiOmega> {
    a.check_same_dim(b)?;
    spectral_decompose(a)?.require_positive_definite("A in Psi")?;
    let (q, m, big_m) = (params.q, params.m, params.big_m);
    if q == 0.0 || !(m > 0.0 && m < big_m) {
        return Err(Error::Parameter(format!(
            "need q != 0 and 0 < m < M, got q={q}, m={m}, M={big_m}"
        )));
    }
    let b_minus = b - &a.scale(m);
    let big_minus = &a.scale(big_m) - b;
    let gamma = (&b_minus.scale(1.0 - big_m.powf(q)) + &big_minus.scale(1.0 - m.powf(q)))
        .scale(-1.0 / (q * (big_m - m)));
    let (omega_scalar, underflow) = omega_scalar(q, m, big_m);
    Ok(GammaPsiOmega {
        gamma,
        psi: psi(a, b, m, big_m)?,
        omega: a.scale(omega_scalar),
        omega_scalar,
        underflow,
    })
}

/// Bounds of one operator with verdicts `lower <= center <= upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntropyBounds {
    pub lower: HermitianMatrix,
    pub upper: HermitianMatrix,
    pub center: HermitianMatrix,
    pub verdict_lower: LoewnerVerdict,
    pub verdict_upper: LoewnerVerdict,
    pub underflow: bool,
    pub flags: Vec<String>,
    /// Lemma-specific scalar diagnostics (Kantorovich constants, limits).
    pub diagnostics: Vec<(String, f64)>,
}

impl EntropyBounds {
    pub fn holds(&self) -> bool {
        self.verdict_lower.holds_leq() && self.verdict_upper.holds_leq()
    }
}

fn verdicts(lower: &HermitianMatrix, center: &HermitianMatrix, upper: &HermitianMatrix) -> Result<(LoewnerVerdict, LoewnerVerdict)> {
    Ok((
        loewner_compare(lower, center, DEFAULT_TOLERANCE)?,
        loewner_compare(center, upper, DEFAULT_TOLERANCE)?,
    ))
}

/// Checks `m A <= B <= M A`; the error carries the smallest eigenvalue of
/// the violated difference.
pub fn check_sandwiched(a: &HermitianMatrix, b: &HermitianMatrix, m: f64, big_m: f64, what: &str) -> Result<()> {
    let low = loewner_compare(&a.scale(m), b, DEFAULT_TOLERANCE)?;
    if !low.holds_leq() {
        return Err(Error::Assumption(format!(
            "m {what}A <= {what}B fails: min eigenvalue of {what}B - m {what}A is {:e}",
            low.min_gap()
        )));
    }
    let high = loewner_compare(b, &a.scale(big_m), DEFAULT_TOLERANCE)?;
    if !high.holds_leq() {
        return Err(Error::Assumption(format!(
            "{what}B <= M {what}A fails: min eigenvalue of M {what}A - {what}B is {:e}",
            high.min_gap()
        )));
    }
    Ok(())
}

/// `Gamma - (1-q)M^(q-2)/2 Psi + Omega` and `Gamma - (1-q)m^(q-2)/2 Psi - Omega`
/// without precondition checks.
fn lemma4_unchecked(a: &HermitianMatrix, b: &HermitianMatrix, params: &EntropyParams) -> Result<(HermitianMatrix, HermitianMatrix, bool)> {
    let g = gamma_psi_omega(a, b, params)?;
    let c = tsallis_constants(params.q, params.m, params.big_m);
    let lower = &(&g.gamma - &g.psi.scale(c.curv_lower)) + &g.omega;
    let upper = &(&g.gamma - &g.psi.scale(c.curv_upper)) - &g.omega;
    Ok((lower, upper, g.underflow))
}

/// Quadratic bounds of `T_q(A|B)` under `m A <= B <= M A`.
pub fn lemma4_bounds(a: &HermitianMatrix, b: &HermitianMatrix, params: &EntropyParams) -> Result<EntropyBounds> {
    params.validate()?;
    check_sandwiched(a, b, params.m, params.big_m, "")?;
    let (lower, upper, underflow) = lemma4_unchecked(a, b, params)?;
    let center = tsallis_relative_entropy(a, b, params.q)?;
    let (verdict_lower, verdict_upper) = verdicts(&lower, &center, &upper)?;
    Ok(EntropyBounds {
        lower,
        upper,
        center,
        verdict_lower,
        verdict_upper,
        underflow,
        flags: params.flags(),
        diagnostics: Vec::new(),
    })
}

/// Quadratic bounds of `S(A|B)`:
/// `Gamma_0 - Psi/(2M^2) + Omega_0` and `Gamma_0 - Psi/(2m^2) - Omega_0` with
/// `Gamma_0 = [(B - mA) log M + (MA - B) log m] / (M - m)`,
/// `Omega_0 = A / (M+m)^(M m)`.
///
/// The diagnostic `limit_deviation` is the largest entry difference to the
/// Tsallis bounds at `q = 1e-6`; a flag is raised above `1e-4 * scale`.
pub fn lemma5_bounds(a: &HermitianMatrix, b: &HermitianMatrix, m: f64, big_m: f64, relaxed: bool) -> Result<EntropyBounds> {
    let mut params = EntropyParams::new(LIMIT_Q, m, big_m);
    params.relaxed = relaxed;
    params.validate_interval()?;
    check_sandwiched(a, b, m, big_m, "")?;
    spectral_decompose(a)?.require_positive_definite("A in relative entropy bounds")?;
    let gamma0 = (&(b - &a.scale(m)).scale(big_m.ln()) + &(&a.scale(big_m) - b).scale(m.ln()))
        .scale(1.0 / (big_m - m));
    let p = psi(a, b, m, big_m)?;
    let (omega0, underflow) = omega_scalar(0.0, m, big_m);
    let lower = &(&gamma0 - &p.scale(0.5 / (big_m * big_m))) + &a.scale(omega0);
    let upper = &(&gamma0 - &p.scale(0.5 / (m * m))) - &a.scale(omega0);
    let center = relative_operator_entropy(a, b)?;
    let (verdict_lower, verdict_upper) = verdicts(&lower, &center, &upper)?;
    let (tl, tu, _) = lemma4_unchecked(a, b, &params)?;
    let deviation = lower.max_abs_diff(&tl).max(upper.max_abs_diff(&tu));
    let scale = 1.0 + lower.max_abs().max(upper.max_abs());
    let mut flags = params.flags();
    if deviation > LIMIT_RTOL * scale {
        flags.push(format!("q -> 0 limit deviates by {deviation:e}"));
    }
    Ok(EntropyBounds {
        lower,
        upper,
        center,
        verdict_lower,
        verdict_upper,
        underflow,
        flags,
        diagnostics: vec![("limit_deviation".into(), deviation)],
    })
}

fn require_nonnegative_coeffs(phi: &PhiMap) -> Result<()> {
    if phi.coeffs().iter().any(|&c| c < 0.0) || phi.coeffs().iter().all(|&c| c == 0.0) {
        return Err(Error::Assumption(format!(
            "Phi needs non-negative coefficients, not all zero; got {:?}",
            phi.coeffs()
        )));
    }
    Ok(())
}

/// The [`lemma4_bounds`] pair evaluated at `(Phi(A), Phi(B))`; center `T_q(Phi(A)|Phi(B))`.
pub fn lemma6_bounds(a: &HermitianMatrix, b: &HermitianMatrix, params: &EntropyParams, phi: &PhiMap) -> Result<EntropyBounds> {
    params.validate()?;
    require_nonnegative_coeffs(phi)?;
    let pa = phi_apply(phi, a)?;
    let pb = phi_apply(phi, b)?;
    spectral_decompose(&pa)?.require_positive_definite("Phi(A)")?;
    spectral_decompose(&pb)?.require_positive_definite("Phi(B)")?;
    check_sandwiched(&pa, &pb, params.m, params.big_m, "Phi")?;
    let mut out = lemma4_bounds_unchecked_report(&pa, &pb, params)?;
    out.flags = params.flags();
    Ok(out)
}

fn lemma4_bounds_unchecked_report(a: &HermitianMatrix, b: &HermitianMatrix, params: &EntropyParams) -> Result<EntropyBounds> {
    let (lower, upper, underflow) = lemma4_unchecked(a, b, params)?;
    let center = tsallis_relative_entropy(a, b, params.q)?;
    let (verdict_lower, verdict_upper) = verdicts(&lower, &center, &upper)?;
    Ok(EntropyBounds {
        lower,
        upper,
        center,
        verdict_lower,
        verdict_upper,
        underflow,
        flags: Vec::new(),
        diagnostics: Vec::new(),
    })
}

/// Everything the compressed-entropy assemblies share.
struct Lemma7Parts {
    sqrt_a: HermitianMatrix,
    pl: SpectralDecomposition,
    pu: SpectralDecomposition,
    pair: SandwichPair,
    k_lower: [f64; 3],
    k_upper: [f64; 3],
    intervals: [SpectralInterval; 2],
    flags: Vec<String>,
}

fn kantorovich_table(iv: &SpectralInterval, degree: usize) -> Result<[f64; 3]> {
    let mut k = [1.0; 3];
    if degree >= 2 {
        if !(iv.lo > 0.0) {
            return Err(Error::Assumption(format!(
                "Kantorovich constant needs a positive spectrum, got minimum {:e}",
                iv.lo
            )));
        }
        k[2] = kantorovich_r(iv.lo, iv.hi, 2.0)?;
    }
    Ok(k)
}

fn lemma7_parts(a: &HermitianMatrix, b: &HermitianMatrix, params: &EntropyParams, phi: &PhiMap) -> Result<Lemma7Parts> {
    params.validate()?;
    require_nonnegative_coeffs(phi)?;
    if phi.coeffs().len() > 3 {
        return Err(Error::Assumption(format!(
            "Phi must be at most quadratic here, got degree {}",
            phi.coeffs().len() - 1
        )));
    }
    check_sandwiched(a, b, params.m, params.big_m, "")?;
    let da = spectral_decompose(a)?;
    da.require_positive_definite("A")?;
    let sqrt_a = da.map(|l| Ok(l.sqrt()))?;
    let inv_sqrt_a = da.map(|l| Ok(1.0 / l.sqrt()))?;
    let c = b.sandwich_by(&inv_sqrt_a)?;
    let dc = spectral_decompose(&c)?;
    dc.require_positive_definite("A^{-1/2} B A^{-1/2}")?;
    let cq = power_from_decomposition(&dc, params.q)?;
    let comm_norm = max_abs_entry(&(sqrt_a.product(&cq) - cq.product(&sqrt_a)));
    let scale = 1.0 + sqrt_a.max_abs() * cq.max_abs();
    if comm_norm > COMMUTATOR_RTOL * scale {
        return Err(Error::Assumption(format!(
            "A^(1/2) and (A^(-1/2) B A^(-1/2))^q do not commute: max |commutator| = {comm_norm:e}"
        )));
    }
    let pair = tsallis_sandwich_polynomials_with(params.q, params.m, params.big_m, params.relaxed)?;
    let pl = spectral_decompose(&pair.lower.eval_matrix(&c))?;
    let pu = spectral_decompose(&pair.upper.eval_matrix(&c))?;
    let il = widen_if_degenerate(pl.min(), pl.max());
    let iu = widen_if_degenerate(pu.min(), pu.max());
    let degree = phi.coeffs().len() - 1;
    let mut flags = params.flags();
    if il.widened || iu.widened {
        flags.push("degenerate spectrum widened".into());
    }
    if degree >= 1 && phi.coeffs()[1] != 0.0 {
        flags.push(R1_FLAG.to_string());
    }
    if pair.underflow {
        flags.push("Omega underflow".into());
    }
    Ok(Lemma7Parts {
        sqrt_a,
        k_lower: kantorovich_table(&il, degree)?,
        k_upper: kantorovich_table(&iu, degree)?,
        pl,
        pu,
        pair,
        intervals: [il, iu],
        flags,
    })
}

/// `V*{a_0 I + a_1 k_1 A^{1/2} P A^{1/2} + a_2 k_2 A P^2 A}V`.
fn lemma7_assembly(phi: &PhiMap, a: &HermitianMatrix, sqrt_a: &HermitianMatrix, p: &HermitianMatrix, k1: f64, k2: f64) -> Result<HermitianMatrix> {
    let coeffs = phi.coeffs();
    let n = a.dim();
    let mut acc = HermitianMatrix::identity(n).scale(coeffs[0]);
    if coeffs.len() > 1 {
        acc = &acc + &p.sandwich_by(sqrt_a)?.scale(coeffs[1] * k1);
    }
    if coeffs.len() > 2 {
        acc = &acc + &p.square().sandwich_by(a)?.scale(coeffs[2] * k2);
    }
    acc.congruence(phi.v())
}

/// Bounds of `Phi(T_q(A|B))` for quadratic `Phi` with non-negative
/// coefficients, built from the closed-form pair `p_L <= (x^q-1)/q <= p_U`
/// applied to `C = A^{-1/2} B A^{-1/2}`:
///
/// ```text
/// lower = V*{a_0 I + a_1 A^{1/2} p_L(C) A^{1/2} + a_2 K^{-1}(p_L(C), 2) A p_L(C)^2 A}V
/// upper = V*{a_0 I + a_1 A^{1/2} p_U(C) A^{1/2} + a_2 K(p_U(C), 2) A p_U(C)^2 A}V
/// ```
///
/// `A^{1/2}` must commute with `C^q`.
pub fn lemma7_phi_of_tsallis_bounds(a: &HermitianMatrix, b: &HermitianMatrix, params: &EntropyParams, phi: &PhiMap) -> Result<EntropyBounds> {
    let parts = lemma7_parts(a, b, params, phi)?;
    let pl = parts.pl.reconstruct_with(&parts.pl.eigenvalues);
    let pu = parts.pu.reconstruct_with(&parts.pu.eigenvalues);
    let lower = lemma7_assembly(phi, a, &parts.sqrt_a, &pl, 1.0 / parts.k_lower[1], 1.0 / parts.k_lower[2])?;
    let upper = lemma7_assembly(phi, a, &parts.sqrt_a, &pu, parts.k_upper[1], parts.k_upper[2])?;
    let center = phi_apply(phi, &tsallis_relative_entropy(a, b, params.q)?)?;
    let (verdict_lower, verdict_upper) = verdicts(&lower, &center, &upper)?;
    Ok(EntropyBounds {
        lower,
        upper,
        center,
        verdict_lower,
        verdict_upper,
        underflow: parts.pair.underflow,
        flags: parts.flags,
        diagnostics: vec![
            ("k_lower_2".into(), parts.k_lower[2]),
            ("k_upper_2".into(), parts.k_upper[2]),
        ],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntropyMetadata {
    pub params: EntropyParams,
    pub k_lower: [f64; 3],
    pub k_upper: [f64; 3],
    pub intervals: [SpectralInterval; 2],
    /// `max |W - (lemma 7 upper bound)|`.
    pub w_vs_lemma7_upper: f64,
    pub pair: SandwichPair,
    pub underflow: bool,
    pub flags: Vec<String>,
    /// Precondition `m Phi(A) <= Phi(B) <= M Phi(A)` for the `Y`, `Z` terms.
    pub phi_sandwiched: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntropyBoundReport {
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
    /// `T_q(Phi(A)|Phi(B))`.
    pub center: HermitianMatrix,
    /// `Phi(T_q(A|B))`.
    pub phi_t: HermitianMatrix,
    pub verdict_lower: LoewnerVerdict,
    pub verdict_upper: LoewnerVerdict,
    pub metadata: EntropyMetadata,
}

impl EntropyBoundReport {
    pub fn holds(&self) -> bool {
        self.verdict_lower.holds_leq() && self.verdict_upper.holds_leq()
    }
}

/// The combined Tsallis sandwich with `c = d = e = 1`:
///
/// ```text
/// W = V*{a_0 I + a_1 A^{1/2} p_L(C) A^{1/2} + a_2 K(p_U(C), 2) A p_L(C)^2 A}V
/// X = lemma 7 lower bound,  Y, Z = lemma 6 upper, lower bound
/// lowerOp = Phi(T_q(A|B)) - (W - Z),  upperOp = Phi(T_q(A|B)) - (X - Y)
/// ```
///
/// checked against `T_q(Phi(A)|Phi(B))`. `W` pairs the constant taken on the
/// spectrum of `p_U(C)` with powers of `p_L(C)`; its distance to the lemma 7
/// upper bound is kept in the metadata.
pub fn theorem2_sandwich(a: &HermitianMatrix, b: &HermitianMatrix, params: &EntropyParams, phi: &PhiMap) -> Result<EntropyBoundReport> {
    let parts = lemma7_parts(a, b, params, phi)?;
    let pl = parts.pl.reconstruct_with(&parts.pl.eigenvalues);
    let pu = parts.pu.reconstruct_with(&parts.pu.eigenvalues);
    let w = lemma7_assembly(phi, a, &parts.sqrt_a, &pl, parts.k_upper[1], parts.k_upper[2])?;
    let x = lemma7_assembly(phi, a, &parts.sqrt_a, &pl, 1.0 / parts.k_lower[1], 1.0 / parts.k_lower[2])?;
    let lemma7_upper = lemma7_assembly(phi, a, &parts.sqrt_a, &pu, parts.k_upper[1], parts.k_upper[2])?;

    let pa = phi_apply(phi, a)?;
    let pb = phi_apply(phi, b)?;
    spectral_decompose(&pa)?.require_positive_definite("Phi(A)")?;
    spectral_decompose(&pb)?.require_positive_definite("Phi(B)")?;
    let phi_sandwiched = check_sandwiched(&pa, &pb, params.m, params.big_m, "Phi").is_ok();
    let (z, y, underflow6) = lemma4_unchecked(&pa, &pb, params)?;

    let phi_t = phi_apply(phi, &tsallis_relative_entropy(a, b, params.q)?)?;
    let center = tsallis_relative_entropy(&pa, &pb, params.q)?;
    let lower_op = &phi_t - &(&w - &z);
    let upper_op = &phi_t - &(&x - &y);
    let (verdict_lower, verdict_upper) = verdicts(&lower_op, &center, &upper_op)?;
    let mut flags = parts.flags;
    if !phi_sandwiched {
        flags.push("m Phi(A) <= Phi(B) <= M Phi(A) fails".into());
    }
    Ok(EntropyBoundReport {
        lower_op,
        upper_op,
        w: w.clone(),
        x,
        y,
        z,
        center,
        phi_t,
        verdict_lower,
        verdict_upper,
        metadata: EntropyMetadata {
            params: *params,
            k_lower: parts.k_lower,
            k_upper: parts.k_upper,
            intervals: parts.intervals,
            w_vs_lemma7_upper: w.max_abs_diff(&lemma7_upper),
            underflow: parts.pair.underflow || underflow6,
            pair: parts.pair,
            flags,
            phi_sandwiched,
        },
    })
}

/// A point where a scalar inequality fails by more than [`SCALAR_TOL`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarFinding {
    pub side: String,
    pub x: f64,
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScalarGridReport {
    pub params: EntropyParams,
    pub grid_size: usize,
    /// `max (lower(x) - t(x))` with `t(x) = (x^q - 1)/q`.
    pub max_lower_violation: f64,
    pub arg_lower: f64,
    /// `max (t(x) - upper(x))`.
    pub max_upper_violation: f64,
    pub arg_upper: f64,
    /// `lower - t` and `t - upper` at `x = m` and `x = M`.
    pub endpoint_violations: [[f64; 2]; 2],
    pub omega: f64,
    pub underflow: bool,
    pub tolerance: f64,
    pub findings: Vec<ScalarFinding>,
}

impl ScalarGridReport {
    pub fn max_violation(&self) -> f64 {
        self.max_lower_violation.max(self.max_upper_violation)
    }

    pub fn within_tolerance(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Scalar form of the quadratic Tsallis bounds on a uniform grid of `[m, M]`:
/// `lower(x) <= (x^q - 1)/q <= upper(x)` with
/// `lower(x) = S(x) - (1-q)M^(q-2)/2 (x-m)(x-M) + Omega`,
/// `upper(x) = S(x) - (1-q)m^(q-2)/2 (x-m)(x-M) - Omega`.
///
/// Every violation above `1e-12` (largest per side) becomes a finding.
pub fn scalar_tsallis_inequality_check(params: &EntropyParams, grid_size: usize) -> Result<ScalarGridReport> {
    params.validate()?;
    if grid_size < 2 {
        return Err(Error::Parameter("grid size must be at least 2".into()));
    }
    let (q, m, big_m) = (params.q, params.m, params.big_m);
    let c = tsallis_constants(q, m, big_m);
    let sides = |x: f64| {
        let t = (x.powf(q) - 1.0) / q;
        let s = c.secant0 + c.secant1 * x;
        let quad = (x - m) * (x - big_m);
        let lower = s - c.curv_lower * quad + c.omega;
        let upper = s - c.curv_upper * quad - c.omega;
        [lower - t, t - upper]
    };
    let mut best = [(f64::NEG_INFINITY, m); 2];
    for i in 0..grid_size {
        let x = if i + 1 == grid_size {
            big_m
        } else {
            m + (big_m - m) * i as f64 / (grid_size - 1) as f64
        };
        let v = sides(x);
        for s in 0..2 {
            if v[s] > best[s].0 {
                best[s] = (v[s], x);
            }
        }
    }
    let findings = ["lower", "upper"]
        .iter()
        .zip(best.iter())
        .filter(|(_, (v, _))| *v > SCALAR_TOL)
        .map(|(side, &(violation, x))| ScalarFinding {
            side: side.to_string(),
            x,
            violation,
        })
        .collect();
    Ok(ScalarGridReport {
        params: *params,
        grid_size,
        max_lower_violation: best[0].0,
        arg_lower: best[0].1,
        max_upper_violation: best[1].0,
        arg_upper: best[1].1,
        endpoint_violations: [sides(m), sides(big_m)],
        omega: c.omega,
        underflow: c.omega_underflow,
        tolerance: SCALAR_TOL,
        findings,
    })
}
