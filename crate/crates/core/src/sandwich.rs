//! One-sided polynomial approximants `p_L <= f <= p_U` on `[m, M]`.
//!
//! Approximants are built by Chebyshev interpolation, certified on a dense
//! grid, and shifted by the measured sup-error so that one-sidedness holds by
//! construction. Polynomials built that way keep their Chebyshev coefficients
//! for evaluation (Clenshaw), which stays stable at degrees where the
//! monomial form would lose every digit; the monomial coefficients are still
//! available for reporting and for the closed-form constructions.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspec::ScalarFunction;
use crate::kantorovich::golden_section_max;
use crate::matrix::{CMatrix, HermitianMatrix};

pub const MAX_DEGREE: usize = 256;
pub const START_DEGREE: usize = 2;
/// Grid points per unit of `degree + 1` used by [`sup_error`].
pub const GRID_PER_DEGREE: usize = 1000;
/// Relative slack allowed by the certification invariant.
pub const SLACK_RTOL: f64 = 1e-12;
/// Grid size used to certify closed-form pairs.
pub const CLOSED_FORM_GRID: usize = 10_001;

const MAX_REFINED_PEAKS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Basis {
    Monomial,
    /// Chebyshev polynomials of the first kind in `(2x - lo - hi) / (hi - lo)`.
    Chebyshev { lo: f64, hi: f64 },
}

/// A real polynomial. [`Polynomial::monomial_coeffs`] always gives the
/// ascending-degree monomial form `c0 + c1 x + ... + cn x^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    basis: Basis,
    coeffs: Vec<f64>,
}

fn trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    if c.is_empty() {
        c.push(0.0);
    }
    c
}

impl Polynomial {
    pub fn monomial(coeffs: Vec<f64>) -> Self {
        Self {
            basis: Basis::Monomial,
            coeffs: trim(coeffs),
        }
    }

    pub fn chebyshev(coeffs: Vec<f64>, lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "Chebyshev interval needs lo < hi");
        Self {
            basis: Basis::Chebyshev { lo, hi },
            coeffs: trim(coeffs),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(vec![c])
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Coefficients in the polynomial's own basis.
    pub fn raw_coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `p + delta` (the constant term is shared by both bases since `T_0 = 1`).
    pub fn shifted(&self, delta: f64) -> Self {
        let mut c = self.coeffs.clone();
        c[0] += delta;
        Self {
            basis: self.basis,
            coeffs: c,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.basis {
            Basis::Monomial => self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c),
            Basis::Chebyshev { lo, hi } => {
                let t = (2.0 * x - lo - hi) / (hi - lo);
                let (mut b1, mut b2) = (0.0, 0.0);
                for &c in self.coeffs[1..].iter().rev() {
                    let b0 = c + 2.0 * t * b1 - b2;
                    b2 = b1;
                    b1 = b0;
                }
                self.coeffs[0] + t * b1 - b2
            }
        }
    }

    /// Ascending monomial coefficients in `x`.
    pub fn monomial_coeffs(&self) -> Vec<f64> {
        match self.basis {
            Basis::Monomial => self.coeffs.clone(),
            Basis::Chebyshev { lo, hi } => {
                // t = alpha x + beta
                let alpha = 2.0 / (hi - lo);
                let beta = -(hi + lo) / (hi - lo);
                let n = self.coeffs.len();
                let mut out = vec![0.0; n];
                let mut t_prev = vec![1.0];
                let mut t_cur = vec![beta, alpha];
                out[0] += self.coeffs[0];
                if n > 1 {
                    for (k, v) in t_cur.iter().enumerate() {
                        out[k] += self.coeffs[1] * v;
                    }
                }
                for k in 2..n {
                    let mut next = vec![0.0; k + 1];
                    for (i, &v) in t_cur.iter().enumerate() {
                        next[i] += 2.0 * beta * v;
                        next[i + 1] += 2.0 * alpha * v;
                    }
                    for (i, &v) in t_prev.iter().enumerate() {
                        next[i] -= v;
                    }
                    for (i, v) in next.iter().enumerate() {
                        out[i] += self.coeffs[k] * v;
                    }
                    t_prev = t_cur;
                    t_cur = next;
                }
                trim(out)
            }
        }
    }

    /// `p(A)` in matrix arithmetic: Horner for the monomial basis, Clenshaw
    /// for the Chebyshev basis.
    pub fn eval_matrix(&self, a: &HermitianMatrix) -> HermitianMatrix {
        let n = a.dim();
        let id = CMatrix::identity(n, n);
        let scalar = |c: f64| Complex64::new(c, 0.0);
        let out = match self.basis {
            Basis::Monomial => {
                let mut acc: CMatrix = &id * scalar(*self.coeffs.last().unwrap());
                for &c in self.coeffs.iter().rev().skip(1) {
                    acc = &acc * a.as_matrix() + &id * scalar(c);
                }
                acc
            }
            Basis::Chebyshev { lo, hi } => {
                let alpha = 2.0 / (hi - lo);
                let beta = -(hi + lo) / (hi - lo);
                let t: CMatrix = a.as_matrix() * scalar(alpha) + &id * scalar(beta);
                let two_t: CMatrix = &t * scalar(2.0);
                let mut b1: CMatrix = DMatrix::zeros(n, n);
                let mut b2: CMatrix = DMatrix::zeros(n, n);
                for &c in self.coeffs[1..].iter().rev() {
                    let b0 = &id * scalar(c) + &two_t * &b1 - &b2;
                    b2 = b1;
                    b1 = b0;
                }
                &id * scalar(self.coeffs[0]) + &t * &b1 - &b2
            }
        };
        HermitianMatrix::from_computed(out)
    }
}

/// `p(A)`.
pub fn eval_poly_matrix(p: &Polynomial, a: &HermitianMatrix) -> HermitianMatrix {
    p.eval_matrix(a)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ChebyshevJson {
    interval: [f64; 2],
    coeffs: Vec<f64>,
}

/// Wire form `{"coeffs": [c0, ..., cn]}`; polynomials held in the Chebyshev
/// basis additionally carry `"chebyshev": {"interval": [lo, hi], "coeffs": [...]}`,
/// which takes precedence when read back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct PolynomialJson {
    coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chebyshev: Option<ChebyshevJson>,
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let chebyshev = match self.basis {
            Basis::Monomial => None,
            Basis::Chebyshev { lo, hi } => Some(ChebyshevJson {
                interval: [lo, hi],
                coeffs: self.coeffs.clone(),
            }),
        };
        PolynomialJson {
            coeffs: self.monomial_coeffs(),
            chebyshev,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = PolynomialJson::deserialize(d)?;
        match json.chebyshev {
            Some(c) => {
                if !(c.interval[0] < c.interval[1]) || c.coeffs.is_empty() {
                    return Err(serde::de::Error::custom("invalid Chebyshev block"));
                }
                Ok(Polynomial::chebyshev(c.coeffs, c.interval[0], c.interval[1]))
            }
            None if json.coeffs.is_empty() => Err(serde::de::Error::custom("empty coefficient list")),
            None => Ok(Polynomial::monomial(json.coeffs)),
        }
    }
}

fn check_interval(m: f64, big_m: f64) -> Result<()> {
    if !(m.is_finite() && big_m.is_finite() && m < big_m) {
        return Err(Error::Parameter(format!("interval needs m < M, got [{m}, {big_m}]")));
    }
    Ok(())
}

/// Interpolant of degree `degree` at the Chebyshev points of `[m, M]`.
pub fn interpolate(f: &ScalarFunction, m: f64, big_m: f64, degree: usize) -> Result<Polynomial> {
    check_interval(m, big_m)?;
    let n = degree + 1;
    let angles: Vec<f64> = (0..n)
        .map(|j| std::f64::consts::PI * (j as f64 + 0.5) / n as f64)
        .collect();
    let values = angles
        .iter()
        .map(|th| {
            let x = 0.5 * (m + big_m) + 0.5 * (big_m - m) * th.cos();
            f.eval(x.clamp(m, big_m))
        })
        .collect::<Result<Vec<_>>>()?;
    let coeffs = (0..n)
        .map(|k| {
            let s: f64 = values
                .iter()
                .zip(&angles)
                .map(|(v, th)| v * (k as f64 * th).cos())
                .sum();
            if k == 0 {
                s / n as f64
            } else {
                2.0 * s / n as f64
            }
        })
        .collect();
    Ok(Polynomial::chebyshev(coeffs, m, big_m))
}

/// Sup-error estimate with its location.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SupError {
    pub value: f64,
    pub arg_max: f64,
    pub grid_size: usize,
    /// Largest `|f|` seen on the grid.
    pub f_sup: f64,
}

pub fn default_grid_size(degree: usize) -> usize {
    GRID_PER_DEGREE * (degree + 1) + 1
}

fn grid_point(m: f64, big_m: f64, i: usize, size: usize) -> f64 {
    if i + 1 == size {
        big_m
    } else {
        m + (big_m - m) * i as f64 / (size - 1) as f64
    }
}

/// `max |f - p|` on the default grid, refined by golden-section search in the
/// neighbouring cells of the arg-max (and of every other grid peak within a
/// factor two of it).
pub fn sup_error_detail(f: &ScalarFunction, p: &Polynomial, m: f64, big_m: f64) -> Result<SupError> {
    check_interval(m, big_m)?;
    let size = default_grid_size(p.degree());
    let mut errs = Vec::with_capacity(size);
    let mut f_sup = 0.0_f64;
    for i in 0..size {
        let x = grid_point(m, big_m, i, size);
        let fx = f.eval(x)?;
        f_sup = f_sup.max(fx.abs());
        errs.push((fx - p.eval(x)).abs());
    }
    let (mut arg_idx, mut best) = (0, errs[0]);
    for (i, &e) in errs.iter().enumerate() {
        if e > best {
            best = e;
            arg_idx = i;
        }
    }
    let mut peaks: Vec<usize> = (0..size)
        .filter(|&i| {
            let left = if i == 0 { f64::NEG_INFINITY } else { errs[i - 1] };
            let right = if i + 1 == size { f64::NEG_INFINITY } else { errs[i + 1] };
            errs[i] >= left && errs[i] >= right && errs[i] >= 0.5 * best
        })
        .collect();
    peaks.sort_by(|&a, &b| errs[b].partial_cmp(&errs[a]).unwrap().then(a.cmp(&b)));
    peaks.truncate(MAX_REFINED_PEAKS);
    if !peaks.contains(&arg_idx) {
        peaks.push(arg_idx);
    }
    let mut arg_max = grid_point(m, big_m, arg_idx, size);
    let g = |x: f64| match f.eval(x) {
        Ok(fx) => (fx - p.eval(x)).abs(),
        Err(_) => f64::NEG_INFINITY,
    };
    for i in peaks {
        let lo = grid_point(m, big_m, i.saturating_sub(1), size);
        let hi = grid_point(m, big_m, (i + 1).min(size - 1), size);
        let (x, v) = golden_section_max(g, lo, hi, 100);
        if v > best {
            best = v;
            arg_max = x;
        }
    }
    Ok(SupError {
        value: best,
        arg_max,
        grid_size: size,
        f_sup,
    })
}

/// Refined sup-norm distance between `f` and `p` on `[m, M]`.
pub fn sup_error(f: &ScalarFunction, p: &Polynomial, m: f64, big_m: f64) -> Result<f64> {
    Ok(sup_error_detail(f, p, m, big_m)?.value)
}

/// Certified one-sided pair around `f` on `interval`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SandwichPair {
    pub lower: Polynomial,
    pub upper: Polynomial,
    pub interval: [f64; 2],
    pub epsilon: f64,
    pub certified_grid_size: usize,
    pub slack: f64,
    /// A constant term underflowed to zero (closed-form pairs only).
    pub underflow: bool,
    /// A constant term is below the resolution of the other coefficients and
    /// vanished when added (closed-form pairs only).
    #[serde(default)]
    pub constant_absorbed: bool,
    pub function: String,
}

impl SandwichPair {
    pub fn contains_interval(&self, lo: f64, hi: f64) -> bool {
        let width = self.interval[1] - self.interval[0];
        let tol = 1e-12 * (1.0 + width + self.interval[0].abs().max(self.interval[1].abs()));
        lo >= self.interval[0] - tol && hi <= self.interval[1] + tol
    }
}

/// Searches degrees 2, 4, 8, ..., 256 for an interpolant within `epsilon / 2`
/// and returns `p -/+ delta` where `delta` is the certified sup-error.
pub fn build_sandwich(f: &ScalarFunction, m: f64, big_m: f64, epsilon: f64) -> Result<SandwichPair> {
    check_interval(m, big_m)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut best = f64::INFINITY;
    let mut degree = START_DEGREE;
    loop {
        let p = interpolate(f, m, big_m, degree)?;
        let err = sup_error_detail(f, &p, m, big_m)?;
        if !err.value.is_finite() {
            return Err(Error::NonFinite {
                x: err.arg_max,
                value: err.value,
            });
        }
        best = best.min(err.value);
        if err.value <= epsilon / 2.0 {
            return Ok(shifted_pair(f, p, m, big_m, err, epsilon));
        }
        if degree >= MAX_DEGREE {
            return Err(Error::ApproximationFailure {
                degree_cap: MAX_DEGREE,
                best_delta: best,
                target: epsilon / 2.0,
            });
        }
        degree *= 2;
    }
}

/// The pair `p -/+ delta` for an interpolant of fixed degree, without any
/// target accuracy (used for the quadratic configurations).
pub fn sandwich_at_degree(f: &ScalarFunction, m: f64, big_m: f64, degree: usize) -> Result<SandwichPair> {
    let p = interpolate(f, m, big_m, degree)?;
    let err = sup_error_detail(f, &p, m, big_m)?;
    if !err.value.is_finite() {
        return Err(Error::NonFinite {
            x: err.arg_max,
            value: err.value,
        });
    }
    Ok(shifted_pair(f, p, m, big_m, err, f64::INFINITY))
}

fn shifted_pair(
    f: &ScalarFunction,
    p: Polynomial,
    m: f64,
    big_m: f64,
    err: SupError,
    epsilon: f64,
) -> SandwichPair {
    // pad the measured error by evaluation-rounding headroom
    let mut delta = err.value * (1.0 + 1e-9) + 1e-15 * (1.0 + err.f_sup);
    if delta > epsilon / 2.0 {
        delta = (epsilon / 2.0).max(err.value);
    }
    SandwichPair {
        lower: p.shifted(-delta),
        upper: p.shifted(delta),
        interval: [m, big_m],
        epsilon: 2.0 * delta,
        certified_grid_size: err.grid_size,
        slack: SLACK_RTOL * (1.0 + err.f_sup),
        underflow: false,
        constant_absorbed: false,
        function: f.describe(),
    }
}

/// Worst-case one-sided residuals of a pair against `f` at given points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SandwichCheck {
    /// `max (p_L - f)`, should be `<= slack`.
    pub lower_excess: f64,
    /// `max (f - p_U)`, should be `<= slack`.
    pub upper_excess: f64,
    /// `max (f - p_L)`, should be `<= epsilon + slack`.
    pub lower_gap: f64,
    /// `max (p_U - f)`, should be `<= epsilon + slack`.
    pub upper_gap: f64,
    pub holds: bool,
}

pub fn check_sandwich(pair: &SandwichPair, f: &ScalarFunction, points: &[f64]) -> Result<SandwichCheck> {
    let mut c = SandwichCheck {
        lower_excess: f64::NEG_INFINITY,
        upper_excess: f64::NEG_INFINITY,
        lower_gap: f64::NEG_INFINITY,
        upper_gap: f64::NEG_INFINITY,
        holds: false,
    };
    for &x in points {
        let fx = f.eval(x)?;
        let lo = pair.lower.eval(x);
        let hi = pair.upper.eval(x);
        c.lower_excess = c.lower_excess.max(lo - fx);
        c.upper_excess = c.upper_excess.max(fx - hi);
        c.lower_gap = c.lower_gap.max(fx - lo);
        c.upper_gap = c.upper_gap.max(hi - fx);
    }
    c.holds = c.lower_excess <= pair.slack
        && c.upper_excess <= pair.slack
        && c.lower_gap <= pair.epsilon + pair.slack
        && c.upper_gap <= pair.epsilon + pair.slack;
    Ok(c)
}

/// The closed-form quadratic pair around `(x^q - 1)/q` on `[m, M]`:
///
/// ```text
/// p_L(x) = S(x) - (1-q) M^(q-2)/2 * (x^2 - (M+m) x + M m) + m^q / (M+m)^(M m)
/// p_U(x) = S(x) - (1-q) m^(q-2)/2 * (x^2 - (M+m) x + M m) - m^q / (M+m)^(M m)
/// S(x)   = -((x-m)(1-M^q) + (M-x)(1-m^q)) / (q (M-m))
/// ```
///
/// Requires `0 < q <= 1`, `m >= 2` and `M >= 5m`.
pub fn tsallis_sandwich_polynomials(q: f64, m: f64, big_m: f64) -> Result<SandwichPair> {
    tsallis_sandwich_polynomials_with(q, m, big_m, false)
}

/// As [`tsallis_sandwich_polynomials`]; `relax` skips the `m >= 2`,
/// `M >= 5m` hypotheses (but not `0 < m < M`, `0 < q <= 1`).
pub fn tsallis_sandwich_polynomials_with(q: f64, m: f64, big_m: f64, relax: bool) -> Result<SandwichPair> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Constraint(format!("0 < q <= 1 required, got q = {q}")));
    }
    if !(m > 0.0 && m < big_m && big_m.is_finite()) {
        return Err(Error::Constraint(format!("0 < m < M required, got m = {m}, M = {big_m}")));
    }
    if !relax && !(m >= 2.0 && big_m >= 5.0 * m) {
        return Err(Error::Constraint(format!(
            "m >= 2 and M >= 5m required, got m = {m}, M = {big_m}"
        )));
    }
    let c = tsallis_constants(q, m, big_m);
    let quad = [m * big_m, -(m + big_m), 1.0];
    let build = |curv: f64, sign: f64| {
        Polynomial::monomial(vec![
            c.secant0 - curv * quad[0] + sign * c.omega,
            c.secant1 - curv * quad[1],
            -curv * quad[2],
        ])
    };
    let lower = build(c.curv_lower, 1.0);
    let upper = build(c.curv_upper, -1.0);
    let f = crate::funcspec::ScalarFunction::catalog(crate::funcspec::CatalogFunction::TsallisDev(q));
    let size = CLOSED_FORM_GRID;
    let mut eps = 0.0_f64;
    let mut f_sup = 0.0_f64;
    for i in 0..size {
        let x = grid_point(m, big_m, i, size);
        let fx = f.eval(x)?;
        f_sup = f_sup.max(fx.abs());
        eps = eps.max(fx - lower.eval(x)).max(upper.eval(x) - fx);
    }
    let absorbed = c.omega != 0.0 && (c.secant0 - c.curv_lower * quad[0] + c.omega) == (c.secant0 - c.curv_lower * quad[0]);
    Ok(SandwichPair {
        lower,
        upper,
        interval: [m, big_m],
        epsilon: eps,
        certified_grid_size: size,
        slack: SLACK_RTOL * (1.0 + f_sup),
        underflow: c.omega_underflow,
        constant_absorbed: absorbed,
        function: f.describe(),
    })
}

/// Scalar ingredients of the Tsallis quadratic bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TsallisConstants {
    /// `S(x) = secant0 + secant1 x` (secant of `(x^q - 1)/q` through `m`, `M`).
    pub secant0: f64,
    pub secant1: f64,
    /// `(1-q) M^(q-2) / 2`.
    pub curv_lower: f64,
    /// `(1-q) m^(q-2) / 2`.
    pub curv_upper: f64,
    /// `m^q / (M+m)^(M m)`, evaluated in log space.
    pub omega: f64,
    pub omega_underflow: bool,
}

pub fn tsallis_constants(q: f64, m: f64, big_m: f64) -> TsallisConstants {
    let u = 1.0 - big_m.powf(q);
    let v = 1.0 - m.powf(q);
    let den = q * (big_m - m);
    let (omega, omega_underflow) = omega_scalar(q, m, big_m);
    TsallisConstants {
        secant0: (m * u - big_m * v) / den,
        secant1: (v - u) / den,
        curv_lower: (1.0 - q) * big_m.powf(q - 2.0) / 2.0,
        curv_upper: (1.0 - q) * m.powf(q - 2.0) / 2.0,
        omega,
        omega_underflow,
    }
}

/// `m^q / (M+m)^(M m)` as `exp(q ln m - M m ln(M+m))`; the flag reports
/// underflow to zero.
pub fn omega_scalar(q: f64, m: f64, big_m: f64) -> (f64, bool) {
    let log_value = q * m.ln() - big_m * m * (big_m + m).ln();
    let value = log_value.exp();
    (value, value == 0.0)
}
