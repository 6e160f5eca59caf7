//! Generalized Kantorovich constants.
//!
//! `K(m, M, r) = (m M^r - M m^r) / ((r-1)(M-m)) * [ (r-1)(M^r - m^r) / (r (m M^r - M m^r)) ]^r`
//! for `0 < m < M`, `r != 1`, and the function form
//! `K(m, M, f) = max_{x in [m,M]} secant_f(x) / f(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspec::ScalarFunction;

/// Spectral intervals narrower than this (relative) are widened before a
/// Kantorovich constant is taken on them.
pub const DEGENERATE_RTOL: f64 = 1e-8;

/// Evaluates `K(m, M, r)`.
///
/// The formula is homogeneous of degree zero in `(m, M)`, so it is evaluated
/// at `(m/M, 1)` with `expm1`-based differences; this keeps it finite for
/// large arguments and accurate when `m` and `M` are close.
pub fn kantorovich_r(m: f64, big_m: f64, r: f64) -> Result<f64> {
    if !(m.is_finite() && big_m.is_finite() && r.is_finite()) {
        return Err(Error::Parameter(format!(
            "non-finite Kantorovich argument (m={m}, M={big_m}, r={r})"
        )));
    }
    if !(m > 0.0 && m < big_m) {
        return Err(Error::Parameter(format!(
            "Kantorovich function needs 0 < m < M, got m={m}, M={big_m}"
        )));
    }
    if r == 1.0 {
        return Err(Error::Parameter(
            "Kantorovich function is undefined at r = 1".into(),
        ));
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    let t = m / big_m;
    let ln_t = t.ln();
    // 1 - t^(r-1), 1 - t^r, 1 - t
    let a = -((r - 1.0) * ln_t).exp_m1();
    let b = -(r * ln_t).exp_m1();
    let one_minus_t = -ln_t.exp_m1();
    let prefactor = t * a / ((r - 1.0) * one_minus_t);
    let base = (r - 1.0) * b / (r * t * a);
    if !(base > 0.0) && r.fract() != 0.0 {
        return Err(Error::Domain(format!(
            "Kantorovich bracket {base} is not positive for fractional r={r}"
        )));
    }
    let value = prefactor * base.powf(r);
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::Domain(format!(
            "Kantorovich value {value} not a finite positive real (m={m}, M={big_m}, r={r})"
        )));
    }
    Ok(value)
}

/// Endpoints actually used for a Kantorovich constant taken on a spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralInterval {
    pub lo: f64,
    pub hi: f64,
    pub widened: bool,
}

/// Widens `[lo, hi]` symmetrically by `1e-8 (1 + |lambda|)` when it is
/// (numerically) a single point.
pub fn widen_if_degenerate(lo: f64, hi: f64) -> SpectralInterval {
    let mid = 0.5 * (lo + hi);
    let margin = DEGENERATE_RTOL * (1.0 + mid.abs());
    if hi - lo < margin {
        SpectralInterval {
            lo: mid - margin,
            hi: mid + margin,
            widened: true,
        }
    } else {
        SpectralInterval {
            lo,
            hi,
            widened: false,
        }
    }
}

/// Result of the grid-and-refine maximization behind `K(m, M, f)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KantorovichF {
    pub value: f64,
    pub arg_max: f64,
}

pub const KF_GRID_POINTS: usize = 10_001;

/// `K(m, M, f) = max_{x in [m,M]} ((M-x)/(M-m) f(m) + (x-m)/(M-m) f(M)) / f(x)`,
/// maximized on a 10^4+1 point grid and refined by golden-section search
/// around the grid arg-max.
pub fn kantorovich_f(m: f64, big_m: f64, f: &ScalarFunction) -> Result<KantorovichF> {
    if !(m > 0.0 && m < big_m && big_m.is_finite()) {
        return Err(Error::Parameter(format!(
            "K(m, M, f) needs 0 < m < M, got m={m}, M={big_m}"
        )));
    }
    let fm = f.eval(m)?;
    let f_big = f.eval(big_m)?;
    let ratio = |x: f64| -> Result<f64> {
        let fx = f.eval(x)?;
        if fx <= 0.0 {
            return Err(Error::Domain(format!(
                "K(m, M, f) needs f > 0 on [m, M]; f({x}) = {fx}"
            )));
        }
        let secant = ((big_m - x) * fm + (x - m) * f_big) / (big_m - m);
        Ok(secant / fx)
    };
    let h = (big_m - m) / (KF_GRID_POINTS - 1) as f64;
    let mut best = (f64::NEG_INFINITY, m);
    let mut best_idx = 0;
    for i in 0..KF_GRID_POINTS {
        let x = if i == KF_GRID_POINTS - 1 { big_m } else { m + i as f64 * h };
        let v = ratio(x)?;
        if v > best.0 {
            best = (v, x);
            best_idx = i;
        }
    }
    let lo = m + best_idx.saturating_sub(1) as f64 * h;
    let hi = (m + (best_idx + 1) as f64 * h).min(big_m);
    let (x_ref, v_ref) = golden_section_max(|x| ratio(x).unwrap_or(f64::NEG_INFINITY), lo, hi, 80);
    if v_ref > best.0 {
        best = (v_ref, x_ref);
    }
    Ok(KantorovichF {
        value: best.0,
        arg_max: best.1,
    })
}

/// Golden-section maximization of a function assumed unimodal on `[a, b]`.
/// Returns the best point seen (endpoints included).
pub(crate) fn golden_section_max<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, iters: usize) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut best = if g(a) >= g(b) { (a, g(a)) } else { (b, g(b)) };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    for _ in 0..iters {
        if gc > best.1 {
            best = (c, gc);
        }
        if gd > best.1 {
            best = (d, gd);
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
        if (b - a).abs() <= f64::EPSILON * (1.0 + a.abs()) {
            break;
        }
    }
    if gc > best.1 {
        best = (c, gc);
    }
    if gd > best.1 {
        best = (d, gd);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::CatalogFunction;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn exponent_zero_is_one() {
        assert_eq!(kantorovich_r(0.3, 7.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn exponent_two_closed_form() {
        assert!(rel(kantorovich_r(1.0, 2.0, 2.0).unwrap(), 1.125) < 1e-14);
    }

    // Reference values from a 50-digit evaluation of the defining formula.
    #[test]
    fn multiprecision_reference_values() {
        let cases = [
            (2.0, 10.0, 0.5, 0.924_176_371_830_444_789_052_133_186_076_16),
            (1.0, 2.0, 3.0, 1.411_522_633_744_855_967_078_189_300_411_52),
            (1.0, 2.0, -1.0, 1.125),
            (0.5, 4.0, 2.5, 5.073_933_302_505_582_633_338_664_264_125_77),
        ];
        for (m, big_m, r, expected) in cases {
            let got = kantorovich_r(m, big_m, r).unwrap();
            assert!(rel(got, expected) < 1e-12, "K({m},{big_m},{r}) = {got}, want {expected}");
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(kantorovich_r(1.0, 2.0, 1.0), Err(Error::Parameter(_))));
        assert!(kantorovich_r(0.0, 2.0, 2.0).is_err());
        assert!(kantorovich_r(3.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn close_endpoints_stay_accurate() {
        // K(m, M, 2) = (M+m)^2 / (4 m M) even when M/m - 1 ~ 1e-9
        let (m, big_m) = (1.0, 1.0 + 1e-9);
        let expected = (m + big_m) * (m + big_m) / (4.0 * m * big_m);
        assert!(rel(kantorovich_r(m, big_m, 2.0).unwrap(), expected) < 1e-14);
    }

    #[test]
    fn function_form_examples() {
        let c = ScalarFunction::catalog(CatalogFunction::Constant(3.0));
        assert!((kantorovich_f(1.0, 2.0, &c).unwrap().value - 1.0).abs() < 1e-15);
        let id = ScalarFunction::catalog(CatalogFunction::Identity);
        assert!((kantorovich_f(1.0, 5.0, &id).unwrap().value - 1.0).abs() < 1e-14);
        // maximize ((M+m)x - Mm)/x^2 on [1,2]: derivative zero at x = 2Mm/(M+m) = 4/3
        let sq = ScalarFunction::catalog(CatalogFunction::Power(2.0));
        let kf = kantorovich_f(1.0, 2.0, &sq).unwrap();
        assert!((kf.value - 1.125).abs() < 1e-12);
        assert!((kf.arg_max - 4.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn function_form_needs_positive_f() {
        let id = ScalarFunction::catalog(CatalogFunction::Identity);
        assert!(kantorovich_f(-1.0, 1.0, &id).is_err());
        let neg = ScalarFunction::catalog(CatalogFunction::Constant(-1.0));
        assert!(matches!(kantorovich_f(1.0, 2.0, &neg), Err(Error::Domain(_))));
    }

    #[test]
    fn degenerate_interval_widening() {
        let s = widen_if_degenerate(2.0, 2.0);
        assert!(s.widened && s.lo < 2.0 && s.hi > 2.0);
        let s = widen_if_degenerate(1.0, 3.0);
        assert!(!s.widened);
    }
}
