//! Per-eigenvalue scalar oracles for commuting instances.
#![allow(dead_code)]

use loewner_core::loewner::Relation;

pub const TOL: f64 = 1e-9;

/// Verdict rule applied to a list of scalar gaps `upper - lower`.
pub fn relation(gaps: &[f64], tol: f64) -> Relation {
    let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = tol * (1.0 + lo.abs().max(hi.abs()));
    match (lo >= -slack, hi <= slack) {
        (true, true) => Relation::Equal,
        (true, false) => Relation::Leq,
        (false, true) => Relation::Geq,
        (false, false) => Relation::Incomparable,
    }
}

/// Distance of the decision statistic from the verdict threshold.
pub fn margin(gaps: &[f64], tol: f64) -> f64 {
    let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = tol * (1.0 + lo.abs().max(hi.abs()));
    (lo + slack).abs().min((hi - slack).abs())
}

pub fn k2(lo: f64, hi: f64) -> f64 {
    (lo + hi) * (lo + hi) / (4.0 * lo * hi)
}

pub fn omega(q: f64, m: f64, big_m: f64) -> f64 {
    m.powf(q) / (big_m + m).powf(big_m * m)
}

pub fn secant(q: f64, m: f64, big_m: f64, x: f64) -> f64 {
    -((x - m) * (1.0 - big_m.powf(q)) + (big_m - x) * (1.0 - m.powf(q))) / (q * (big_m - m))
}

/// `(p_L(x), p_U(x))` of the quadratic Tsallis pair.
pub fn tsallis_pair(q: f64, m: f64, big_m: f64, x: f64) -> (f64, f64) {
    let quad = x * x - (big_m + m) * x + big_m * m;
    let s = secant(q, m, big_m, x);
    let w = omega(q, m, big_m);
    (
        s - (1.0 - q) * big_m.powf(q - 2.0) / 2.0 * quad + w,
        s - (1.0 - q) * m.powf(q - 2.0) / 2.0 * quad - w,
    )
}

pub fn tsallis(a: f64, b: f64, q: f64) -> f64 {
    (a.powf(1.0 - q) * b.powf(q) - a) / q
}

/// `(lower, upper)` of the quadratic bounds on `T_q(a|b)`.
pub fn tsallis_bounds(a: f64, b: f64, q: f64, m: f64, big_m: f64) -> (f64, f64) {
    let gamma = -((b - m * a) * (1.0 - big_m.powf(q)) + (big_m * a - b) * (1.0 - m.powf(q))) / (q * (big_m - m));
    let psi = b * b / a - (big_m + m) * b + big_m * m * a;
    let w = omega(q, m, big_m) * a;
    (
        gamma - (1.0 - q) * big_m.powf(q - 2.0) / 2.0 * psi + w,
        gamma - (1.0 - q) * m.powf(q - 2.0) / 2.0 * psi - w,
    )
}

pub fn relent_bounds(a: f64, b: f64, m: f64, big_m: f64) -> (f64, f64) {
    let gamma = ((b - m * a) * big_m.ln() + (big_m * a - b) * m.ln()) / (big_m - m);
    let psi = b * b / a - (big_m + m) * b + big_m * m * a;
    let w = a / (big_m + m).powf(big_m * m);
    (gamma - psi / (2.0 * big_m * big_m) + w, gamma - psi / (2.0 * m * m) - w)
}

pub fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().enumerate().map(|(i, c)| c * x.powi(i as i32)).sum()
}

/// Per-eigenvalue operators of the compressed-entropy sandwich.
pub struct EntropyScalars {
    pub w: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub lemma7_upper: Vec<f64>,
    pub phi_t: Vec<f64>,
    pub center: Vec<f64>,
}

impl EntropyScalars {
    pub fn lower_gaps(&self) -> Vec<f64> {
        (0..self.w.len())
            .map(|j| self.center[j] - (self.phi_t[j] - (self.w[j] - self.z[j])))
            .collect()
    }

    pub fn upper_gaps(&self) -> Vec<f64> {
        (0..self.w.len())
            .map(|j| self.phi_t[j] - (self.x[j] - self.y[j]) - self.center[j])
            .collect()
    }

    pub fn lemma7_lower_gaps(&self) -> Vec<f64> {
        (0..self.w.len()).map(|j| self.phi_t[j] - self.x[j]).collect()
    }

    pub fn lemma7_upper_gaps(&self) -> Vec<f64> {
        (0..self.w.len()).map(|j| self.lemma7_upper[j] - self.phi_t[j]).collect()
    }
}

/// `A = diag(a)`, `B = diag(a c)` in a shared basis, quadratic `coeffs`.
pub fn entropy_scalars(a: &[f64], c: &[f64], coeffs: &[f64], q: f64, m: f64, big_m: f64) -> EntropyScalars {
    let pl: Vec<f64> = c.iter().map(|&x| tsallis_pair(q, m, big_m, x).0).collect();
    let pu: Vec<f64> = c.iter().map(|&x| tsallis_pair(q, m, big_m, x).1).collect();
    let range = |v: &[f64]| {
        (
            v.iter().copied().fold(f64::INFINITY, f64::min),
            v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let (ll, lh) = range(&pl);
    let (ul, uh) = range(&pu);
    let (kl, ku) = (k2(ll, lh), k2(ul, uh));
    let a0 = coeffs[0];
    let a1 = coeffs.get(1).copied().unwrap_or(0.0);
    let a2 = coeffs.get(2).copied().unwrap_or(0.0);
    let mut out = EntropyScalars {
        w: vec![],
        x: vec![],
        y: vec![],
        z: vec![],
        lemma7_upper: vec![],
        phi_t: vec![],
        center: vec![],
    };
    for j in 0..a.len() {
        let (aj, l, u) = (a[j], pl[j], pu[j]);
        out.w.push(a0 + a1 * aj * l + a2 * ku * aj * aj * l * l);
        out.x.push(a0 + a1 * aj * l + a2 / kl * aj * aj * l * l);
        out.lemma7_upper.push(a0 + a1 * aj * u + a2 * ku * aj * aj * u * u);
        let alpha = poly(coeffs, aj);
        let beta = poly(coeffs, aj * c[j]);
        let (z, y) = tsallis_bounds(alpha, beta, q, m, big_m);
        out.z.push(z);
        out.y.push(y);
        out.phi_t.push(poly(coeffs, tsallis(aj, aj * c[j], q)));
        out.center.push(tsallis(alpha, beta, q));
    }
    out
}
