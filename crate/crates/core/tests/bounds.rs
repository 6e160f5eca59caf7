use loewner_core::cdj::{
    classical_cdj_check, lemma1_power_bounds, lemma2_phi_f_bounds, lemma3_f_phi_bounds, theorem1_sandwich, CdjScales, Sign,
    R1_FLAG,
};
use loewner_core::funcspec::{CatalogFunction, ScalarFunction};
use loewner_core::harness::{example2_instance, example2_report};
use loewner_core::kantorovich::{kantorovich_f, kantorovich_r};
use loewner_core::loewner::loewner_compare;
use loewner_core::phimap::{is_normalized_positive_linear, phi_apply, PhiMap};
use loewner_core::random::{gen_hermitian_with_spectrum, random_isometry, random_unitary, rng_from_seed};
use loewner_core::sandwich::{build_sandwich, check_sandwich, sandwich_at_degree, Polynomial};
use loewner_core::spectral::{apply_function, eigenvalues};
use loewner_core::HermitianMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn cat(c: CatalogFunction) -> ScalarFunction {
    ScalarFunction::catalog(c)
}

fn catalog_on(which: usize) -> (ScalarFunction, f64, f64) {
    match which % 5 {
        0 => (cat(CatalogFunction::Exp), -1.0, 2.0),
        1 => (cat(CatalogFunction::Log), 1.0, 2.0),
        2 => (cat(CatalogFunction::Power(0.5)), 0.5, 4.0),
        3 => (cat(CatalogFunction::Power(3.0)), -1.0, 1.5),
        _ => (cat(CatalogFunction::QLog(0.5)), 0.5, 3.0),
    }
}

#[test]
fn polynomial_bases_agree() {
    let p = Polynomial::chebyshev(vec![0.5, -1.0, 0.25, 2.0], 1.0, 3.0);
    let mono = Polynomial::monomial(p.monomial_coeffs());
    for i in 0..=20 {
        let x = 1.0 + 0.1 * i as f64;
        assert!((p.eval(x) - mono.eval(x)).abs() < 1e-11);
    }
    let a = gen_hermitian_with_spectrum(3, 1.0, 3.0, 2).unwrap();
    assert!(p.eval_matrix(&a).max_abs_diff(&mono.eval_matrix(&a)) < 1e-10);
}

#[test]
fn build_sandwich_rejects_bad_input() {
    let f = cat(CatalogFunction::Exp);
    assert!(build_sandwich(&f, 2.0, 1.0, 1e-3).is_err());
    assert!(build_sandwich(&f, 0.0, 1.0, 0.0).is_err());
    assert!(build_sandwich(&cat(CatalogFunction::Log), -1.0, 1.0, 1e-3).is_err());
    assert!(build_sandwich(&cat(CatalogFunction::Abs), -1.0, 1.0, 1e-12).is_err());
}

#[test]
fn kantorovich_of_power_matches_function_form() {
    for (m, big_m) in [(1.0, 2.0), (0.5, 3.0), (2.0, 10.0)] {
        for r in [2.0, 3.0, 2.5] {
            let kf = kantorovich_f(m, big_m, &cat(CatalogFunction::Power(r))).unwrap().value;
            let kr = kantorovich_r(m, big_m, r).unwrap();
            assert!((kf - kr).abs() <= 1e-8 * kr, "m={m} M={big_m} r={r}: {kf} vs {kr}");
        }
    }
}

#[test]
fn lemma3_bracket_shrinks_with_epsilon() {
    for seed in 0..20 {
        let mut rng = rng_from_seed(seed);
        let n = rng.gen_range(2..=4);
        let a = gen_hermitian_with_spectrum(n, 1.0, 2.0, seed + 1000).unwrap();
        let v = random_isometry(n, n - 1, &mut rng);
        let phi = PhiMap::new(v, vec![0.1, 1.0, 0.2]).unwrap();
        let f = cat(CatalogFunction::Log);
        let mut previous = f64::INFINITY;
        let mut eps = 1e-1;
        for _ in 0..6 {
            let b = lemma3_f_phi_bounds(&phi, &f, &a, eps).unwrap();
            let width = *eigenvalues(&(&b.upper - &b.lower)).unwrap().last().unwrap();
            assert!(width <= previous + 1e-9, "seed {seed}: {width} after {previous}");
            previous = width;
            eps /= 2.0;
        }
    }
}

#[test]
fn theorem1_identities_for_scales() {
    let f = cat(CatalogFunction::Exp);
    let mut rng = rng_from_seed(77);
    for seed in 0..10u64 {
        let a = gen_hermitian_with_spectrum(3, 0.5, 1.5, seed).unwrap();
        let phi = PhiMap::new(random_unitary(3, &mut rng), vec![1.0, -0.5, 0.4]).unwrap();
        let (c, d, e) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
        let r = theorem1_sandwich(&phi, &f, &a, 1e-3, CdjScales::new(c, d, e).unwrap()).unwrap();
        let unit = theorem1_sandwich(&phi, &f, &a, 1e-3, CdjScales::unit()).unwrap();
        let ub = &unit.w;
        let lb = &unit.x;
        let lower = &(&r.phi_f - ub).scale(e) + &unit.z;
        let upper = &(&r.phi_f - lb).scale(e) + &unit.y;
        let scale = 1.0 + r.lower_op.max_abs().max(r.upper_op.max_abs());
        assert!(r.lower_op.max_abs_diff(&lower) <= 1e-10 * scale);
        assert!(r.upper_op.max_abs_diff(&upper) <= 1e-10 * scale);
        assert!(r.center.max_abs_diff(&apply_function(&f, &phi_apply(&phi, &a).unwrap()).unwrap()) < 1e-12 * scale);
    }
}

#[test]
fn example2_verdicts_reproduce() {
    for seed in 0..10 {
        let (phi, a) = example2_instance(seed, 3).unwrap();
        let r1 = example2_report(&phi, &a).unwrap();
        let (phi2, a2) = example2_instance(seed, 3).unwrap();
        let r2 = example2_report(&phi2, &a2).unwrap();
        assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r2).unwrap());
        assert!(r1.metadata.flags.iter().any(|f| f == R1_FLAG));
    }
}

#[test]
fn lemma2_exact_pair_recovers_phi_f() {
    // with the exact quadratic as its own sandwich, the i = 1 term is exact
    // and the bracket contains Phi(f(A))
    let f = cat(CatalogFunction::Power(2.0));
    let pair = sandwich_at_degree(&f, 1.0, 3.0, 2).unwrap();
    let a = gen_hermitian_with_spectrum(3, 1.0, 3.0, 5).unwrap();
    let phi = PhiMap::new(random_unitary(3, &mut rng_from_seed(5)), vec![0.0, 1.0]).unwrap();
    let b = lemma2_phi_f_bounds(&phi, &pair, &a).unwrap();
    let phi_f = phi_apply(&phi, &apply_function(&f, &a).unwrap()).unwrap();
    assert!(b.lower.max_abs_diff(&phi_f) < 1e-8 && b.upper.max_abs_diff(&phi_f) < 1e-8);
    assert_eq!(b.terms.len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sandwich_holds_on_fresh_grid(which in 0usize..5, seed in any::<u64>(), log_eps in -4.0f64..-1.0) {
        let (f, lo, hi) = catalog_on(which);
        let eps = 10f64.powf(log_eps);
        let pair = build_sandwich(&f, lo, hi, eps).unwrap();
        prop_assert!(pair.epsilon <= eps);
        let mut rng = rng_from_seed(seed);
        let grid: Vec<f64> = (0..10_000).map(|_| rng.gen_range(lo..=hi)).collect();
        let check = check_sandwich(&pair, &f, &grid).unwrap();
        prop_assert!(check.holds, "{check:?}");
    }

    #[test]
    fn polynomial_commutes_with_conjugation(seed in any::<u64>(), n in 1usize..5) {
        let (f, lo, hi) = catalog_on(seed as usize);
        let pair = build_sandwich(&f, lo, hi, 1e-3).unwrap();
        let a = gen_hermitian_with_spectrum(n, lo, hi, seed).unwrap();
        let u = random_unitary(n, &mut rng_from_seed(seed ^ 0xabc));
        let conj = a.congruence(&u.adjoint()).unwrap();
        let lhs = pair.upper.eval_matrix(&conj);
        let rhs = pair.upper.eval_matrix(&a).congruence(&u.adjoint()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn sandwich_transfers_to_matrices(seed in any::<u64>(), n in 1usize..5) {
        let (f, lo, hi) = catalog_on(seed as usize);
        let pair = build_sandwich(&f, lo, hi, 1e-3).unwrap();
        let a = gen_hermitian_with_spectrum(n, lo, hi, seed).unwrap();
        let fa = apply_function(&f, &a).unwrap();
        prop_assert!(loewner_compare(&pair.lower.eval_matrix(&a), &fa, 1e-9).unwrap().holds_leq());
        prop_assert!(loewner_compare(&fa, &pair.upper.eval_matrix(&a), 1e-9).unwrap().holds_leq());
    }

    #[test]
    fn kantorovich_scale_invariance(m in 0.1f64..5.0, w in 0.01f64..10.0, r in -2.0f64..3.0, c in 0.1f64..10.0) {
        prop_assume!((r - 1.0).abs() > 1e-3);
        let k = kantorovich_r(m, m + w, r).unwrap();
        let kc = kantorovich_r(c * m, c * (m + w), r).unwrap();
        prop_assert!((k - kc).abs() <= 1e-10 * k);
        if r > 0.0 && r < 1.0 {
            prop_assert!(k <= 1.0 + 1e-12);
        } else {
            prop_assert!(k >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn kantorovich_two_closed_form(m in 0.01f64..10.0, w in 1e-6f64..50.0) {
        let big_m = m + w;
        let expected = (big_m + m).powi(2) / (4.0 * m * big_m);
        prop_assert!((kantorovich_r(m, big_m, 2.0).unwrap() - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn kantorovich_function_form_at_least_one(which in 0usize..4, m in 0.5f64..2.0, w in 0.1f64..3.0) {
        let f = [CatalogFunction::Exp, CatalogFunction::Sqrt, CatalogFunction::Power(3.0), CatalogFunction::Power(-1.0)][which];
        prop_assert!(kantorovich_f(m, m + w, &cat(f)).unwrap().value >= 1.0 - 1e-12);
    }

    #[test]
    fn phi_image_is_hermitian_with_real_spectrum(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let k = rng.gen_range(1..=n);
        let coeffs: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi = PhiMap::new(random_isometry(n, k, &mut rng), coeffs).unwrap();
        let x = gen_hermitian_with_spectrum(n, -2.0, 2.0, seed ^ 1).unwrap();
        let y = phi_apply(&phi, &x).unwrap();
        let m = y.as_matrix();
        let defect = (m - m.adjoint()).iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
        prop_assert!(defect == 0.0);
        prop_assert_eq!(y.dim(), k);
        prop_assert!(eigenvalues(&y).unwrap().iter().all(|l| l.is_finite()));
    }

    #[test]
    fn compression_preserves_order(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let k = rng.gen_range(1..=n);
        let phi = PhiMap::compression(random_isometry(n, k, &mut rng)).unwrap();
        let a = gen_hermitian_with_spectrum(n, -1.0, 1.0, seed ^ 2).unwrap();
        let b = &a + &gen_hermitian_with_spectrum(n, 0.0, 1.0, seed ^ 3).unwrap();
        let verdict = loewner_compare(&phi_apply(&phi, &a).unwrap(), &phi_apply(&phi, &b).unwrap(), 1e-9).unwrap();
        prop_assert!(verdict.holds_leq());
        prop_assert!(is_normalized_positive_linear(&phi, 5, seed).unwrap().0);
    }

    #[test]
    fn classical_inequality_for_square(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let k = rng.gen_range(1..=n);
        let v = random_isometry(n, k, &mut rng);
        let a = gen_hermitian_with_spectrum(n, -2.0, 3.0, seed ^ 4).unwrap();
        prop_assert!(classical_cdj_check(&v, &cat(CatalogFunction::Power(2.0)), &a).unwrap().holds_leq());
    }

    #[test]
    fn lemma1_brackets_diagonal_powers(seed in any::<u64>(), n in 1usize..5, i in 2i32..4) {
        let mut rng = rng_from_seed(seed);
        let lambda: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..2.0)).collect();
        let a = HermitianMatrix::from_real_diagonal(&lambda);
        let f = cat(CatalogFunction::Exp);
        let pair = build_sandwich(&f, 1.0, 2.0, 1e-2).unwrap();
        let b = lemma1_power_bounds(&pair, &a, i, Sign::Plus).unwrap();
        let fi = HermitianMatrix::from_real_diagonal(&lambda.iter().map(|l| (l * i as f64).exp()).collect::<Vec<_>>());
        prop_assert!(loewner_compare(&b.lower, &fi, 1e-9).unwrap().holds_leq());
        prop_assert!(loewner_compare(&fi, &b.upper, 1e-9).unwrap().holds_leq());
    }
}

#[test]
fn identity_map_is_detected() {
    let phi = PhiMap::new(random_unitary(2, &mut rng_from_seed(0)), vec![0.0, 1.0]).unwrap();
    assert!(phi.is_identity_polynomial());
    let phi = PhiMap::new(random_unitary(2, &mut rng_from_seed(0)), vec![0.1, 1.0]).unwrap();
    let (npl, evidence) = is_normalized_positive_linear(&phi, 4, 0).unwrap();
    assert!(!npl && !evidence.violations.is_empty());
    let v = nalgebra::DMatrix::from_element(2, 1, Complex64::new(1.0, 0.0));
    assert!(PhiMap::compression(v).is_err());
}
