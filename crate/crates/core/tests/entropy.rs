mod common;

use common::{entropy_scalars, margin, relation, relent_bounds, tsallis, tsallis_bounds, TOL};
use loewner_core::entropy::{
    lemma4_bounds, lemma5_bounds, lemma6_bounds, lemma7_phi_of_tsallis_bounds, relative_operator_entropy,
    scalar_tsallis_inequality_check, theorem2_sandwich, tsallis_relative_entropy, EntropyParams,
};
use loewner_core::loewner::LoewnerVerdict;
use loewner_core::phimap::PhiMap;
use loewner_core::random::{conjugate_diagonal, gen_admissible_commuting, gen_hermitian_with_spectrum, gen_sandwiched_pair};
use loewner_core::HermitianMatrix;
use proptest::prelude::*;

fn check_verdict(v: &LoewnerVerdict, gaps: &[f64], what: &str) {
    // a verdict sitting within rounding of its threshold is not a meaningful comparison
    if margin(gaps, TOL) < 1e-12 {
        return;
    }
    assert_eq!(v.relation, relation(gaps, TOL), "{what}: {gaps:?}");
}

#[test]
fn self_entropy_vanishes() {
    for seed in 0..50 {
        let a = gen_hermitian_with_spectrum(1 + seed as usize % 5, 0.5, 4.0, seed).unwrap();
        for q in [0.25, 0.5, 1.0] {
            let t = tsallis_relative_entropy(&a, &a, q).unwrap();
            assert!(t.max_abs() <= 1e-10, "seed {seed} q {q}: {}", t.max_abs());
        }
        assert!(relative_operator_entropy(&a, &a).unwrap().max_abs() <= 1e-10);
    }
}

#[test]
fn commuting_entropies_match_scalar_formulas() {
    for seed in 0..30 {
        let inst = gen_admissible_commuting(4, 0.5, 3.0, &[0.0, 1.0], seed).unwrap();
        let b_eigs: Vec<f64> = inst.a_eigs.iter().zip(&inst.c_eigs).map(|(a, c)| a * c).collect();
        for q in [-0.5, 0.3, 1.0] {
            let expected: Vec<f64> = inst.a_eigs.iter().zip(&b_eigs).map(|(&a, &b)| tsallis(a, b, q)).collect();
            let expected = conjugate_diagonal(&inst.basis, &expected);
            let got = tsallis_relative_entropy(&inst.a, &inst.b, q).unwrap();
            assert!(got.max_abs_diff(&expected) <= 1e-8 * (1.0 + expected.max_abs()));
        }
        let expected: Vec<f64> = inst.a_eigs.iter().zip(&b_eigs).map(|(&a, &b)| a * (b / a).ln()).collect();
        let expected = conjugate_diagonal(&inst.basis, &expected);
        assert!(relative_operator_entropy(&inst.a, &inst.b).unwrap().max_abs_diff(&expected) <= 1e-8);
    }
}

#[test]
fn tsallis_parameter_errors() {
    let a = HermitianMatrix::identity(2);
    assert!(tsallis_relative_entropy(&a, &a, 0.0).is_err());
    assert!(tsallis_relative_entropy(&a, &a, 1.5).is_err());
    let singular = HermitianMatrix::from_real_diagonal(&[1.0, 0.0]);
    assert!(tsallis_relative_entropy(&a, &singular, 0.5).is_err());
    assert!(EntropyParams::new(0.5, 1.0, 10.0).validate().is_err());
    assert!(EntropyParams::new(0.5, 1.0, 10.0).relaxed().validate().is_ok());
}

#[test]
fn lemma4_and_lemma5_match_scalar_verdicts() {
    let (m, big_m) = (2.0, 10.0);
    for seed in 0..40 {
        let inst = gen_admissible_commuting(3, m, big_m, &[0.0, 1.0], seed).unwrap();
        let b_eigs: Vec<f64> = inst.a_eigs.iter().zip(&inst.c_eigs).map(|(a, c)| a * c).collect();
        let pairs: Vec<(f64, f64)> = inst.a_eigs.iter().copied().zip(b_eigs.iter().copied()).collect();
        for q in [0.25, 0.5, 1.0] {
            let r = lemma4_bounds(&inst.a, &inst.b, &EntropyParams::new(q, m, big_m)).unwrap();
            let lower: Vec<f64> = pairs.iter().map(|&(a, b)| tsallis(a, b, q) - tsallis_bounds(a, b, q, m, big_m).0).collect();
            let upper: Vec<f64> = pairs.iter().map(|&(a, b)| tsallis_bounds(a, b, q, m, big_m).1 - tsallis(a, b, q)).collect();
            check_verdict(&r.verdict_lower, &lower, "lemma4 lower");
            check_verdict(&r.verdict_upper, &upper, "lemma4 upper");
        }
        let r = lemma5_bounds(&inst.a, &inst.b, m, big_m, false).unwrap();
        let lower: Vec<f64> = pairs.iter().map(|&(a, b)| a * (b / a).ln() - relent_bounds(a, b, m, big_m).0).collect();
        let upper: Vec<f64> = pairs.iter().map(|&(a, b)| relent_bounds(a, b, m, big_m).1 - a * (b / a).ln()).collect();
        check_verdict(&r.verdict_lower, &lower, "lemma5 lower");
        check_verdict(&r.verdict_upper, &upper, "lemma5 upper");
    }
}

#[test]
fn compressed_bounds_match_scalar_verdicts() {
    let (q, m, big_m) = (0.5, 2.0, 10.0);
    let coeffs = [0.2, 0.3, 0.1];
    let params = EntropyParams::new(q, m, big_m);
    for seed in 0..40 {
        let inst = gen_admissible_commuting(2 + seed as usize % 3, m, big_m, &coeffs, seed).unwrap();
        let phi = PhiMap::new(inst.v.clone(), coeffs.to_vec()).unwrap();
        let s = entropy_scalars(&inst.a_eigs, &inst.c_eigs, &coeffs, q, m, big_m);
        let l6 = lemma6_bounds(&inst.a, &inst.b, &params, &phi).unwrap();
        let z_gaps: Vec<f64> = (0..s.z.len()).map(|j| s.center[j] - s.z[j]).collect();
        let y_gaps: Vec<f64> = (0..s.y.len()).map(|j| s.y[j] - s.center[j]).collect();
        check_verdict(&l6.verdict_lower, &z_gaps, "lemma6 lower");
        check_verdict(&l6.verdict_upper, &y_gaps, "lemma6 upper");
        let l7 = lemma7_phi_of_tsallis_bounds(&inst.a, &inst.b, &params, &phi).unwrap();
        check_verdict(&l7.verdict_lower, &s.lemma7_lower_gaps(), "lemma7 lower");
        check_verdict(&l7.verdict_upper, &s.lemma7_upper_gaps(), "lemma7 upper");
        let t2 = theorem2_sandwich(&inst.a, &inst.b, &params, &phi).unwrap();
        check_verdict(&t2.verdict_lower, &s.lower_gaps(), "theorem2 lower");
        check_verdict(&t2.verdict_upper, &s.upper_gaps(), "theorem2 upper");
    }
}

#[test]
fn lemma7_rejects_non_commuting_input() {
    let (a, b) = gen_sandwiched_pair(3, 2.0, 10.0, 4, false).unwrap();
    let phi = PhiMap::new(HermitianMatrix::identity(3).into_matrix(), vec![0.0, 1.0]).unwrap();
    let err = lemma7_phi_of_tsallis_bounds(&a, &b, &EntropyParams::new(0.5, 2.0, 10.0), &phi).unwrap_err();
    assert!(err.to_string().contains("commute"), "{err}");
}

#[test]
fn scalar_grid_reports_findings_or_nothing() {
    for q in [0.25, 0.5, 0.75, 1.0] {
        let r = scalar_tsallis_inequality_check(&EntropyParams::new(q, 2.0, 10.0), 1000).unwrap();
        assert_eq!(r.within_tolerance(), r.findings.is_empty(), "q = {q}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn small_q_approaches_relative_entropy(seed in any::<u64>(), n in 1usize..5) {
        let (a, b) = gen_sandwiched_pair(n, 0.5, 3.0, seed, seed % 2 == 0).unwrap();
        let s = relative_operator_entropy(&a, &b).unwrap();
        let t = tsallis_relative_entropy(&a, &b, 1e-4).unwrap();
        prop_assert!(t.max_abs_diff(&s) <= 10.0 * 1e-4 * (&s + &a).max_abs());
    }
}
