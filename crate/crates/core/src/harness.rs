//! Seeded randomized suites over the bound operations, with replayable
//! counterexample records.
//!
//! Trial `i` of a suite with base seed `s` draws everything from
//! [`split_seed`]`(s, i)`, so results do not depend on the order or the
//! thread in which trials run.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cdj::{
    classical_cdj_check, corollary_majorization, lemma1_power_bounds, theorem1_sandwich, theorem1_with_sandwiches,
    BoundReport, CdjScales, Sign,
};
use crate::entropy::{
    lemma4_bounds, lemma6_bounds, lemma7_phi_of_tsallis_bounds, scalar_tsallis_inequality_check, theorem2_sandwich,
    EntropyBounds, EntropyParams,
};
use crate::error::{Error, Result};
use crate::funcspec::{CatalogFunction, ScalarFunction};
use crate::loewner::{loewner_compare, LoewnerVerdict, Relation};
use crate::matrix::{HermitianMatrix, MatrixJson};
use crate::phimap::PhiMap;
use crate::random::{
    gen_admissible_commuting, gen_sandwiched_pair, hermitian_with_spectrum, pinned_spectrum,
    random_isometry, random_unitary, rng_from_seed, split_seed, Rng64,
};
use crate::sandwich::{build_sandwich, sandwich_at_degree};
use crate::spectral::apply_function;

pub const SCHEMA: &str = "loewner-lab/1";
pub const MAX_DIMENSION: usize = 64;
pub const SCALAR_GRID_SIZE: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    ClassicalCdj,
    Lemma1,
    Theorem1,
    Example2,
    Lemma4,
    Lemma6,
    Lemma7,
    Theorem2,
    ScalarGrid,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::ClassicalCdj,
        Scenario::Lemma1,
        Scenario::Theorem1,
        Scenario::Example2,
        Scenario::Lemma4,
        Scenario::Lemma6,
        Scenario::Lemma7,
        Scenario::Theorem2,
        Scenario::ScalarGrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ClassicalCdj => "classical-cdj",
            Scenario::Lemma1 => "lemma1",
            Scenario::Theorem1 => "theorem1",
            Scenario::Example2 => "example2",
            Scenario::Lemma4 => "lemma4",
            Scenario::Lemma6 => "lemma6",
            Scenario::Lemma7 => "lemma7",
            Scenario::Theorem2 => "theorem2",
            Scenario::ScalarGrid => "scalar-grid",
        }
    }

    pub fn parse(text: &str) -> Option<Scenario> {
        Scenario::ALL.into_iter().find(|s| s.name() == text)
    }

    fn uses_entropy_params(self) -> bool {
        matches!(
            self,
            Scenario::Lemma4 | Scenario::Lemma6 | Scenario::Lemma7 | Scenario::Theorem2 | Scenario::ScalarGrid
        )
    }
}

fn default_trials() -> usize {
    100
}
fn default_dims() -> [usize; 2] {
    [2, 5]
}
fn default_epsilons() -> Vec<f64> {
    vec![1e-2, 1e-3]
}
fn default_q() -> Vec<f64> {
    vec![0.5]
}
fn default_m() -> f64 {
    2.0
}
fn default_big_m() -> f64 {
    10.0
}
fn default_coeffs() -> Vec<f64> {
    vec![0.2, 0.3, 0.1]
}
fn default_coeff_scale() -> [f64; 2] {
    [0.5, 2.0]
}
fn default_tolerance() -> f64 {
    crate::loewner::DEFAULT_TOLERANCE
}

/// Suite configuration; every field except `seed` and `scenario` has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub scenario: Scenario,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_dims")]
    pub dimension_range: [usize; 2],
    /// Sandwich accuracies, drawn uniformly per trial.
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    /// Entropy weights, drawn uniformly per trial.
    #[serde(default = "default_q")]
    pub q_values: Vec<f64>,
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(rename = "M", default = "default_big_m")]
    pub big_m: f64,
    /// Base coefficients of positive-coefficient maps.
    #[serde(default = "default_coeffs")]
    pub coefficients: Vec<f64>,
    /// Range of the random factor applied to `coefficients`.
    #[serde(default = "default_coeff_scale")]
    pub coefficient_scale: [f64; 2],
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Use commuting pairs where a scenario offers both.
    #[serde(default)]
    pub commuting: bool,
    #[serde(default)]
    pub relax_hypotheses: bool,
}

impl SuiteConfig {
    pub fn new(scenario: Scenario, seed: u64, trials: usize) -> Self {
        Self {
            seed,
            scenario,
            trials,
            dimension_range: default_dims(),
            epsilons: default_epsilons(),
            q_values: default_q(),
            m: default_m(),
            big_m: default_big_m(),
            coefficients: default_coeffs(),
            coefficient_scale: default_coeff_scale(),
            tolerance: default_tolerance(),
            commuting: false,
            relax_hypotheses: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        let [lo, hi] = self.dimension_range;
        if lo == 0 || lo > hi || hi > MAX_DIMENSION {
            return bad(format!("dimensionRange must satisfy 1 <= nMin <= nMax <= {MAX_DIMENSION}, got [{lo}, {hi}]"));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return bad("epsilons must be a non-empty list of positive numbers".into());
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return bad(format!("tolerance must be finite and >= 0, got {}", self.tolerance));
        }
        let [s0, s1] = self.coefficient_scale;
        if !(s0 > 0.0 && s0 <= s1 && s1.is_finite()) {
            return bad(format!("coefficientScale must satisfy 0 < lo <= hi, got [{s0}, {s1}]"));
        }
        if self.coefficients.is_empty() || self.coefficients.len() > 3 || self.coefficients.iter().any(|c| !(*c >= 0.0)) {
            return bad("coefficients must be 1 to 3 non-negative numbers".into());
        }
        if self.coefficients.iter().all(|c| *c == 0.0) {
            return bad("coefficients must not all be zero".into());
        }
        if self.scenario.uses_entropy_params() {
            if self.q_values.is_empty() {
                return bad("qValues must not be empty".into());
            }
            for &q in &self.q_values {
                let mut p = EntropyParams::new(q, self.m, self.big_m);
                p.relaxed = self.relax_hypotheses;
                p.validate().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }
}

/// One verdict of a trial. `relation` is absent for majorization links and
/// scalar checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerdictSummary {
    pub name: String,
    pub relation: Option<Relation>,
    pub holds: bool,
    pub min_gap: f64,
    pub gap_spectrum: Vec<f64>,
}

impl VerdictSummary {
    fn loewner(name: &str, v: &LoewnerVerdict, tol: f64) -> Self {
        let v = LoewnerVerdict::from_gap_spectrum(v.gap_spectrum.clone(), tol);
        Self {
            name: name.into(),
            relation: Some(v.relation),
            holds: v.holds_leq(),
            min_gap: v.min_gap(),
            gap_spectrum: v.gap_spectrum,
        }
    }

    fn flag(name: &str, holds: bool, value: f64) -> Self {
        Self {
            name: name.into(),
            relation: None,
            holds,
            min_gap: value,
            gap_spectrum: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialStatus {
    Pass,
    Violation,
    Error,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialSummary {
    pub index: usize,
    pub seed: u64,
    pub n: usize,
    pub status: TrialStatus,
    pub verdicts: Vec<VerdictSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// Everything needed to re-run one failing trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CounterexampleRecord {
    pub schema: String,
    pub config: SuiteConfig,
    pub index: usize,
    pub trial_seed: u64,
    pub n: usize,
    pub verdicts: Vec<VerdictSummary>,
    pub inputs: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteReport {
    pub schema: String,
    pub config: SuiteConfig,
    pub trials: Vec<TrialSummary>,
    pub violation_count: usize,
    pub error_count: usize,
    pub numerical_failure_count: usize,
    pub counterexamples: Vec<CounterexampleRecord>,
    /// Excluded from determinism comparisons.
    pub wall_time_seconds: f64,
}

impl SuiteReport {
    /// JSON with the wall time zeroed: identical configs give identical bytes.
    pub fn deterministic_json(&self) -> String {
        let mut copy = self.clone();
        copy.wall_time_seconds = 0.0;
        serde_json::to_string(&copy).expect("report serializes")
    }

    /// `trial,verdict,k,gap` rows, one per gap eigenvalue.
    pub fn gap_spectra_csv(&self) -> String {
        let mut out = String::from("trial,verdict,k,gap\n");
        for t in &self.trials {
            for v in &t.verdicts {
                for (k, g) in v.gap_spectrum.iter().enumerate() {
                    out.push_str(&format!("{},{},{},{:e}\n", t.index, v.name, k, g));
                }
            }
        }
        out
    }
}

/// Outcome of one trial before classification.
struct TrialData {
    n: usize,
    verdicts: Vec<VerdictSummary>,
    inputs: Value,
}

fn matrix_value(m: &HermitianMatrix) -> Value {
    serde_json::to_value(m).expect("matrix serializes")
}

fn draw<T: Copy>(rng: &mut Rng64, items: &[T]) -> T {
    *items.choose(rng).expect("non-empty choice list")
}

fn draw_dimension(config: &SuiteConfig, rng: &mut Rng64) -> usize {
    let [lo, hi] = config.dimension_range;
    rng.gen_range(lo..=hi)
}

fn scaled_coefficients(config: &SuiteConfig, rng: &mut Rng64) -> Vec<f64> {
    let [lo, hi] = config.coefficient_scale;
    let s = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
    config.coefficients.iter().map(|c| c * s).collect()
}

fn entropy_params(config: &SuiteConfig, rng: &mut Rng64) -> EntropyParams {
    let mut p = EntropyParams::new(draw(rng, &config.q_values), config.m, config.big_m);
    p.relaxed = config.relax_hypotheses;
    p
}

fn entropy_verdicts(b: &EntropyBounds, tol: f64) -> Vec<VerdictSummary> {
    vec![
        VerdictSummary::loewner("lower", &b.verdict_lower, tol),
        VerdictSummary::loewner("upper", &b.verdict_upper, tol),
    ]
}

fn bound_verdicts(r: &BoundReport, tol: f64) -> Vec<VerdictSummary> {
    let mut v = vec![
        VerdictSummary::loewner("lower", &r.verdict_lower, tol),
        VerdictSummary::loewner("upper", &r.verdict_upper, tol),
    ];
    if let Some(chain) = &r.majorization {
        v.push(VerdictSummary::flag("majorization-lower", chain.lower_link, 0.0));
        v.push(VerdictSummary::flag("majorization-upper", chain.upper_link, 0.0));
    }
    v
}

/// Quadratic-sandwich configuration: square unitary `V`, `Phi` with `a_0, a_2 > 0 > a_1`,
/// `f = exp`, one quadratic pair on `[0.5, 1.5]` serving both sides.
pub fn example2_instance(seed: u64, n: usize) -> Result<(PhiMap, HermitianMatrix)> {
    let mut rng = rng_from_seed(seed);
    let a = hermitian_with_spectrum(n, 0.5, 1.5, &mut rng)?;
    let coeffs = vec![
        rng.gen_range(0.9..=1.1),
        rng.gen_range(-0.6..=-0.4),
        rng.gen_range(0.35..=0.42),
    ];
    let v = random_unitary(n, &mut rng);
    Ok((PhiMap::new(v, coeffs)?, a))
}

pub const EXAMPLE2_INTERVAL: [f64; 2] = [0.5, 1.5];

/// The report for one `example2` instance, majorization chain included.
pub fn example2_report(phi: &PhiMap, a: &HermitianMatrix) -> Result<BoundReport> {
    let f = ScalarFunction::catalog(CatalogFunction::Exp);
    let pair = sandwich_at_degree(&f, EXAMPLE2_INTERVAL[0], EXAMPLE2_INTERVAL[1], 2)?;
    let report = theorem1_with_sandwiches(phi, &f, a, &pair, &pair, CdjScales::unit())?;
    corollary_majorization(report)
}

fn run_scenario(config: &SuiteConfig, trial_seed: u64) -> Result<TrialData> {
    let mut rng = rng_from_seed(trial_seed);
    let n = draw_dimension(config, &mut rng);
    let sub_seed: u64 = rng.gen();
    let tol = config.tolerance;
    match config.scenario {
        Scenario::ClassicalCdj => {
            let inverse = rng.gen_bool(0.5);
            let k = rng.gen_range(1..=n);
            let v = random_isometry(n, k, &mut rng);
            let (f, a) = if inverse {
                (CatalogFunction::Power(-1.0), hermitian_with_spectrum(n, 0.5, 3.0, &mut rng)?)
            } else {
                (CatalogFunction::Power(2.0), hermitian_with_spectrum(n, -2.0, 2.0, &mut rng)?)
            };
            let f = ScalarFunction::catalog(f);
            let verdict = classical_cdj_check(&v, &f, &a)?;
            Ok(TrialData {
                n,
                verdicts: vec![VerdictSummary::loewner("f(V*AV) <= V*f(A)V", &verdict, tol)],
                inputs: json!({"f": f.describe(), "A": matrix_value(&a), "V": MatrixJson::from_matrix(&v)}),
            })
        }
        Scenario::Lemma1 => {
            let choices = [
                (CatalogFunction::Exp, 0.0, 1.0),
                (CatalogFunction::Power(2.0), 1.0, 2.0),
                (CatalogFunction::Sqrt, 1.0, 2.0),
            ];
            let (cf, lo, hi) = draw(&mut rng, &choices);
            let f = ScalarFunction::catalog(cf);
            let eps = draw(&mut rng, &config.epsilons);
            let i = rng.gen_range(2..=3);
            let lambda = pinned_spectrum(n, lo, hi, &mut rng);
            let a = HermitianMatrix::from_real_diagonal(&lambda);
            let pair = build_sandwich(&f, lo, hi, eps)?;
            let b = lemma1_power_bounds(&pair, &a, i, Sign::Plus)?;
            let fi = apply_function(&f, &a)?.powi(i as u32);
            Ok(TrialData {
                n,
                verdicts: vec![
                    VerdictSummary::loewner("lower", &loewner_compare(&b.lower, &fi, tol)?, tol),
                    VerdictSummary::loewner("upper", &loewner_compare(&fi, &b.upper, tol)?, tol),
                ],
                inputs: json!({"f": f.describe(), "epsilon": eps, "i": i, "A": matrix_value(&a)}),
            })
        }
        Scenario::Theorem1 => {
            let k = rng.gen_range(1..=n);
            let v = random_isometry(n, k, &mut rng);
            let coeffs = vec![rng.gen_range(0.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(0.0..=1.0)];
            let eps = draw(&mut rng, &config.epsilons);
            let a = hermitian_with_spectrum(n, 0.0, 1.0, &mut rng)?;
            let phi = PhiMap::new(v, coeffs)?;
            let f = ScalarFunction::catalog(CatalogFunction::Exp);
            let report = corollary_majorization(theorem1_sandwich(&phi, &f, &a, eps, CdjScales::unit())?)?;
            Ok(TrialData {
                n,
                verdicts: bound_verdicts(&report, tol),
                inputs: json!({"f": f.describe(), "epsilon": eps, "A": matrix_value(&a), "phi": phi}),
            })
        }
        Scenario::Example2 => {
            let (phi, a) = example2_instance(sub_seed, n)?;
            let report = example2_report(&phi, &a)?;
            Ok(TrialData {
                n,
                verdicts: bound_verdicts(&report, tol),
                inputs: json!({"A": matrix_value(&a), "phi": phi, "instanceSeed": sub_seed}),
            })
        }
        Scenario::Lemma4 => {
            let p = entropy_params(config, &mut rng);
            let (a, b) = gen_sandwiched_pair(n, p.m, p.big_m, sub_seed, config.commuting)?;
            let r = lemma4_bounds(&a, &b, &p)?;
            Ok(TrialData {
                n,
                verdicts: entropy_verdicts(&r, tol),
                inputs: json!({"params": p, "A": matrix_value(&a), "B": matrix_value(&b)}),
            })
        }
        Scenario::Lemma6 => {
            let p = entropy_params(config, &mut rng);
            let k = rng.gen_range(1..=n);
            let v = random_isometry(n, k, &mut rng);
            let (a, b) = gen_sandwiched_pair(n, p.m, p.big_m, sub_seed, config.commuting)?;
            let phi = PhiMap::compression(v)?;
            let r = lemma6_bounds(&a, &b, &p, &phi)?;
            Ok(TrialData {
                n,
                verdicts: entropy_verdicts(&r, tol),
                inputs: json!({"params": p, "A": matrix_value(&a), "B": matrix_value(&b), "phi": phi}),
            })
        }
        Scenario::Lemma7 | Scenario::Theorem2 => {
            let p = entropy_params(config, &mut rng);
            let coeffs = scaled_coefficients(config, &mut rng);
            let inst = gen_admissible_commuting(n, p.m, p.big_m, &coeffs, sub_seed)?;
            let phi = PhiMap::new(inst.v.clone(), coeffs)?;
            let inputs = json!({
                "params": p,
                "A": matrix_value(&inst.a),
                "B": matrix_value(&inst.b),
                "phi": phi,
                "aEigenvalues": inst.a_eigs,
                "cEigenvalues": inst.c_eigs,
            });
            let verdicts = if config.scenario == Scenario::Lemma7 {
                entropy_verdicts(&lemma7_phi_of_tsallis_bounds(&inst.a, &inst.b, &p, &phi)?, tol)
            } else {
                let r = theorem2_sandwich(&inst.a, &inst.b, &p, &phi)?;
                vec![
                    VerdictSummary::loewner("lower", &r.verdict_lower, tol),
                    VerdictSummary::loewner("upper", &r.verdict_upper, tol),
                ]
            };
            Ok(TrialData { n, verdicts, inputs })
        }
        Scenario::ScalarGrid => {
            let p = entropy_params(config, &mut rng);
            let r = scalar_tsallis_inequality_check(&p, SCALAR_GRID_SIZE)?;
            Ok(TrialData {
                n,
                verdicts: vec![
                    VerdictSummary::flag("scalar-lower", r.max_lower_violation <= r.tolerance, -r.max_lower_violation),
                    VerdictSummary::flag("scalar-upper", r.max_upper_violation <= r.tolerance, -r.max_upper_violation),
                ],
                inputs: serde_json::to_value(&r).expect("grid report serializes"),
            })
        }
    }
}

fn run_indexed(config: &SuiteConfig, index: usize) -> (TrialSummary, Option<CounterexampleRecord>) {
    let seed = split_seed(config.seed, index as u64);
    match run_scenario(config, seed) {
        Ok(data) => {
            let violated = data.verdicts.iter().any(|v| !v.holds);
            let record = violated.then(|| CounterexampleRecord {
                schema: SCHEMA.into(),
                config: config.clone(),
                index,
                trial_seed: seed,
                n: data.n,
                verdicts: data.verdicts.clone(),
                inputs: data.inputs,
            });
            let summary = TrialSummary {
                index,
                seed,
                n: data.n,
                status: if violated { TrialStatus::Violation } else { TrialStatus::Pass },
                verdicts: data.verdicts,
                message: None,
            };
            (summary, record)
        }
        Err(e) => {
            let status = if e.is_numerical_failure() {
                TrialStatus::NumericalFailure
            } else {
                TrialStatus::Error
            };
            let n = draw_dimension(config, &mut rng_from_seed(seed));
            let summary = TrialSummary {
                index,
                seed,
                n,
                status,
                verdicts: Vec::new(),
                message: Some(e.to_string()),
            };
            (summary, None)
        }
    }
}

/// Runs a suite on the current thread.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    run_suite_with_jobs(config, 1)
}

/// Runs a suite on `jobs` worker threads (`jobs <= 1` runs serially). The
/// report does not depend on `jobs`.
pub fn run_suite_with_jobs(config: &SuiteConfig, jobs: usize) -> Result<SuiteReport> {
    config.validate()?;
    let start = Instant::now();
    let mut results: Vec<(TrialSummary, Option<CounterexampleRecord>)> = if jobs <= 1 {
        (0..config.trials).map(|i| run_indexed(config, i)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;
        pool.install(|| (0..config.trials).into_par_iter().map(|i| run_indexed(config, i)).collect())
    };
    results.sort_by_key(|(t, _)| t.index);
    let mut trials = Vec::with_capacity(results.len());
    let mut counterexamples = Vec::new();
    for (t, c) in results {
        trials.push(t);
        counterexamples.extend(c);
    }
    let count = |s: TrialStatus| trials.iter().filter(|t| t.status == s).count();
    Ok(SuiteReport {
        schema: SCHEMA.into(),
        config: config.clone(),
        violation_count: counterexamples.len(),
        error_count: count(TrialStatus::Error),
        numerical_failure_count: count(TrialStatus::NumericalFailure),
        trials,
        counterexamples,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReplayOutcome {
    pub reproduced: bool,
    pub trial: TrialSummary,
}

/// Re-executes the trial behind a counterexample record.
pub fn replay(record: &CounterexampleRecord) -> Result<ReplayOutcome> {
    record.config.validate()?;
    if split_seed(record.config.seed, record.index as u64) != record.trial_seed {
        return Err(Error::Config("record's trial seed does not match its config and index".into()));
    }
    let (trial, _) = run_indexed(&record.config, record.index);
    Ok(ReplayOutcome {
        reproduced: trial.verdicts == record.verdicts,
        trial,
    })
}
