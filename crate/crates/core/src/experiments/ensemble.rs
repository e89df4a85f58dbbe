use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::assemble_library;
use crate::error::{Error, Result};
use crate::field::Field2D;
use crate::regression::{iterative_elimination, normalize_to_term, SparseModel};

use super::config::{load_base_field, ExperimentConfig};
use super::stats::t_half_width;

/// Known model: `(library column, coefficient)` pairs and the column the
/// estimate is normalized to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub coefficients: Vec<(usize, f64)>,
    pub reference: usize,
}

impl Truth {
    pub fn new(coefficients: Vec<(usize, f64)>, reference: usize) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::invalid("true model has no terms"));
        }
        if !coefficients.iter().any(|&(t, _)| t == reference) {
            return Err(Error::invalid(format!(
                "reference term {reference} is not part of the true model"
            )));
        }
        Ok(Truth { coefficients, reference })
    }

    pub fn contains(&self, term: usize) -> bool {
        self.coefficients.iter().any(|&(t, _)| t == term)
    }

    fn value_of(&self, term: usize) -> f64 {
        self.coefficients.iter().find(|&&(t, _)| t == term).map(|&(_, c)| c).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermError {
    pub term: usize,
    /// `|(c_n − c̄_n)/c̄_n|`; 1 when the term is missing.
    pub delta_c: f64,
    pub missing: bool,
}

/// `Δc_n` for every true term after rescaling the model so that the
/// reference coefficient matches its true value. If the reference term itself
/// was eliminated, every term is reported missing.
pub fn coefficient_errors(model: &SparseModel, truth: &Truth) -> Result<Vec<TermError>> {
    if truth.coefficients.is_empty() {
        return Err(Error::invalid("true model has no terms"));
    }
    let scaled = normalize_to_term(model, truth.reference).ok();
    let c_ref = truth.value_of(truth.reference);
    Ok(truth
        .coefficients
        .iter()
        .map(|&(term, c_true)| {
            let estimate = scaled.as_ref().and_then(|s| {
                model
                    .active_terms
                    .iter()
                    .position(|&t| t == term)
                    .map(|i| s[i] * c_ref)
            });
            match estimate {
                Some(c) => TermError {
                    term,
                    delta_c: ((c - c_true) / c_true).abs(),
                    missing: false,
                },
                None => TermError { term, delta_c: 1.0, missing: true },
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub index: usize,
    pub noise_seed: u64,
    pub domain_seed: u64,
    pub model: Option<SparseModel>,
    pub errors: Vec<TermError>,
    pub spurious: bool,
    pub missing: bool,
    /// Set when the pipeline failed for this trial.
    pub failure: Option<String>,
}

impl TrialOutcome {
    pub fn exact_support(&self) -> bool {
        self.model.is_some() && !self.spurious && !self.missing
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSummary {
    pub term: usize,
    pub label: String,
    /// Mean `Δc_n` over trials with the exact support; `None` if there are none.
    pub mean: Option<f64>,
    /// 95% Student-t half-width; needs at least two samples.
    pub ci_half_width: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub trials: Vec<TrialOutcome>,
    /// One entry per true term other than the reference.
    pub summary: Vec<TermSummary>,
    pub p_spurious: f64,
    pub p_missing: f64,
    pub failures: usize,
}

impl EnsembleResult {
    pub fn size(&self) -> usize {
        self.trials.len()
    }

    pub fn term(&self, label: &str) -> Option<&TermSummary> {
        self.summary.iter().find(|s| s.label == label)
    }
}

/// Fractions of trials with at least one spurious term and with at least
/// one missing true term. A failed trial counts as missing.
pub fn support_stats(trials: &[TrialOutcome]) -> (f64, f64) {
    if trials.is_empty() {
        return (0.0, 0.0);
    }
    let m = trials.len() as f64;
    let spurious = trials.iter().filter(|t| t.spurious).count() as f64;
    let missing = trials.iter().filter(|t| t.missing).count() as f64;
    (spurious / m, missing / m)
}

/// Noise and domain-placement seeds of trial `index`: the first two draws of
/// stream `index` of a ChaCha8 generator keyed by the master seed.
pub fn trial_seeds(master_seed: u64, index: usize) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    (rng.random(), rng.random())
}

fn run_trial(
    config: &ExperimentConfig,
    field: &Field2D,
    truth: &Truth,
    index: usize,
) -> TrialOutcome {
    let (noise_seed, domain_seed) = trial_seeds(config.master_seed, index);
    let result = (|| -> Result<SparseModel> {
        let noisy = field.add_gaussian_noise(config.sigma, noise_seed)?;
        let domains = config.domains(field, domain_seed)?;
        let q = assemble_library(&noisy, &config.terms()?, &config.weights.weight_set(), &domains)?;
        iterative_elimination(&q, config.gamma, config.column_scaling)
    })();
    match result {
        Ok(model) => {
            let errors = coefficient_errors(&model, truth).expect("truth is non-empty");
            let spurious = model.active_terms.iter().any(|&t| !truth.contains(t));
            let missing = errors.iter().any(|e| e.missing);
            TrialOutcome {
                index,
                noise_seed,
                domain_seed,
                model: Some(model),
                errors,
                spurious,
                missing,
                failure: None,
            }
        }
        Err(e) => TrialOutcome {
            index,
            noise_seed,
            domain_seed,
            model: None,
            errors: Vec::new(),
            spurious: false,
            missing: true,
            failure: Some(e.to_string()),
        },
    }
}

/// Loads the configured data and runs the ensemble on it.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<EnsembleResult> {
    config.validate()?;
    let base = load_base_field(&config.data)?;
    run_ensemble_on(config, &base)
}

/// Runs `ensemble_size` independent trials on an already loaded base field.
/// Trials run in parallel; results are ordered by trial index.
pub fn run_ensemble_on(config: &ExperimentConfig, base: &Field2D) -> Result<EnsembleResult> {
    config.validate()?;
    let field = config.prepare_field(base)?;
    config.half_cells(&field)?;
    let truth = config.truth()?;
    let labels = config.labels();

    let trials: Vec<TrialOutcome> = (0..config.ensemble_size)
        .into_par_iter()
        .map(|i| run_trial(config, &field, &truth, i))
        .collect();

    let summary = truth
        .coefficients
        .iter()
        .filter(|&&(t, _)| t != truth.reference)
        .map(|&(term, _)| {
            let samples: Vec<f64> = trials
                .iter()
                .filter(|t| t.exact_support())
                .filter_map(|t| t.errors.iter().find(|e| e.term == term).map(|e| e.delta_c))
                .collect();
            let n = samples.len();
            let mean = (n > 0).then(|| samples.iter().sum::<f64>() / n as f64);
            TermSummary {
                term,
                label: labels[term].clone(),
                mean,
                ci_half_width: t_half_width(&samples),
                samples: n,
            }
        })
        .collect();
    let (p_spurious, p_missing) = support_stats(&trials);
    let failures = trials.iter().filter(|t| t.failure.is_some()).count();
    Ok(EnsembleResult {
        trials,
        summary,
        p_spurious,
        p_missing,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(active: Vec<usize>, coefficients: Vec<f64>) -> SparseModel {
        SparseModel {
            active_terms: active,
            coefficients,
            residual: 0.0,
            trace: vec![],
            warnings: vec![],
        }
    }

    fn ks_truth() -> Truth {
        Truth::new(vec![(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)], 0).unwrap()
    }

    #[test]
    fn exact_model_has_zero_error() {
        let m = model(vec![0, 1, 2, 3], vec![0.5; 4]);
        let e = coefficient_errors(&m, &ks_truth()).unwrap();
        assert!(e.iter().all(|e| e.delta_c == 0.0 && !e.missing));
    }

    #[test]
    fn one_percent_off() {
        let m = model(vec![0, 1, 2, 3], vec![1.0, 1.0, 1.0, 1.01]);
        let e = coefficient_errors(&m, &ks_truth()).unwrap();
        assert!((e[3].delta_c - 0.01).abs() < 1e-14);
    }

    #[test]
    fn missing_term_reports_one() {
        let m = model(vec![0, 1, 3], vec![1.0, 1.0, 1.0]);
        let e = coefficient_errors(&m, &ks_truth()).unwrap();
        assert!(e[2].missing && e[2].delta_c == 1.0);
        assert!(!e[1].missing);
    }

    #[test]
    fn missing_reference_marks_all_missing() {
        let m = model(vec![1, 2, 3], vec![1.0, 1.0, 1.0]);
        let e = coefficient_errors(&m, &ks_truth()).unwrap();
        assert!(e.iter().all(|e| e.missing));
    }

    #[test]
    fn non_unit_truth() {
        let truth = Truth::new(vec![(0, 2.0), (1, -3.0)], 0).unwrap();
        let m = model(vec![0, 1], vec![-0.4, 0.6]);
        let e = coefficient_errors(&m, &truth).unwrap();
        assert!(e.iter().all(|e| e.delta_c < 1e-14));
    }

    #[test]
    fn empty_truth_rejected() {
        assert!(Truth::new(vec![], 0).is_err());
        assert!(Truth::new(vec![(1, 1.0)], 0).is_err());
    }

    fn outcome(spurious: bool, missing: bool) -> TrialOutcome {
        TrialOutcome {
            index: 0,
            noise_seed: 0,
            domain_seed: 0,
            model: Some(model(vec![0], vec![1.0])),
            errors: vec![],
            spurious,
            missing,
            failure: None,
        }
    }

    #[test]
    fn support_fractions() {
        let clean: Vec<_> = (0..3).map(|_| outcome(false, false)).collect();
        assert_eq!(support_stats(&clean), (0.0, 0.0));
        let t = [outcome(true, false), outcome(false, true), outcome(false, false), outcome(true, true)];
        assert_eq!(support_stats(&t), (0.5, 0.5));
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a: Vec<_> = (0..50).map(|i| trial_seeds(7, i)).collect();
        let b: Vec<_> = (0..50).map(|i| trial_seeds(7, i)).collect();
        assert_eq!(a, b);
        let mut all: Vec<u64> = a.iter().flat_map(|&(x, y)| [x, y]).collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 100);
        assert_ne!(trial_seeds(8, 0), trial_seeds(7, 0));
    }
}
