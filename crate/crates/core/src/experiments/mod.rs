//! Seeded ensembles, accuracy metrics, one-parameter sweeps and scaling fits.

mod config;
mod ensemble;
mod stats;
mod sweep;

pub use config::{
    load_base_field, BasisSpec, DataSource, ExperimentConfig, TermSpec, TruthTerm, WeightConfig,
};
pub use ensemble::{
    coefficient_errors, run_ensemble, run_ensemble_on, support_stats, trial_seeds, EnsembleResult,
    TermError, TermSummary, TrialOutcome, Truth,
};
pub use stats::{expected_discretization_exponent, fit_loglog_slope, t_half_width};
pub use sweep::{sweep, sweep_on, SweepAxis, SweepRow, SweepTable};
