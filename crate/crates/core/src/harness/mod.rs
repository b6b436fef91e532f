//! Decay experiments: power-law fits, energy functionals and verdicts.

mod fit;
mod functionals;
mod suite;

pub use fit::{fit_power_law, theory_exponent, DecayReport, PowerLawFit, MIN_FIT_SAMPLES};
pub use functionals::{
    admissible_negative_index, compute_functionals, default_k_grid, monotonicity_scan,
    negative_norm_preservation, EnergyFunctionals, FunctionalIndices, MonotonicityReport,
    NegativeNormReport, NormRecorder, NormSample, NormTrajectory,
};
pub use suite::{
    run_decay_suite, BaselineComparison, ConservationSummary, DecaySuiteConfig, DecaySuiteOutcome,
};
