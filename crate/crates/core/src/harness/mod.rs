//! Convergence experiments, distribution distances, the sup-norm and Fréchet
//! machinery on `Re s > 1/2`, and CSV/JSON reporting.

pub mod analytic;
pub mod config;
pub mod distance;
pub mod experiments;
pub mod report;

pub use analytic::{
    cauchy_sup, frechet_distance, sup_norm_on_rect, CompactRect, ExhaustionSpec, FrechetDistance, SupNorm,
};
pub use config::{ExperimentConfig, ExperimentKind, Tolerances};
pub use distance::{ecf_distance, energy_distance, frequency_grid};
pub use experiments::{
    run, run_analytic_convergence, run_covariance_check, run_fixed_m_law, run_m1m2_equivalence,
    run_qm_convergence, run_with_threads,
};
pub use report::{emit, render, Check, ExperimentResult, Format, ResultRow};
