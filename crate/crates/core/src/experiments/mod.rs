//! Monte Carlo experiments: reduction-principle slopes, Bahadur-Kiefer weak
//! limits and the factor one half, LIL tracking, confidence bands, trimmed
//! sums and the subordinated-Gaussian contrast.

mod analytic;
mod bahadur;
mod band;
mod config;
mod engine;
mod lil;
mod reduction;
mod report;
mod subord;
mod trim;

pub use analytic::{
    run_cbp, run_covcheck, run_rates, CBP_RESIDUAL_BOUND, COVARIANCE_TOLERANCE,
    VARIANCE_SLOPE_TOLERANCE,
};
pub use bahadur::{
    bk_general_range, limit_scale, require_csr, run_bk_general_experiment,
    run_bk_uniform_experiment, run_weak_experiment, weak_limit_cdf, HALF_FACTOR_TOLERANCE,
    WEAK_LIMIT_KS_BOUND,
};
pub use band::{
    band_constants, check_nu, nu_rule, quantile_confidence_band, run_band, run_coverage_experiment,
    Band, NuRule, COVERAGE_FLOOR,
};
pub use config::{ExperimentConfig, MarginalMode, SubordinationTarget, TrimRule};
pub use engine::{replicate, with_threads, Model};
pub use lil::{run_lil_tracker, sup_abs_fprime, LIL_BRACKET};
pub use reduction::{
    reduction_exponent, reduction_p_exponent, run_reduction_experiment,
    run_reduction_p2_experiment, REDUCTION_P_SLOPE_TOLERANCE, REDUCTION_SLOPE_TOLERANCE,
};
pub use report::{Check, ExperimentReport, Row, SlopeEntry, CSV_HEADER};
pub use subord::{run_subordinated_comparison, subordination_ratio, SIGN_TEST_LEVEL};
pub use trim::{run_trimmed_mean_test, trimmed_sum, TRIM_KS_BOUND};

use crate::error::{Error, Result};

/// Commands that produce an [`ExperimentReport`], accepted by [`run_experiment`].
pub const EXPERIMENTS: [&str; 13] = [
    "covcheck",
    "rates",
    "cbp",
    "reduce",
    "reduce-p2",
    "bk-uniform",
    "bk-general",
    "weak",
    "lil",
    "trim",
    "band",
    "coverage",
    "subord",
];

pub fn run_experiment(name: &str, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match name {
        "covcheck" => run_covcheck(cfg),
        "rates" => run_rates(cfg),
        "cbp" => run_cbp(cfg),
        "reduce" => run_reduction_experiment(cfg),
        "reduce-p2" => run_reduction_p2_experiment(cfg),
        "bk-uniform" => run_bk_uniform_experiment(cfg),
        "bk-general" => run_bk_general_experiment(cfg),
        "weak" => run_weak_experiment(cfg),
        "lil" => run_lil_tracker(cfg),
        "trim" => run_trimmed_mean_test(cfg),
        "band" => run_band(cfg),
        "coverage" => run_coverage_experiment(cfg),
        "subord" => run_subordinated_comparison(cfg),
        other => Err(Error::Config(format!("unknown experiment '{other}'"))),
    }
}
