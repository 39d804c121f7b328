use std::time::Instant;

use super::config::ExperimentConfig;
use super::report::ExperimentReport;
use crate::error::Result;
use crate::lrd::{CoefficientSpec, SecondOrder};
use crate::processes::{c_beta_p_with_check, rate_constants};
use crate::stats::ols;

/// Relative window for `rho_k k^{2 beta - 1}` at `k = 1000` around its limit.
pub const COVARIANCE_TOLERANCE: f64 = 0.10;
/// Window for the log-log slope of `sigma_{n,1}^2` around `3 - 2 beta`.
pub const VARIANCE_SLOPE_TOLERANCE: f64 = 0.05;
/// Bound on the relative residual of the `c(beta, p)` quadrature.
pub const CBP_RESIDUAL_BOUND: f64 = 1e-8;

/// Covariance and variance asymptotics of the untruncated-by-lag model:
/// `rho_k k^{2 beta - 1} -> B(2 beta - 1, 1 - beta)` and
/// `log sigma_{n,1}^2 ~ (3 - 2 beta) log n`, both from exact sums.
pub fn run_covcheck(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut report = ExperimentReport::new(
        "covcheck",
        "covariance and partial-sum variance asymptotics",
        cfg.echo(),
    );
    let spec = CoefficientSpec::new(cfg.beta)?
        .with_slowly_varying(cfg.slowly_varying)
        .with_truncation_eps(cfg.truncation_eps);
    let so = SecondOrder::from_spec(spec, cfg.innovation.variance()?)?;
    let limit = so.covariance_limit();
    report.push_agg(None, "value", "truncation_k", so.sequence().k_max() as f64);
    report.push_agg(None, "value", "covariance_limit", limit);
    let ks: Vec<u64> = (6..=12).map(|j| 1u64 << j).collect();
    let ratios: Vec<f64> = ks.iter().map(|&k| so.normalized_rho(k)).collect();
    for (&k, &r) in ks.iter().zip(&ratios) {
        report.push_agg(Some(k as usize), "value", "normalized_rho", r);
    }
    let at_1000 = so.normalized_rho(1000);
    report.push_agg(Some(1000), "value", "normalized_rho", at_1000);
    let rel = (at_1000 - limit).abs() / limit;
    report.check(
        "covariance at k = 1000",
        rel <= COVARIANCE_TOLERANCE,
        format!("rho_k k^(2 beta - 1) = {at_1000:.5} vs limit {limit:.5} (relative {rel:.4})"),
    );
    let gaps: Vec<f64> = ratios.iter().map(|r| (r - limit).abs()).collect();
    report.check(
        "covariance ratio trend",
        gaps.windows(2).all(|w| w[1] < w[0]),
        format!("distance to the limit over k = 2^6..2^12: {gaps:?}"),
    );
    let xs: Vec<f64> = cfg.n_grid.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = cfg
        .n_grid
        .iter()
        .map(|&n| so.sigma2_n1(n as u64).ln())
        .collect();
    for (&n, &y) in cfg.n_grid.iter().zip(&ys) {
        report.push_agg(Some(n), "value", "sigma2_n1", y.exp());
    }
    if cfg.n_grid.len() >= 2 {
        let fit = ols(&xs, &ys);
        let expected = 3.0 - 2.0 * cfg.beta;
        report.push_agg(None, "slope", "sigma2_n1", fit.slope);
        report.check(
            "variance scaling",
            (fit.slope - expected).abs() <= VARIANCE_SLOPE_TOLERANCE,
            format!(
                "slope {:.4} vs 3 - 2 beta = {expected:.4} +/- {VARIANCE_SLOPE_TOLERANCE}",
                fit.slope
            ),
        );
    }
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Rate sequences `a_n, b_n, c_n, d_{n,p}, b_{n,p}, delta_n` on the n-grid.
pub fn run_rates(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut report =
        ExperimentReport::new("rates", "strong approximation rate sequences", cfg.echo());
    for &n in &cfg.n_grid {
        let r = rate_constants((n as f64).max(16.0), cfg.beta, cfg.slowly_varying, cfg.p)?;
        for (name, v) in [
            ("a_n", r.a_n),
            ("b_n", r.b_n),
            ("c_n", r.c_n),
            ("d_np", r.d_np),
            ("b_np", r.b_np),
            ("delta_n", r.delta_n),
        ] {
            report.push_agg(Some(n), "value", name, v);
        }
    }
    Ok(report)
}

/// `c(beta, p)` with the Beta-function cross-check of its integral.
pub fn run_cbp(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let chk = c_beta_p_with_check(cfg.beta, 1)?;
    let mut report = ExperimentReport::new("cbp", "LIL constant c(beta, p)", cfg.echo());
    report.push_agg(None, "value", "c_beta_p", chk.c);
    report.push_agg(None, "value", "integral", chk.integral);
    report.push_agg(None, "value", "beta_function", chk.beta_function);
    report.push_agg(None, "value", "relative_residual", chk.relative_residual);
    report.check(
        "Beta identity",
        chk.relative_residual <= CBP_RESIDUAL_BOUND,
        format!(
            "c({}, 1) = {:.6}; relative residual {:.3e}",
            cfg.beta, chk.c, chk.relative_residual
        ),
    );
    Ok(report)
}
