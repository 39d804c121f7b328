use std::time::Instant;

use super::config::ExperimentConfig;
use super::engine::{record, replicate, with_threads, Model};
use super::report::ExperimentReport;
use crate::error::{Error, Result};
use crate::numerics::{fsum, norm_cdf};
use crate::stats::{ks_distance, median, sort_floats};

/// Acceptance bound on the KS distance of the trimmed statistic to `N(0,1)`.
pub const TRIM_KS_BOUND: f64 = 0.10;

/// `sum_{i = max(ceil(n l), 1)}^{floor(n (1 - l))} X_{i:n}` for sorted `x`.
pub fn trimmed_sum(sorted: &[f64], l: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&l) {
        return Err(Error::OverTrim(l));
    }
    let n = sorted.len() as f64;
    let lo = ((n * l).ceil() as usize).max(1);
    let hi = (n * (1.0 - l)).floor() as usize;
    if hi < lo {
        return Ok(0.0);
    }
    Ok(fsum(sorted[lo - 1..hi].iter().copied()))
}

/// Trimmed sums normalised by `sigma_{n,1}`, compared with `N(0,1)`.
pub fn run_trimmed_mean_test(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    with_threads(cfg.threads, || trimmed(cfg))?
}

fn trimmed(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut report =
        ExperimentReport::new("trim", "central limit theorem for trimmed sums", cfg.echo());
    let last = *cfg.n_grid.last().expect("validated grid");
    let mut diff_medians = Vec::new();
    for (block, &n) in cfg.n_grid.iter().enumerate() {
        let l = cfg.trim.level(n);
        if !(0.0..0.5).contains(&l) {
            return Err(Error::OverTrim(l));
        }
        let model = Model::for_experiment(cfg, n, &[])?;
        if !model
            .marginal
            .tail_exponents()
            .gamma1
            .eq(&model.marginal.tail_exponents().gamma2)
        {
            return Err(Error::Config(
                "trimmed sums need a symmetric marginal".into(),
            ));
        }
        let results = replicate(cfg.replications, |rep| {
            let path = model.path(cfg.seed, block as u32, rep);
            let mut sorted = path.x.clone();
            sort_floats(&mut sorted);
            let t = trimmed_sum(&sorted, l)? / model.sigma;
            let full = fsum(path.x.iter().copied()) / model.sigma;
            Ok((t, (t - full).abs()))
        })?;
        let t: Vec<f64> = results.iter().map(|r| r.0).collect();
        let d: Vec<f64> = results.iter().map(|r| r.1).collect();
        record(&mut report, cfg, n, "trimmed", &t, 2 * block as u32);
        record(&mut report, cfg, n, "abs_diff", &d, 2 * block as u32 + 1);
        let ks = ks_distance(&t, norm_cdf);
        report.push_agg(Some(n), "value", "ks_distance", ks);
        report.push_agg(Some(n), "value", "trim_level", l);
        diff_medians.push(median(&d));
        if n == last {
            report.check(
                "trimmed CLT",
                ks <= TRIM_KS_BOUND,
                format!("KS {ks:.4} vs N(0,1) at n = {n} (bound {TRIM_KS_BOUND})"),
            );
        }
    }
    if diff_medians.len() >= 2 && diff_medians.iter().any(|&d| d > 0.0) {
        let decreasing = diff_medians.windows(2).all(|w| w[1] < w[0]);
        report.check(
            "negligible trimming",
            decreasing,
            format!("median |trimmed - untrimmed| per n: {:?}", diff_medians),
        );
    }
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}
