use std::time::Instant;

use super::config::ExperimentConfig;
use super::engine::{fit_slope, record, replicate, sup_on_grid, with_threads, Model};
use super::report::ExperimentReport;
use crate::error::{Error, Result};
use crate::lrd::SigmaMode;
use crate::processes::{WeightContext, WeightVariant};

/// Acceptance half-width for the first-order reduction slope.
pub const REDUCTION_SLOPE_TOLERANCE: f64 = 0.08;
/// Acceptance half-width for the higher-order reduction slope.
pub const REDUCTION_P_SLOPE_TOLERANCE: f64 = 0.1;

/// Exponent of the first-order rate: `-(beta - 1/2)` below `3/4`, `-(1 - beta)` above.
pub fn reduction_exponent(beta: f64) -> f64 {
    if beta < 0.75 {
        -(beta - 0.5)
    } else {
        -(1.0 - beta)
    }
}

/// Exponent of the order-`p` rate `n^{-(2 beta - p (beta - 1/2))}`.
pub fn reduction_p_exponent(beta: f64, p: u32) -> f64 {
    -(2.0 * beta - p as f64 * (beta - 0.5))
}

fn weight_context(cfg: &ExperimentConfig, model: &Model) -> WeightContext {
    WeightContext::new(
        cfg.beta,
        model.marginal.tail_exponents().gamma(),
        cfg.mu,
        model.marginal.flags(),
    )
}

/// Weighted sup-distance between the uniform quantile process and its
/// first-order reduction `-sigma^{-1} f(Q(y)) Y_{n,1}`, across the n-grid.
pub fn run_reduction_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    with_threads(cfg.threads, || reduction(cfg))?
}

fn reduction(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut report = ExperimentReport::new(
        "reduce",
        "reduction principle for the uniform quantile process",
        cfg.echo(),
    );
    let mut samples = Vec::with_capacity(cfg.n_grid.len());
    for (block, &n) in cfg.n_grid.iter().enumerate() {
        let model = Model::for_experiment(cfg, n, &[])?;
        let psi1 = weight_context(cfg, &model).function(1)?;
        let pts = model.grid.points();
        let values = replicate(cfg.replications, |rep| {
            let path = model.path(cfg.seed, block as u32, rep);
            let ctx = model.context(&path)?;
            let shift = ctx.y1 / model.sigma;
            Ok(sup_on_grid(pts, 0.0, 1.0, |i, y| {
                psi1(y) * (ctx.u(y) + model.on_grid.fq[i] * shift).abs()
            }))
        })?;
        report.push_agg(Some(n), "value", "truncation_k", model.k() as f64);
        record(&mut report, cfg, n, "sup_dev", &values, block as u32);
        samples.push(values);
    }
    if cfg.n_grid.len() >= 3 {
        let fit = fit_slope(cfg, &samples, 1 << 16);
        let expected = reduction_exponent(cfg.beta);
        report.push_slope("sup_dev", fit.clone(), expected, REDUCTION_SLOPE_TOLERANCE);
        let within = (fit.slope - expected).abs() <= REDUCTION_SLOPE_TOLERANCE;
        report.check(
            "reduction slope",
            within,
            format!(
                "slope {:.4} (se {:.4}) vs {expected:.4} +/- {REDUCTION_SLOPE_TOLERANCE}",
                fit.slope, fit.bootstrap_se
            ),
        );
    }
    report.note("sup over the tail-refined grid plus all jump points k/n of U_n");
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Order-`p` reduction: `sup_y sigma_{n,p}^{-1} psi_1(y) |y - U_n(y) - n^{-1} V~_{n,p}(y)|`,
/// where `n(y - U_n(y))` is approximated by `V~_{n,p}(y)`. The first-order
/// statistic is recorded alongside.
pub fn run_reduction_p2_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    if cfg.beta >= 0.75 {
        return Err(Error::Config(format!(
            "higher-order reduction requires beta < 3/4, got {}",
            cfg.beta
        )));
    }
    if cfg.p > 2 {
        return Err(Error::Unsupported(format!(
            "expansion order p={}; only p in {{1,2}} is implemented",
            cfg.p
        )));
    }
    with_threads(cfg.threads, || reduction_p(cfg))?
}

/// Per-replication results of the order-`p` reduction.
#[derive(Debug, Clone, Copy)]
struct ReductionP {
    stat_p: f64,
    stat_1: f64,
    /// Largest `|(r_1 - r_p) - n^{-1} f'(Q) Y_{n,2}|` over the grid, where
    /// `r_p` are the unnormalised residuals.
    algebra_gap: f64,
}

fn reduction_p(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let p = cfg.p;
    let name = "reduce-p2";
    let mut report = ExperimentReport::new(
        name,
        "higher-order reduction principle for uniform quantiles",
        cfg.echo(),
    );
    let mut samples = Vec::with_capacity(cfg.n_grid.len());
    for (block, &n) in cfg.n_grid.iter().enumerate() {
        let model = Model::for_experiment(cfg, n, &[])?;
        let sigma_p = crate::lrd::sigma_np(
            &model.spec,
            n as u64,
            p,
            SigmaMode::Asymptotic,
            cfg.innovation.variance()?,
        )?;
        let wctx = weight_context(cfg, &model).with_variant(WeightVariant::ReductionOrder(p));
        let psi1 = wctx.function(1)?;
        let pts = model.grid.points();
        let nf = n as f64;
        let results = replicate(cfg.replications, |rep| {
            let path = model.path(cfg.seed, block as u32, rep);
            let y2 = if p == 2 {
                model.generator.y2(&path)
            } else {
                0.0
            };
            let ctx = model.context(&path)?.with_y2(y2);
            let (mut stat_p, mut stat_1, mut gap) = (0.0f64, 0.0f64, 0.0f64);
            for (i, &y) in pts.iter().enumerate() {
                let (fq, fpq) = (model.on_grid.fq[i], model.on_grid.fpq[i]);
                let base = y - ctx.uniform_quantile(y);
                let r1 = base - ctx.v_tilde_with(1, fq, fpq)? / nf;
                let rp = base - ctx.v_tilde_with(p, fq, fpq)? / nf;
                let w = psi1(y);
                stat_p = stat_p.max(w * rp.abs() / sigma_p);
                stat_1 = stat_1.max(w * r1.abs() / model.sigma);
                let expected_gap = if p == 2 { fpq * y2 / nf } else { 0.0 };
                gap = gap.max(((r1 - rp) - expected_gap).abs());
            }
            Ok(ReductionP {
                stat_p,
                stat_1,
                algebra_gap: gap,
            })
        })?;
        let stat_p: Vec<f64> = results.iter().map(|r| r.stat_p).collect();
        let stat_1: Vec<f64> = results.iter().map(|r| r.stat_1).collect();
        record(&mut report, cfg, n, "sup_dev_p", &stat_p, 2 * block as u32);
        record(
            &mut report,
            cfg,
            n,
            "sup_dev_1",
            &stat_1,
            2 * block as u32 + 1,
        );
        let gap = results.iter().map(|r| r.algebra_gap).fold(0.0, f64::max);
        report.push_agg(Some(n), "max", "order_difference_gap", gap);
        report.push_agg(Some(n), "value", "sigma_np", sigma_p);
        samples.push(stat_p);
    }
    if cfg.n_grid.len() >= 3 {
        let fit = fit_slope(cfg, &samples, 1 << 17);
        let expected = reduction_p_exponent(cfg.beta, p);
        report.push_slope(
            "sup_dev_p",
            fit.clone(),
            expected,
            REDUCTION_P_SLOPE_TOLERANCE,
        );
        let within = (fit.slope - expected).abs() <= REDUCTION_P_SLOPE_TOLERANCE;
        report.check(
            "order-p reduction slope",
            within,
            format!(
                "slope {:.4} (se {:.4}) vs {expected:.4} +/- {REDUCTION_P_SLOPE_TOLERANCE}",
                fit.slope, fit.bootstrap_se
            ),
        );
    }
    report.note(format!(
        "sigma_(n,{p}) is the asymptotic scale n^(1 - p(beta - 1/2)) L0^p(n)"
    ));
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}
