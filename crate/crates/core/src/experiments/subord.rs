use std::sync::Arc;
use std::time::Instant;

use super::config::{ExperimentConfig, SubordinationTarget};
use super::engine::{record, replicate, sup_on_grid, with_threads, Model};
use super::report::ExperimentReport;
use crate::error::{Error, Result};
use crate::marginals::{Exponential, Gaussian, Logistic, Marginal};
use crate::numerics::{norm_cdf, norm_pdf, norm_quantile, norm_sf};
use crate::processes::{sample_rank, YGrid};
use crate::rng::stream_index;
use crate::stats::{median, sign_test_p, sort_floats};

/// Significance level of the sign test for the identity subordination.
pub const SIGN_TEST_LEVEL: f64 = 0.05;
/// Stream block offset for the independent linear-model paths.
const LINEAR_BLOCK_OFFSET: u32 = 1 << 20;

fn target_marginal(target: SubordinationTarget, variance: f64) -> Result<Arc<dyn Marginal>> {
    Ok(match target {
        SubordinationTarget::Exponential => Arc::new(Exponential),
        SubordinationTarget::Identity => Arc::new(Gaussian::new(variance)?),
        SubordinationTarget::Logistic => Arc::new(Logistic::new(1.0)?),
    })
}

/// `G(x) = Q_F(Phi(x / sd))`, evaluated through the upper tail where `Phi`
/// rounds to one.
fn subordinate(kind: SubordinationTarget, x: f64, sd: f64) -> f64 {
    let z = x / sd;
    match kind {
        SubordinationTarget::Exponential => -norm_sf(z).ln(),
        SubordinationTarget::Identity if z > 0.0 => -sd * norm_quantile(norm_sf(z)),
        SubordinationTarget::Identity => sd * norm_quantile(norm_cdf(z)),
        SubordinationTarget::Logistic => (norm_cdf(z) / norm_sf(z)).ln(),
    }
}

/// `phi(Phi^{-1}(y)) / f(Q(y))` for a target with `Var X = 1`.
pub fn subordination_ratio(target: &dyn Marginal, y: f64) -> f64 {
    norm_pdf(norm_quantile(y)) / target.density_quantile(y)
}

/// `sup |q_n(y)|` over `(k', 1 - k')` for each trim `k'`.
fn profile(
    sorted: &[f64],
    quantile: &[f64],
    points: &[f64],
    sigma: f64,
    trims: &[f64],
) -> Result<Vec<f64>> {
    let n = sorted.len();
    let nf = n as f64;
    let mut q = vec![0.0; points.len()];
    for (i, &y) in points.iter().enumerate() {
        q[i] = nf * (quantile[i] - sorted[sample_rank(n, y)? - 1]) / sigma;
    }
    Ok(trims
        .iter()
        .map(|&k| sup_on_grid(points, k, 1.0 - k, |i, _| q[i].abs()))
        .collect())
}

/// Quantile-process profiles of a subordinated Gaussian model
/// `Y = Q_F(Phi(X))` and of the linear Gaussian model, over shrinking
/// symmetric trims.
pub fn run_subordinated_comparison(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    if !cfg.innovation.is_gaussian() {
        return Err(Error::Config(
            "subordination needs a Gaussian base path".into(),
        ));
    }
    with_threads(cfg.threads, || subordination(cfg))?
}

fn subordination(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut report = ExperimentReport::new(
        "subord",
        &format!(
            "subordinated ({}) versus linear Gaussian quantile processes",
            cfg.target.name()
        ),
        cfg.echo(),
    );
    let last = *cfg.n_grid.last().expect("validated grid");
    for (block, &n) in cfg.n_grid.iter().enumerate() {
        let model = Model::for_experiment(cfg, n, &[])?;
        let variance = model.second.marginal_variance();
        let sd = variance.sqrt();
        let target = target_marginal(cfg.target, variance)?;
        if !target.flags().csr_all() {
            return Err(Error::ConditionUnmet(
                "CsR1-CsR4 for the subordination target",
            ));
        }
        let points = model.grid.points();
        let target_q: Vec<f64> = points.iter().map(|&y| target.quantile(y)).collect();
        if target_q.iter().any(|q| !q.is_finite()) || target_q.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InconsistentMarginal(format!(
                "{} quantile is not invertible on the grid",
                target.name()
            )));
        }
        let log2n = (n as f64).log2().floor() as i32;
        let trims: Vec<f64> = (2..log2n).map(|j| 2f64.powi(-j)).collect();
        if trims.is_empty() {
            return Err(Error::Config(format!(
                "n = {n} is too small for a trim profile"
            )));
        }
        let results = replicate(cfg.replications, |rep| {
            let base = model.path(cfg.seed, block as u32, rep);
            let mut y: Vec<f64> = base
                .x
                .iter()
                .map(|&x| subordinate(cfg.target, x, sd))
                .collect();
            sort_floats(&mut y);
            let sub = profile(&y, &target_q, points, model.sigma, &trims)?;
            let other = model.generator.generate(
                cfg.seed,
                stream_index(block as u32 + LINEAR_BLOCK_OFFSET, rep as u32),
            );
            let mut x = other.x;
            sort_floats(&mut x);
            let lin = profile(&x, &model.on_grid.q, points, model.sigma, &trims)?;
            Ok((sub, lin))
        })?;
        for (t, &k) in trims.iter().enumerate() {
            let sub: Vec<f64> = results.iter().map(|r| r.0[t]).collect();
            let lin: Vec<f64> = results.iter().map(|r| r.1[t]).collect();
            let j = t + 2;
            record(
                &mut report,
                cfg,
                n,
                &format!("sup_q_sub_trim2^-{j}"),
                &sub,
                (block * 64 + 2 * t) as u32,
            );
            record(
                &mut report,
                cfg,
                n,
                &format!("sup_q_lin_trim2^-{j}"),
                &lin,
                (block * 64 + 2 * t + 1) as u32,
            );
            report.push_agg(Some(n), "value", &format!("trim2^-{j}"), k);
        }
        if n == last {
            let f = trims.len() - 1;
            let sub: Vec<f64> = results.iter().map(|r| r.0[f]).collect();
            let lin: Vec<f64> = results.iter().map(|r| r.1[f]).collect();
            let (ms, ml) = (median(&sub), median(&lin));
            let pos = sub.iter().zip(&lin).filter(|(s, l)| s > l).count();
            let neg = sub.iter().zip(&lin).filter(|(s, l)| s < l).count();
            let p = sign_test_p(pos, neg);
            report.push_agg(Some(n), "value", "sign_test_p", p);
            match cfg.target {
                SubordinationTarget::Identity => report.check(
                    "identity subordination equivalence",
                    p > SIGN_TEST_LEVEL,
                    format!(
                        "sign test p = {p:.4} ({pos} above, {neg} below) at trim {:.3e}",
                        trims[f]
                    ),
                ),
                _ => report.check(
                    "subordinated profile exceeds linear",
                    ms > ml,
                    format!(
                        "median sup|q_n| {ms:.4} (subordinated) vs {ml:.4} (linear) at trim {:.3e}",
                        trims[f]
                    ),
                ),
            }
        }
    }
    // growth of phi(Phi^{-1}(y)) / f(Q(y)) as the grid reaches further into the tails
    let target = target_marginal(cfg.target, 1.0)?;
    for depth in [8u32, 16, 24, 32, 40] {
        let grid = YGrid::tail_refined(1023, depth)?;
        let max = grid
            .points()
            .iter()
            .map(|&y| subordination_ratio(target.as_ref(), y))
            .fold(0.0, f64::max);
        report.push_agg(None, &format!("depth{depth}"), "ratio_max", max);
    }
    report.note("linear-model paths are drawn independently of the subordinated base paths");
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}
