use std::time::Instant;

use super::config::ExperimentConfig;
use super::engine::{fit_slope, record, replicate, sup_on_grid, with_threads, Model};
use super::report::ExperimentReport;
use crate::error::{Error, Result};
use crate::marginals::Marginal;
use crate::numerics::norm_sf;
use crate::processes::{rate_constants, SupRange, WeightContext};
use crate::stats::{ks_distance, median};

/// Acceptance bound on the KS distance to the weak limit.
pub const WEAK_LIMIT_KS_BOUND: f64 = 0.15;
/// Acceptance window for the median ratio of general to uniform BK processes.
pub const HALF_FACTOR_TOLERANCE: f64 = 0.1;

/// CDF of `a Z^2` with `Z` standard normal: `2 Phi(sqrt(t/a)) - 1` for
/// `a > 0`, mirrored for `a < 0`.
pub fn weak_limit_cdf(t: f64, a: f64) -> Result<f64> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::DegenerateTarget(format!("limit scale a = {a}")));
    }
    let s = t / a;
    let tail = if s <= 0.0 {
        1.0
    } else {
        2.0 * norm_sf(s.sqrt())
    };
    Ok(if a > 0.0 { 1.0 - tail } else { tail })
}

/// `f'(Q(y0))`, rejecting values that vanish relative to `f(Q(y0))^2`.
pub fn limit_scale(marginal: &dyn Marginal, y0: f64) -> Result<f64> {
    let a = marginal.fprime_at_q(y0);
    let fq = marginal.density_quantile(y0);
    if !a.is_finite() || a.abs() <= 1e-8 * fq * fq {
        return Err(Error::DegenerateTarget(format!(
            "f'(Q(y0)) = {a:e} at y0 = {y0} for the {} marginal; the limit a Z^2 is degenerate",
            marginal.name()
        )));
    }
    Ok(a)
}

/// Uniform Bahadur-Kiefer process: weak limit of `T_n = sigma^{-1} n R~_n(y0)`
/// against `f'(Q(y0)) Z^2`, and the weighted sup-distance to
/// `n^{-1} sigma^{-1} f'(Q(y)) Y_{n,1}^2`.
pub fn run_bk_uniform_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    with_threads(cfg.threads, || bk_uniform(cfg, "bk-uniform"))?
}

/// The weak-convergence part of [`run_bk_uniform_experiment`] under its own name.
pub fn run_weak_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    with_threads(cfg.threads, || bk_uniform(cfg, "weak"))?
}

fn bk_uniform(cfg: &ExperimentConfig, name: &str) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut report = ExperimentReport::new(
        name,
        "uniform Bahadur-Kiefer process and its weak limit",
        cfg.echo(),
    );
    let mut sup_samples = Vec::new();
    let last = *cfg.n_grid.last().expect("validated grid");
    for (block, &n) in cfg.n_grid.iter().enumerate() {
        let model = Model::for_experiment(cfg, n, &[cfg.y0])?;
        let a = limit_scale(model.marginal.as_ref(), cfg.y0)?;
        let wctx = WeightContext::new(
            cfg.beta,
            model.marginal.tail_exponents().gamma(),
            cfg.mu,
            model.marginal.flags(),
        );
        let psi2 = wctx.function(2)?;
        let pts = model.grid.points();
        let nf = n as f64;
        let results = replicate(cfg.replications, |rep| {
            let path = model.path(cfg.seed, block as u32, rep);
            let ctx = model.context(&path)?;
            let t = nf * ctx.bk_uniform(cfg.y0) / model.sigma;
            let lead = ctx.y1 * ctx.y1 / (nf * model.sigma);
            let sup = sup_on_grid(pts, 0.0, 1.0, |i, y| {
                psi2(y) * (ctx.bk_uniform(y) - model.on_grid.fpq[i] * lead).abs()
            });
            Ok((t, sup))
        })?;
        let t: Vec<f64> = results.iter().map(|r| r.0).collect();
        let sup: Vec<f64> = results.iter().map(|r| r.1).collect();
        record(&mut report, cfg, n, "T_n", &t, 2 * block as u32);
        record(&mut report, cfg, n, "sup_dev", &sup, 2 * block as u32 + 1);
        let ks = ks_distance(&t, |x| weak_limit_cdf(x, a).expect("nondegenerate scale"));
        let agree = t.iter().filter(|&&v| v * a > 0.0).count() as f64 / t.len() as f64;
        report.push_agg(Some(n), "value", "limit_scale", a);
        report.push_agg(Some(n), "value", "ks_distance", ks);
        report.push_agg(Some(n), "value", "sign_agreement", agree);
        if n == last {
            report.check(
                "weak limit KS",
                ks <= WEAK_LIMIT_KS_BOUND,
                format!(
                    "KS {ks:.4} vs a Z^2 with a = {a:.5} at n = {n} (bound {WEAK_LIMIT_KS_BOUND})"
                ),
            );
        }
        sup_samples.push(sup);
    }
    if cfg.n_grid.len() >= 3 {
        let fit = fit_slope(cfg, &sup_samples, 1 << 18);
        let b = cfg.beta;
        let expected = if b < 2.0 / 3.0 {
            -(2.0 * b - 1.0)
        } else {
            -(1.0 - b)
        };
        report.push_slope("sup_dev", fit, expected, f64::INFINITY);
        report.note(
            "sup_dev slope is reported against the rate exponent without an acceptance window",
        );
    }
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// General Bahadur-Kiefer process: weighted sup-distance to
/// `n^{-1} sigma^{-1} (f'(Q(y))/2) Y_{n,1}^2` over `(C0 delta_n, 1 - C0 delta_n)`
/// (all of `(0,1)` when `gamma = 1`), and the pointwise ratio `R_n(y0)/R~_n(y0)`.
pub fn run_bk_general_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    with_threads(cfg.threads, || bk_general(cfg))?
}

/// Refuses marginals that do not satisfy CsR1-CsR4.
pub fn require_csr(marginal: &dyn Marginal) -> Result<()> {
    if marginal.flags().csr_all() {
        Ok(())
    } else {
        Err(Error::ConditionUnmet("CsR1-CsR4"))
    }
}

/// Range of the general BK sup for a marginal with smallest tail exponent `gamma`.
pub fn bk_general_range(gamma: f64, c0: f64, delta_n: f64) -> Result<SupRange> {
    if gamma == 1.0 {
        return Ok(SupRange::Full);
    }
    if c0 * delta_n >= 0.5 {
        return Err(Error::EmptyRange(format!(
            "C0 delta_n = {} leaves no interior",
            c0 * delta_n
        )));
    }
    Ok(SupRange::DeltaTrim { c0, delta_n })
}

fn bk_general(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut report = ExperimentReport::new(
        "bk-general",
        "general Bahadur-Kiefer process and the factor 1/2",
        cfg.echo(),
    );
    let mut sup_samples = Vec::new();
    let last = *cfg.n_grid.last().expect("validated grid");
    for (block, &n) in cfg.n_grid.iter().enumerate() {
        let model = Model::for_experiment(cfg, n, &[cfg.y0])?;
        let m = model.marginal.as_ref();
        require_csr(m)?;
        let gamma = m.tail_exponents().gamma();
        let rates = rate_constants((n as f64).max(16.0), cfg.beta, cfg.slowly_varying, cfg.p)?;
        let range = bk_general_range(gamma, cfg.c0, rates.delta_n)?;
        let (lo, hi) = range.bounds(n);
        let psi3 = WeightContext::new(cfg.beta, gamma, cfg.mu, m.flags()).function(3)?;
        let pts = model.grid.points();
        if pts.iter().all(|&y| y <= lo || y >= hi) {
            return Err(Error::EmptyRange(format!("no grid point in ({lo}, {hi})")));
        }
        let nf = n as f64;
        let q0 = m.quantile(cfg.y0);
        let fq0 = m.pdf(q0);
        let results = replicate(cfg.replications, |rep| {
            let path = model.path(cfg.seed, block as u32, rep);
            let ctx = model.context(&path)?;
            let lead = 0.5 * ctx.y1 * ctx.y1 / (nf * model.sigma);
            let sup = sup_on_grid(pts, lo, hi, |i, y| {
                let r = ctx.bk_general_with(y, model.on_grid.q[i], model.on_grid.fq[i]);
                psi3(y) * (r - model.on_grid.fpq[i] * lead).abs()
            });
            let ratio = ctx.bk_general_with(cfg.y0, q0, fq0) / ctx.bk_uniform(cfg.y0);
            Ok((sup, ratio))
        })?;
        let sup: Vec<f64> = results.iter().map(|r| r.0).collect();
        let ratio: Vec<f64> = results.iter().map(|r| r.1).collect();
        record(&mut report, cfg, n, "sup_dev", &sup, 2 * block as u32);
        record(&mut report, cfg, n, "ratio", &ratio, 2 * block as u32 + 1);
        report.push_agg(Some(n), "value", "range_lo", lo);
        if n == last {
            let med = median(&ratio);
            report.check(
                "factor one half",
                (med - 0.5).abs() <= HALF_FACTOR_TOLERANCE,
                format!("median R_n(y0)/R~_n(y0) = {med:.4} at n = {n} (target 0.5 +/- {HALF_FACTOR_TOLERANCE})"),
            );
        }
        sup_samples.push(sup);
    }
    if cfg.n_grid.len() >= 3 {
        let fit = fit_slope(cfg, &sup_samples, 1 << 19);
        let b = cfg.beta;
        let expected = if b < 2.0 / 3.0 {
            -(2.0 * b - 1.0)
        } else {
            -(1.0 - b)
        };
        report.push_slope("sup_dev", fit, expected, f64::INFINITY);
        report.note(
            "sup_dev slope is reported against the rate exponent without an acceptance window",
        );
    }
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginals::Gaussian;

    #[test]
    fn weak_limit_cdf_is_a_cdf() {
        for a in [0.18233, -0.4, 2.0] {
            let ts: Vec<f64> = (-4000..=4000).map(|i| i as f64 * 0.01).collect();
            let v: Vec<f64> = ts.iter().map(|&t| weak_limit_cdf(t, a).unwrap()).collect();
            assert!(v.windows(2).all(|w| w[1] >= w[0]));
            assert!(weak_limit_cdf(-1e9, a).unwrap() < 1e-6);
            assert!(weak_limit_cdf(1e9, a).unwrap() > 1.0 - 1e-6);
        }
        // P(Z^2 <= 1) = 0.682689...
        assert!((weak_limit_cdf(1.0, 1.0).unwrap() - 0.682_689_492_137_085_9).abs() < 1e-12);
        assert!(weak_limit_cdf(1.0, 0.0).is_err());
    }

    #[test]
    fn limit_scale_examples() {
        let g = Gaussian::standard();
        assert!((limit_scale(&g, 0.3).unwrap() - 0.18233).abs() < 1e-5);
        assert!(matches!(
            limit_scale(&g, 0.5),
            Err(Error::DegenerateTarget(_))
        ));
    }

    #[test]
    fn range_rules() {
        assert_eq!(bk_general_range(1.0, 1.0, 0.2).unwrap(), SupRange::Full);
        assert!(matches!(
            bk_general_range(1.5, 1.0, 0.6),
            Err(Error::EmptyRange(_))
        ));
        assert_eq!(
            bk_general_range(1.5, 2.0, 0.1).unwrap(),
            SupRange::DeltaTrim {
                c0: 2.0,
                delta_n: 0.1
            }
        );
    }
}
