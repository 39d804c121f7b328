use std::sync::Arc;

use rayon::prelude::*;

use super::config::{ExperimentConfig, MarginalMode};
use crate::error::{Error, Result};
use crate::lrd::{CoefficientSpec, LrdPath, PathGenerator, SecondOrder};
use crate::marginals::{oracle_marginal_from_simulation, Gaussian, Marginal};
use crate::processes::{MarginalOnGrid, SampleContext, YGrid};
use crate::rng::{stream, stream_index};
use crate::stats::{
    median, median_bootstrap_ci, median_slope, quantile_sorted, sort_floats, SlopeFit,
};

use super::report::ExperimentReport;

/// Stream block reserved for bootstrap resampling.
const BOOTSTRAP_BLOCK: u32 = u32::MAX;
/// Stream block reserved for oracle marginals.
const ORACLE_SEED_SALT: u64 = 0x6f72_6163_6c65;

/// Everything shared by the replications at one sample size: the path
/// generator, the exact normaliser `sigma_{n,1}`, the marginal law and its
/// values on the evaluation grid.
#[derive(Debug)]
pub struct Model {
    pub n: usize,
    pub spec: CoefficientSpec,
    pub generator: PathGenerator,
    pub second: SecondOrder,
    pub sigma: f64,
    pub marginal: Arc<dyn Marginal>,
    pub grid: Arc<YGrid>,
    pub on_grid: MarginalOnGrid,
}

impl Model {
    /// Model for sample size `n`, truncated at `min(K_eps, lag_cap)` and
    /// normalised so that `sum c_k^2 = 1`.
    pub fn build(
        cfg: &ExperimentConfig,
        n: usize,
        lag_cap: u64,
        extra_points: &[f64],
    ) -> Result<Self> {
        let spec = CoefficientSpec::new(cfg.beta)?
            .with_slowly_varying(cfg.slowly_varying)
            .normalized(true)
            .with_truncation_eps(cfg.truncation_eps)
            .with_max_lag(Some(lag_cap));
        let generator = PathGenerator::new(spec, cfg.innovation, n)?;
        let second = SecondOrder::new(generator.sequence().clone(), cfg.innovation.variance()?);
        let sigma = second.sigma2_n1(n as u64).sqrt();
        let marginal: Arc<dyn Marginal> = match cfg.marginal_mode {
            MarginalMode::Exact => Arc::new(Gaussian::new(second.marginal_variance())?),
            MarginalMode::Oracle { sample_size } => Arc::new(oracle_marginal_from_simulation(
                &spec,
                &cfg.innovation,
                sample_size,
                cfg.seed ^ ORACLE_SEED_SALT,
            )?),
        };
        let mut grid =
            YGrid::tail_refined(cfg.grid_points, cfg.tail_depth)?.with_points(extra_points);
        grid.add_jumps(n);
        let grid = Arc::new(grid);
        let on_grid = MarginalOnGrid::new(grid.clone(), marginal.as_ref());
        if on_grid
            .fq
            .iter()
            .chain(&on_grid.fpq)
            .any(|v| !v.is_finite())
        {
            return Err(Error::MissingMarginalQuantity(
                "f(Q(y)) and f'(Q(y)) on the evaluation grid",
            ));
        }
        Ok(Model {
            n,
            spec,
            generator,
            second,
            sigma,
            marginal,
            grid,
            on_grid,
        })
    }

    /// Model with the experiment's default lag cap `lag_factor * n`.
    pub fn for_experiment(cfg: &ExperimentConfig, n: usize, extra_points: &[f64]) -> Result<Self> {
        Self::build(
            cfg,
            n,
            cfg.lag_factor.saturating_mul(n as u64),
            extra_points,
        )
    }

    pub fn path(&self, seed: u64, block: u32, rep: usize) -> LrdPath {
        self.generator
            .generate(seed, stream_index(block, rep as u32))
    }

    pub fn context<'a>(&'a self, path: &LrdPath) -> Result<SampleContext<'a>> {
        SampleContext::from_path(path, self.marginal.as_ref(), self.sigma)
    }

    /// `L_0(n)` including the normalisation factor.
    pub fn l0(&self) -> f64 {
        self.generator.sequence().slowly_varying_at(self.n as f64)
    }

    pub fn k(&self) -> u64 {
        self.generator.k()
    }
}

/// Runs `f(rep)` for every replication in parallel; results keep replication
/// order, so the outcome does not depend on scheduling.
pub fn replicate<T, F>(reps: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..reps).into_par_iter().map(f).collect()
}

/// Runs `f` on a dedicated pool of `threads` workers (or the global pool).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {t} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn bootstrap_rng(cfg: &ExperimentConfig, tag: u32) -> crate::rng::StreamRng {
    stream(cfg.seed, stream_index(BOOTSTRAP_BLOCK, tag))
}

/// Records per-replication values of `statistic` plus median, quartiles and
/// a 95% bootstrap interval for the median.
pub fn record(
    report: &mut ExperimentReport,
    cfg: &ExperimentConfig,
    n: usize,
    statistic: &str,
    values: &[f64],
    tag: u32,
) {
    for (rep, &v) in values.iter().enumerate() {
        report.push_rep(n, rep, statistic, v);
    }
    let mut sorted = values.to_vec();
    sort_floats(&mut sorted);
    report.push_agg(Some(n), "median", statistic, median(values));
    report.push_agg(Some(n), "q25", statistic, quantile_sorted(&sorted, 0.25));
    report.push_agg(Some(n), "q75", statistic, quantile_sorted(&sorted, 0.75));
    let (lo, hi) = median_bootstrap_ci(
        values,
        cfg.bootstrap_resamples,
        0.95,
        &mut bootstrap_rng(cfg, tag),
    );
    report.push_agg(Some(n), "median_ci_lo", statistic, lo);
    report.push_agg(Some(n), "median_ci_hi", statistic, hi);
}

/// Log-log slope of per-`n` medians with a bootstrap standard error.
pub fn fit_slope(cfg: &ExperimentConfig, samples: &[Vec<f64>], tag: u32) -> SlopeFit {
    median_slope(
        &cfg.n_grid,
        samples,
        cfg.bootstrap_resamples,
        &mut bootstrap_rng(cfg, tag),
    )
}

/// Sup of `weight(y_i) |value_i|` over grid indices with `lo < y < hi`.
pub fn sup_on_grid(
    points: &[f64],
    lo: f64,
    hi: f64,
    mut term: impl FnMut(usize, f64) -> f64,
) -> f64 {
    let start = points.partition_point(|&y| y <= lo);
    let end = points.partition_point(|&y| y < hi);
    (start..end).map(|i| term(i, points[i])).fold(0.0, f64::max)
}
