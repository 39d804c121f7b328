use std::time::Instant;

use super::config::ExperimentConfig;
use super::engine::{record, replicate, with_threads, Model};
use super::report::ExperimentReport;
use crate::error::{Error, Result};
use crate::marginals::{ConditionFlags, Marginal};
use crate::numerics::norm_quantile;
use crate::processes::{sample_rank, YGrid};
use crate::stats::sort_floats;

/// Minimum simultaneous coverage accepted for a nominal 95% band.
pub const COVERAGE_FLOOR: f64 = 0.90;

/// Which inequality constrains the band exponent `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuRule {
    pub row: &'static str,
    pub bound: f64,
}

/// Strict lower bound on `nu` for the given `beta`, `gamma` and flags.
pub fn nu_rule(beta: f64, gamma: f64, flags: ConditionFlags) -> NuRule {
    if beta >= 0.75 {
        NuRule {
            row: "nu > 2 gamma - (beta - 1/2) for beta >= 3/4",
            bound: 2.0 * gamma - (beta - 0.5),
        }
    } else if flags.a(2) || flags.c(2) {
        NuRule {
            row: "nu > gamma - (beta - 1/2) for beta < 3/4 under A(2) or C(2)",
            bound: gamma - (beta - 0.5),
        }
    } else {
        NuRule {
            row: "nu > 2 gamma - beta for beta < 3/4 without A(2) and C(2)",
            bound: 2.0 * gamma - beta,
        }
    }
}

pub fn check_nu(nu: f64, beta: f64, marginal: &dyn Marginal) -> Result<()> {
    let rule = nu_rule(beta, marginal.tail_exponents().gamma(), marginal.flags());
    if nu > rule.bound {
        Ok(())
    } else {
        Err(Error::BandExponent {
            nu,
            row: rule.row,
            bound: rule.bound,
        })
    }
}

/// `(c_nu, z_alpha)` with `c_nu = sup (y(1-y))^nu = 4^{-nu}` and `z_alpha`
/// the `1 - alpha/2` standard normal quantile.
pub fn band_constants(nu: f64, alpha_level: f64) -> Result<(f64, f64)> {
    if !(alpha_level > 0.0 && alpha_level <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("level must lie in (0, 1], got {alpha_level}"),
        });
    }
    let z = if alpha_level == 1.0 {
        0.0
    } else {
        norm_quantile(1.0 - alpha_level / 2.0)
    };
    Ok((4f64.powf(-nu), z))
}

/// Simultaneous band `Q_n(y) -/+ sigma n^{-1} c_nu z_alpha (y(1-y))^{-nu}`
/// on the grid points inside `(1/n, 1 - 1/n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub y: Vec<f64>,
    pub center: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Band {
    /// Whether `truth(y)` lies inside the band at every grid point.
    pub fn covers(&self, truth: impl Fn(f64) -> f64) -> bool {
        self.y
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&y, (&lo, &hi))| {
                let q = truth(y);
                lo <= q && q <= hi
            })
    }
}

/// Band from the raw sample `x` with normaliser `sigma = sigma_{n,1}`. The
/// exponent is validated against the marginal's row of the `nu` table.
pub fn quantile_confidence_band(
    x: &[f64],
    sigma: f64,
    marginal: &dyn Marginal,
    beta: f64,
    nu: f64,
    alpha_level: f64,
    grid: &YGrid,
) -> Result<Band> {
    check_nu(nu, beta, marginal)?;
    let mut sorted = x.to_vec();
    sort_floats(&mut sorted);
    band_from_sorted(&sorted, sigma, nu, alpha_level, grid)
}

pub(crate) fn band_from_sorted(
    sorted: &[f64],
    sigma: f64,
    nu: f64,
    alpha_level: f64,
    grid: &YGrid,
) -> Result<Band> {
    let n = sorted.len();
    if n < 3 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "band needs at least 3 observations".into(),
        });
    }
    let (c_nu, z) = band_constants(nu, alpha_level)?;
    let scale = sigma / n as f64 * c_nu * z;
    let (lo, hi) = (1.0 / n as f64, 1.0 - 1.0 / n as f64);
    let y: Vec<f64> = grid
        .points()
        .iter()
        .copied()
        .filter(|&y| y > lo && y < hi)
        .collect();
    if y.is_empty() {
        return Err(Error::EmptyRange(format!("no grid point in ({lo}, {hi})")));
    }
    let mut band = Band {
        center: Vec::with_capacity(y.len()),
        lower: Vec::new(),
        upper: Vec::new(),
        y: Vec::new(),
    };
    for &t in &y {
        let center = sorted[sample_rank(n, t)? - 1];
        let half = scale * (t * (1.0 - t)).powf(-nu);
        band.center.push(center);
        band.lower.push(center - half);
        band.upper.push(center + half);
    }
    band.y = y;
    Ok(band)
}

/// Band for one simulated path at the largest sample size of the grid.
pub fn run_band(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let n = *cfg.n_grid.last().expect("validated grid");
    let model = Model::for_experiment(cfg, n, &[])?;
    let path = model.path(cfg.seed, 0, 0);
    let band = quantile_confidence_band(
        &path.x,
        model.sigma,
        model.marginal.as_ref(),
        cfg.beta,
        cfg.nu,
        cfg.alpha_level,
        &model.grid,
    )?;
    let mut report =
        ExperimentReport::new("band", "simultaneous quantile confidence band", cfg.echo());
    for (i, &y) in band.y.iter().enumerate() {
        report.push_agg(Some(n), &format!("{y:.16e}"), "lower", band.lower[i]);
        report.push_agg(Some(n), &format!("{y:.16e}"), "upper", band.upper[i]);
    }
    let covered = band.covers(|y| model.marginal.quantile(y));
    report.push_agg(Some(n), "value", "covered", if covered { 1.0 } else { 0.0 });
    report.note("band rows use the y value in the rep column");
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Fraction of replications whose band covers `Q(y)` simultaneously on the
/// grid inside `(1/n, 1 - 1/n)`.
pub fn run_coverage_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    with_threads(cfg.threads, || coverage(cfg))?
}

fn coverage(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut report = ExperimentReport::new(
        "coverage",
        "simultaneous quantile confidence band coverage",
        cfg.echo(),
    );
    let last = *cfg.n_grid.last().expect("validated grid");
    for (block, &n) in cfg.n_grid.iter().enumerate() {
        let model = Model::for_experiment(cfg, n, &[])?;
        check_nu(cfg.nu, cfg.beta, model.marginal.as_ref())?;
        let hits = replicate(cfg.replications, |rep| {
            let path = model.path(cfg.seed, block as u32, rep);
            let mut sorted = path.x.clone();
            sort_floats(&mut sorted);
            let band =
                band_from_sorted(&sorted, model.sigma, cfg.nu, cfg.alpha_level, &model.grid)?;
            // the band lives on the grid points inside (1/n, 1 - 1/n)
            let skip = model
                .grid
                .points()
                .partition_point(|&y| y <= 1.0 / n as f64);
            let truth = &model.on_grid.q[skip..skip + band.y.len()];
            let inside = truth
                .iter()
                .enumerate()
                .all(|(i, &q)| band.lower[i] <= q && q <= band.upper[i]);
            Ok(if inside { 1.0 } else { 0.0 })
        })?;
        let fraction = hits.iter().sum::<f64>() / hits.len() as f64;
        record(&mut report, cfg, n, "covered", &hits, block as u32);
        report.push_agg(Some(n), "value", "coverage", fraction);
        if n == last && cfg.alpha_level <= 0.05 + 1e-12 {
            report.check(
                "simultaneous coverage",
                fraction >= COVERAGE_FLOOR,
                format!(
                    "coverage {fraction:.3} at n = {n} (floor {COVERAGE_FLOOR} for nominal {})",
                    1.0 - cfg.alpha_level
                ),
            );
        }
    }
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginals::{Gaussian, Marginal};

    #[test]
    fn constants() {
        let (c, z) = band_constants(0.9, 0.05).unwrap();
        assert!((c - 0.28717).abs() < 1e-5);
        assert!((z - 1.95996).abs() < 1e-5);
        assert_eq!(band_constants(0.9, 1.0).unwrap().1, 0.0);
    }

    #[test]
    fn nu_table_rows() {
        let g = Gaussian::standard();
        assert!(check_nu(0.9, 0.65, &g).is_ok());
        let err = check_nu(0.8, 0.65, &g).unwrap_err();
        assert!(matches!(err, Error::BandExponent { bound, .. } if (bound - 0.85).abs() < 1e-12));
        assert!(matches!(
            check_nu(1.3, 0.8, &g),
            Err(Error::BandExponent { .. })
        ));
        let none = ConditionFlags::default();
        assert!((nu_rule(0.65, 1.0, none).bound - 1.35).abs() < 1e-12);
        assert!(g.flags().c(2));
    }

    #[test]
    fn width_at_half() {
        let x: Vec<f64> = (0..101).map(|i| i as f64).collect();
        let grid = YGrid::uniform(1).unwrap();
        let band = band_from_sorted(&x, 7.0, 0.9, 0.05, &grid).unwrap();
        let (c, z) = band_constants(0.9, 0.05).unwrap();
        let width = band.upper[0] - band.lower[0];
        let expected = 2.0 * 7.0 / 101.0 * c * z * 4f64.powf(0.9);
        assert!((width - expected).abs() < 1e-12 * expected);
    }
}
