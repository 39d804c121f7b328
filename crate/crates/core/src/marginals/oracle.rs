use rayon::prelude::*;

use super::{ConditionFlags, Marginal, TailExponents};
use crate::error::{Error, Result};
use crate::lrd::{CoefficientSequence, CoefficientSpec, InnovationLaw, InnovationSpec};
use crate::numerics::norm_pdf;
use crate::rng;
use crate::stats::sort_floats;

const BLOCK: usize = 1024;
const KDE_BINS: usize = 8192;

/// Marginal estimated from a large reference sample: piecewise-linear `F`
/// and `Q`, binned Gaussian-kernel estimates of `f` and its derivatives.
#[derive(Debug, Clone)]
pub struct OracleMarginal {
    sorted: Vec<f64>,
    bandwidth: f64,
    grid_lo: f64,
    grid_step: f64,
    /// `f, f', f'', f'''` tabulated on the kernel grid.
    tables: [Vec<f64>; 4],
    tails: TailExponents,
    label: String,
}

impl OracleMarginal {
    /// Builds the oracle from an i.i.d. reference sample.
    pub fn from_sample(
        mut sample: Vec<f64>,
        tails: TailExponents,
        label: impl Into<String>,
    ) -> Result<Self> {
        if sample.len() < 100 || sample.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sample",
                reason: "need at least 100 finite values".into(),
            });
        }
        sort_floats(&mut sample);
        let m = sample.len() as f64;
        let mean = sample.iter().sum::<f64>() / m;
        let sd = (sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
        let q = |p: f64| crate::stats::quantile_sorted(&sample, p);
        let spread = sd.min((q(0.75) - q(0.25)) / 1.349);
        if !(spread > 0.0) {
            return Err(Error::InconsistentMarginal(
                "reference sample has zero spread".into(),
            ));
        }
        // derivative estimates need a wider kernel than the density itself
        let bandwidth = 1.06 * spread * m.powf(-1.0 / 5.0);
        let lo = sample[0] - 6.0 * bandwidth;
        let hi = sample[sample.len() - 1] + 6.0 * bandwidth;
        let step = (hi - lo) / (KDE_BINS - 1) as f64;
        let mut counts = vec![0.0; KDE_BINS];
        for &x in &sample {
            // linear binning
            let pos = (x - lo) / step;
            let i = (pos.floor() as usize).min(KDE_BINS - 2);
            let w = pos - i as f64;
            counts[i] += 1.0 - w;
            counts[i + 1] += w;
        }
        let reach = (6.0 * bandwidth / step).ceil() as isize;
        let kernel: Vec<[f64; 4]> = (-reach..=reach)
            .map(|d| {
                let u = d as f64 * step / bandwidth;
                let phi = norm_pdf(u);
                // derivatives of phi((x - c)/h) with respect to x, up to 1/h^r
                [
                    phi,
                    -u * phi,
                    (u * u - 1.0) * phi,
                    -(u * u * u - 3.0 * u) * phi,
                ]
            })
            .collect();
        let mut tables: [Vec<f64>; 4] = Default::default();
        for (r, table) in tables.iter_mut().enumerate() {
            let norm = 1.0 / (m * bandwidth.powi(r as i32 + 1));
            *table = (0..KDE_BINS as isize)
                .map(|i| {
                    let mut acc = 0.0;
                    for (j, kv) in kernel.iter().enumerate() {
                        let src = i + j as isize - reach;
                        if (0..KDE_BINS as isize).contains(&src) {
                            acc += counts[src as usize] * kv[r];
                        }
                    }
                    acc * norm
                })
                .collect();
        }
        Ok(OracleMarginal {
            sorted: sample,
            bandwidth,
            grid_lo: lo,
            grid_step: step,
            tables,
            tails,
            label: label.into(),
        })
    }

    pub fn sample_size(&self) -> usize {
        self.sorted.len()
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    fn table(&self, x: f64, r: usize) -> f64 {
        let pos = (x - self.grid_lo) / self.grid_step;
        if !(pos >= 0.0 && pos <= (KDE_BINS - 1) as f64) {
            return 0.0;
        }
        let i = (pos.floor() as usize).min(KDE_BINS - 2);
        let w = pos - i as f64;
        let t = &self.tables[r];
        (1.0 - w) * t[i] + w * t[i + 1]
    }

    fn plotting_position(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.sorted.len() as f64
    }
}

impl Marginal for OracleMarginal {
    fn name(&self) -> String {
        format!("oracle({}, m={})", self.label, self.sorted.len())
    }

    fn cdf(&self, x: f64) -> f64 {
        let s = &self.sorted;
        let m = s.len();
        if x <= s[0] {
            return self.plotting_position(0);
        }
        if x >= s[m - 1] {
            return self.plotting_position(m - 1);
        }
        let i = s.partition_point(|&v| v <= x) - 1;
        let (x0, x1) = (s[i], s[i + 1]);
        let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { 1.0 };
        self.plotting_position(i) + w / m as f64
    }

    fn pdf(&self, x: f64) -> f64 {
        self.table(x, 0)
    }

    fn quantile(&self, y: f64) -> f64 {
        let s = &self.sorted;
        let m = s.len();
        let pos = y * m as f64 - 0.5;
        if pos <= 0.0 {
            return s[0];
        }
        if pos >= (m - 1) as f64 {
            return s[m - 1];
        }
        let i = pos.floor() as usize;
        let w = pos - i as f64;
        (1.0 - w) * s[i] + w * s[i + 1]
    }

    fn pdf_derivative(&self, x: f64, order: u32) -> f64 {
        if order > 3 {
            return f64::NAN;
        }
        self.table(x, order as usize)
    }

    fn tail_exponents(&self) -> TailExponents {
        self.tails
    }

    fn flags(&self) -> ConditionFlags {
        ConditionFlags {
            a: [false; 3],
            b: false,
            c: [true; 3],
            csr: [true; 4],
        }
    }
}

/// Oracle for the stationary marginal of the truncated linear process, from
/// `m` independent draws `sum_{k=0}^{K} c_k eps_k`, each using its own
/// innovation window.
pub fn oracle_marginal_from_simulation(
    spec: &CoefficientSpec,
    innovation_spec: &InnovationSpec,
    m: usize,
    seed: u64,
) -> Result<OracleMarginal> {
    if m < 100_000 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: format!("oracle needs m >= 100000, got {m}"),
        });
    }
    let seq = CoefficientSequence::from_spec(*spec)?;
    let c = seq.to_vec(1 << 24)?;
    let sampler = innovation_spec.sampler()?;
    let blocks = m.div_ceil(BLOCK);
    let draws: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut r = rng::stream(seed, b as u64);
            let len = BLOCK.min(m - b * BLOCK);
            let mut window = vec![0.0; c.len()];
            (0..len)
                .map(|_| {
                    sampler.fill(&mut r, &mut window);
                    c.iter().zip(&window).map(|(a, e)| a * e).sum()
                })
                .collect()
        })
        .collect();
    let tails = match innovation_spec.law {
        InnovationLaw::SmoothedSymmetricPareto { alpha, .. } => {
            TailExponents::symmetric((1.0 + alpha) / alpha)
        }
        _ => TailExponents::symmetric(1.0),
    };
    let label = format!("beta={}, K={}", spec.beta, seq.k_max());
    OracleMarginal::from_sample(draws.concat(), tails, label)
}
