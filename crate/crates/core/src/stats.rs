//! Summary statistics used by the Monte Carlo reports.

use rand::Rng;

use crate::rng::StreamRng;

pub fn sort_floats(values: &mut [f64]) {
    values.sort_by(|a, b| a.total_cmp(b));
}

/// Linear-interpolation quantile (type 7) of already sorted data.
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    sort_floats(&mut v);
    quantile_sorted(&v, 0.5)
}

/// One-sample Kolmogorov-Smirnov distance `sup_x |F_n(x) - F(x)|`.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut v = sample.to_vec();
    sort_floats(&mut v);
    ks_distance_sorted(&v, cdf)
}

pub fn ks_distance_sorted<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        // ties share one jump
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let f = cdf(sorted[i]);
        d = d.max((j + 1) as f64 / n - f).max(f - i as f64 / n);
        i = j + 1;
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Classical OLS standard error of the slope.
    pub slope_se: f64,
}

pub fn ols(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if xs.len() > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    LineFit {
        slope,
        intercept,
        slope_se,
    }
}

/// Log-log fit of per-`n` medians, with a bootstrap standard error obtained
/// by resampling replications within each `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub bootstrap_se: f64,
    pub ols_se: f64,
}

pub fn median_slope(
    ns: &[usize],
    samples: &[Vec<f64>],
    resamples: usize,
    rng: &mut StreamRng,
) -> SlopeFit {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| median(s).ln()).collect();
    let fit = ols(&xs, &ys);
    let mut slopes = Vec::with_capacity(resamples);
    let mut buf = Vec::new();
    for _ in 0..resamples {
        let boot: Vec<f64> = samples
            .iter()
            .map(|s| {
                buf.clear();
                buf.extend((0..s.len()).map(|_| s[rng.random_range(0..s.len())]));
                median(&buf).ln()
            })
            .collect();
        slopes.push(ols(&xs, &boot).slope);
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len().max(1) as f64;
    let var =
        slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (slopes.len().max(2) - 1) as f64;
    SlopeFit {
        slope: fit.slope,
        intercept: fit.intercept,
        bootstrap_se: var.sqrt(),
        ols_se: fit.slope_se,
    }
}

/// Percentile bootstrap interval for the median.
pub fn median_bootstrap_ci(
    sample: &[f64],
    resamples: usize,
    level: f64,
    rng: &mut StreamRng,
) -> (f64, f64) {
    let mut meds: Vec<f64> = (0..resamples)
        .map(|_| {
            let b: Vec<f64> = (0..sample.len())
                .map(|_| sample[rng.random_range(0..sample.len())])
                .collect();
            median(&b)
        })
        .collect();
    sort_floats(&mut meds);
    let tail = (1.0 - level) / 2.0;
    (
        quantile_sorted(&meds, tail),
        quantile_sorted(&meds, 1.0 - tail),
    )
}

/// Two-sided exact sign test p-value; zero differences are dropped.
pub fn sign_test_p(positive: usize, negative: usize) -> f64 {
    let n = positive + negative;
    if n == 0 {
        return 1.0;
    }
    let k = positive.min(negative);
    // P(X <= k) for X ~ Bin(n, 1/2), accumulated in log space
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    let mut ln_choose = 0.0;
    let mut tail = 0.0;
    for i in 0..=k {
        if i > 0 {
            ln_choose += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        tail += (ln_choose + ln_half_n).exp();
    }
    (2.0 * tail).min(1.0)
}
