use super::empirical::ProcessSample;
use crate::error::{Error, Result};

/// Range of `y` over which a supremum is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupRange {
    Full,
    /// `(C_0 delta_n, 1 - C_0 delta_n)`.
    DeltaTrim {
        c0: f64,
        delta_n: f64,
    },
    /// `(1/n, 1 - 1/n)`.
    OneOverN,
    /// `(k, 1 - k)`.
    Symmetric(f64),
}

impl SupRange {
    /// Open interval `(lo, hi)` for sample size `n`.
    pub fn bounds(&self, n: usize) -> (f64, f64) {
        let k = match *self {
            SupRange::Full => 0.0,
            SupRange::DeltaTrim { c0, delta_n } => c0 * delta_n,
            SupRange::OneOverN => 1.0 / n as f64,
            SupRange::Symmetric(k) => k,
        };
        (k, 1.0 - k)
    }
}

/// `max weight(y) |value(y)|` over grid points inside the range.
pub fn weighted_sup_slices(
    points: &[f64],
    values: &[f64],
    weight: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let mut best: Option<f64> = None;
    for (&y, &v) in points.iter().zip(values) {
        if y > lo && y < hi {
            let w = weight(y) * v.abs();
            best = Some(best.map_or(w, |b: f64| b.max(w)));
        }
    }
    best.ok_or_else(|| Error::EmptyRange(format!("no grid point in ({lo}, {hi})")))
}

pub fn weighted_sup(
    sample: &ProcessSample,
    weight: impl Fn(f64) -> f64,
    range: SupRange,
) -> Result<f64> {
    let (lo, hi) = range.bounds(sample.n);
    weighted_sup_slices(sample.grid.points(), &sample.values, weight, lo, hi)
}
