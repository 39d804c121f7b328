use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_log_scale, Quadrature};

/// Choice of the slowly varying factor `L_0` in `c_k = k^{-beta} L_0(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlowlyVarying {
    /// `L_0(k) = scale`.
    Constant { scale: f64 },
    /// `L_0(k) = (ln(k + e))^a`.
    LogPower { a: f64 },
}

impl SlowlyVarying {
    pub fn eval(&self, k: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant { scale } => scale,
            SlowlyVarying::LogPower { a } => (k + std::f64::consts::E).ln().powf(a),
        }
    }

    fn derivative(&self, k: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant { .. } => 0.0,
            SlowlyVarying::LogPower { a } => {
                let shifted = k + std::f64::consts::E;
                a * shifted.ln().powf(a - 1.0) / shifted
            }
        }
    }
}

impl Default for SlowlyVarying {
    fn default() -> Self {
        SlowlyVarying::Constant { scale: 1.0 }
    }
}

pub const DEFAULT_TRUNCATION_EPS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSpec {
    pub beta: f64,
    pub slowly_varying: SlowlyVarying,
    /// Rescale the truncated coefficients so that `sum c_k^2 = 1`.
    pub normalize_unit_variance: bool,
    /// Relative tail-variance tolerance used to pick the truncation index.
    pub truncation_eps: f64,
    /// Optional hard cap on the truncation index.
    pub max_lag: Option<u64>,
}

impl CoefficientSpec {
    pub fn new(beta: f64) -> Result<Self> {
        let spec = CoefficientSpec {
            beta,
            slowly_varying: SlowlyVarying::default(),
            normalize_unit_variance: false,
            truncation_eps: DEFAULT_TRUNCATION_EPS,
            max_lag: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_slowly_varying(mut self, l0: SlowlyVarying) -> Self {
        self.slowly_varying = l0;
        self
    }

    pub fn normalized(mut self, yes: bool) -> Self {
        self.normalize_unit_variance = yes;
        self
    }

    pub fn with_truncation_eps(mut self, eps: f64) -> Self {
        self.truncation_eps = eps;
        self
    }

    pub fn with_max_lag(mut self, k: Option<u64>) -> Self {
        self.max_lag = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.5 && self.beta < 1.0) {
            return Err(Error::BetaOutOfRange(self.beta));
        }
        if !(self.truncation_eps > 0.0) {
            return Err(Error::InvalidParameter {
                name: "truncation_eps",
                reason: format!("must be positive, got {}", self.truncation_eps),
            });
        }
        match self.slowly_varying {
            SlowlyVarying::Constant { scale } if !(scale > 0.0 && scale.is_finite()) => {
                Err(Error::InvalidParameter {
                    name: "scale",
                    reason: format!("must be positive, got {scale}"),
                })
            }
            SlowlyVarying::LogPower { a } if !a.is_finite() => Err(Error::InvalidParameter {
                name: "log_power",
                reason: format!("exponent must be finite, got {a}"),
            }),
            _ => Ok(()),
        }
    }

    /// Un-normalised coefficient: `c_0 = L_0(1)`, `c_k = k^{-beta} L_0(k)`.
    pub fn raw(&self, k: f64) -> f64 {
        let k = k.max(1.0);
        k.powf(-self.beta) * self.slowly_varying.eval(k)
    }

    fn raw_derivative(&self, x: f64) -> f64 {
        let l = self.slowly_varying.eval(x);
        let dl = self.slowly_varying.derivative(x);
        x.powf(-self.beta) * (dl - self.beta * l / x)
    }

    /// `int_a^{a+w} raw(x) dx` for `a >= 1`, `w >= 0`; the width is passed
    /// separately so narrow windows far out keep full precision.
    fn raw_integral(&self, a: f64, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        let log_ratio = (w / a).ln_1p();
        match self.slowly_varying {
            SlowlyVarying::Constant { scale } => {
                let e = 1.0 - self.beta;
                scale * a.powf(e) * (e * log_ratio).exp_m1() / e
            }
            SlowlyVarying::LogPower { .. } => integrate(
                |s| {
                    let x = a * s.exp();
                    self.raw(x) * x
                },
                0.0,
                log_ratio,
                1e-12,
            )
            .map(|q: Quadrature| q.value)
            .unwrap_or(f64::NAN),
        }
    }

    /// `int_a^b raw(x)^2 dx` for `1 <= a <= b` (`b` may be infinite).
    fn raw_sq_integral(&self, a: f64, b: f64) -> f64 {
        match self.slowly_varying {
            SlowlyVarying::Constant { scale } => {
                let e = 1.0 - 2.0 * self.beta;
                let upper = if b.is_finite() { b.powf(e) } else { 0.0 };
                scale * scale * (upper - a.powf(e)) / e
            }
            SlowlyVarying::LogPower { .. } => {
                let b = if b.is_finite() { b } else { a * 1e300 };
                integrate_log_scale(|x| self.raw(x).powi(2), a, b, 1e-12)
                    .map(|q| q.value)
                    .unwrap_or(f64::NAN)
            }
        }
    }
}

/// Number of leading coefficients held explicitly; beyond this index sums are
/// evaluated with Euler-Maclaurin corrections.
pub const DEFAULT_DIRECT_LIMIT: u64 = 1 << 20;

const EM_EXPLICIT_HEAD: u64 = 4096;

/// Truncated coefficient sequence `c_0..c_K`, possibly with astronomically
/// large `K`, supporting exact-to-rounding sums over arbitrary index windows.
#[derive(Debug, Clone)]
pub struct CoefficientSequence {
    spec: CoefficientSpec,
    k_max: u64,
    factor: f64,
    direct: Vec<f64>,
    prefix: Vec<f64>,
}

impl CoefficientSequence {
    pub fn new(spec: CoefficientSpec, k_max: u64) -> Result<Self> {
        Self::with_direct_limit(spec, k_max, DEFAULT_DIRECT_LIMIT)
    }

    /// Sequence truncated at the index chosen by [`tail_truncation_index`],
    /// capped by `spec.max_lag`.
    pub fn from_spec(spec: CoefficientSpec) -> Result<Self> {
        spec.validate()?;
        let mut k = tail_truncation_index(&spec);
        if let Some(cap) = spec.max_lag {
            k = k.min(cap);
        }
        Self::new(spec, k)
    }

    pub fn with_direct_limit(spec: CoefficientSpec, k_max: u64, direct_limit: u64) -> Result<Self> {
        spec.validate()?;
        let top = k_max.min(direct_limit);
        let direct: Vec<f64> = (0..=top).map(|k| spec.raw(k as f64)).collect();
        let mut seq = CoefficientSequence {
            spec,
            k_max,
            factor: 1.0,
            direct,
            prefix: Vec::new(),
        };
        if spec.normalize_unit_variance {
            seq.factor = 1.0 / seq.raw_sum_squares().sqrt();
            for c in &mut seq.direct {
                *c *= seq.factor;
            }
        }
        let mut acc = 0.0;
        seq.prefix = seq
            .direct
            .iter()
            .map(|c| {
                acc += c;
                acc
            })
            .collect();
        Ok(seq)
    }

    pub fn spec(&self) -> &CoefficientSpec {
        &self.spec
    }

    pub fn beta(&self) -> f64 {
        self.spec.beta
    }

    /// Truncation index `K`.
    pub fn k_max(&self) -> u64 {
        self.k_max
    }

    /// Multiplier applied to the raw coefficients (1 unless normalised).
    pub fn factor(&self) -> f64 {
        self.factor
    }

    fn direct_top(&self) -> u64 {
        (self.direct.len() - 1) as u64
    }

    pub fn value(&self, k: u64) -> f64 {
        if k > self.k_max {
            0.0
        } else if k <= self.direct_top() {
            self.direct[k as usize]
        } else {
            self.factor * self.spec.raw(k as f64)
        }
    }

    fn smooth(&self, x: f64) -> f64 {
        self.factor * self.spec.raw(x)
    }

    fn smooth_derivative(&self, x: f64) -> f64 {
        self.factor * self.spec.raw_derivative(x)
    }

    /// `L_0(n)` including the normalisation factor, so `c_k ~ k^{-beta} slowly_varying_at(k)`.
    pub fn slowly_varying_at(&self, n: f64) -> f64 {
        self.factor * self.spec.slowly_varying.eval(n)
    }

    /// Materialises `c_0..c_K`; fails when `K + 1` exceeds `budget` entries.
    pub fn to_vec(&self, budget: usize) -> Result<Vec<f64>> {
        let len = self.k_max as u128 + 1;
        if len > budget as u128 {
            return Err(Error::MemoryBudget {
                requested: len,
                budget,
            });
        }
        Ok((0..=self.k_max).map(|k| self.value(k)).collect())
    }

    /// `sum_{k=a}^{b} c_k` clipped to `[0, K]`.
    pub fn window_sum(&self, a: u64, b: u64) -> f64 {
        let b = b.min(self.k_max);
        if a > b {
            return 0.0;
        }
        let top = self.direct_top();
        if b <= top {
            let lower = if a == 0 {
                0.0
            } else {
                self.prefix[a as usize - 1]
            };
            return self.prefix[b as usize] - lower;
        }
        let mut total = 0.0;
        let mut start = a;
        if a <= top {
            let lower = if a == 0 {
                0.0
            } else {
                self.prefix[a as usize - 1]
            };
            total += self.prefix[top as usize] - lower;
            start = top + 1;
        }
        total + self.smooth_window(start as f64, (b - start) as f64)
    }

    /// Euler-Maclaurin approximation of `sum_{k=a}^{b} h(k)` for smooth `h`.
    fn em_sum(
        &self,
        a: f64,
        b: f64,
        h: impl Fn(f64) -> f64,
        dh: impl Fn(f64) -> f64,
        integral: impl Fn(f64, f64) -> f64,
    ) -> f64 {
        if b < a {
            return 0.0;
        }
        if b == a {
            return h(a);
        }
        integral(a, b) + 0.5 * (h(a) + h(b)) + (dh(b) - dh(a)) / 12.0
    }

    fn raw_sum_squares(&self) -> f64 {
        // self.direct is still un-normalised when this is called
        let top = self.direct_top();
        let head: f64 = self.direct.iter().map(|c| c * c).sum();
        if self.k_max <= top {
            return head;
        }
        let a = (top + 1) as f64;
        let b = self.k_max as f64;
        let spec = self.spec;
        head + self.em_sum(
            a,
            b,
            |x| spec.raw(x).powi(2),
            |x| 2.0 * spec.raw(x) * spec.raw_derivative(x),
            |lo, hi| spec.raw_sq_integral(lo, hi),
        )
    }

    /// `sum_{k=0}^{K} c_k^2`.
    pub fn sum_squares(&self) -> f64 {
        if self.spec.normalize_unit_variance {
            return self.factor * self.factor * self.raw_sum_squares_unscaled();
        }
        self.raw_sum_squares_unscaled()
    }

    fn raw_sum_squares_unscaled(&self) -> f64 {
        let top = self.direct_top();
        let head: f64 = (0..=top).map(|k| self.spec.raw(k as f64).powi(2)).sum();
        if self.k_max <= top {
            return head;
        }
        let spec = self.spec;
        head + self.em_sum(
            (top + 1) as f64,
            self.k_max as f64,
            |x| spec.raw(x).powi(2),
            |x| 2.0 * spec.raw(x) * spec.raw_derivative(x),
            |lo, hi| spec.raw_sq_integral(lo, hi),
        )
    }

    /// `sum_{m=0}^{K-k} c_m c_{m+k}`.
    pub fn lag_product_sum(&self, k: u64) -> f64 {
        if k > self.k_max {
            return 0.0;
        }
        let last = self.k_max - k;
        let top = self.direct_top();
        // direct part: m + k within the explicit table
        let direct_last = last.min(top.saturating_sub(k));
        let mut total = 0.0;
        if k <= top {
            for m in 0..=direct_last {
                total += self.direct[m as usize] * self.direct[(m + k) as usize];
            }
        }
        let start = if k <= top { direct_last + 1 } else { 0 };
        if start > last {
            return total;
        }
        // explicit head: the smooth summand is too curved near m = 0 for a
        // low-order Euler-Maclaurin correction
        let mut m0 = start;
        while m0 <= last && m0 < EM_EXPLICIT_HEAD {
            total += self.value(m0) * self.value(m0 + k);
            m0 += 1;
        }
        if m0 > last {
            return total;
        }
        let kf = k as f64;
        let h = |x: f64| self.smooth(x) * self.smooth(x + kf);
        let dh = |x: f64| {
            self.smooth_derivative(x) * self.smooth(x + kf)
                + self.smooth(x) * self.smooth_derivative(x + kf)
        };
        let integral = |lo: f64, hi: f64| {
            integrate_log_scale(|x| self.smooth(x) * self.smooth(x + kf), lo, hi, 1e-12)
                .map(|q| q.value)
                .unwrap_or(f64::NAN)
        };
        total + self.em_sum(m0 as f64, last as f64, h, dh, integral)
    }

    /// Continuous extension of `sum_{k=a}^{a+w} c_k` by Euler-Maclaurin; only
    /// valid beyond the explicit table and below `K`.
    pub(crate) fn smooth_window(&self, a: f64, w: f64) -> f64 {
        if w < 0.0 {
            return 0.0;
        }
        if w == 0.0 {
            return self.smooth(a);
        }
        let b = a + w;
        self.factor * self.spec.raw_integral(a, w)
            + 0.5 * (self.smooth(a) + self.smooth(b))
            + (self.smooth_derivative(b) - self.smooth_derivative(a)) / 12.0
    }

    pub(crate) fn smooth_value(&self, x: f64) -> f64 {
        self.smooth(x)
    }

    pub(crate) fn direct_limit(&self) -> u64 {
        self.direct_top()
    }
}

/// Coefficients `c_0..c_K` for the given spec.
pub fn make_coefficients(spec: &CoefficientSpec, k: u64) -> Result<Vec<f64>> {
    CoefficientSequence::new(*spec, k)?.to_vec(usize::MAX)
}

/// Like [`make_coefficients`] but refuses a `K` that leaves more than
/// `truncation_eps` of the coefficient variance in the tail.
pub fn make_coefficients_meeting_eps(spec: &CoefficientSpec, k: u64) -> Result<Vec<f64>> {
    let required = tail_truncation_index(spec);
    if k < required {
        return Err(Error::TruncationTooShort { required, given: k });
    }
    make_coefficients(spec, k)
}

/// Integral-comparison bound on `sum_{k>K} raw_k^2`.
pub fn tail_variance_bound(spec: &CoefficientSpec, k: u64) -> f64 {
    if k == 0 {
        return f64::INFINITY;
    }
    spec.raw_sq_integral(k as f64, f64::INFINITY)
}

/// `sum_{k>=0} raw_k^2` of the untruncated sequence.
pub fn total_variance(spec: &CoefficientSpec) -> f64 {
    let top = 1u64 << 16;
    let head: f64 = (0..=top).map(|k| spec.raw(k as f64).powi(2)).sum();
    let a = (top + 1) as f64;
    // sum_{k>=a} h(k) = int_a^inf h + h(a)/2 - h'(a)/12
    let h = spec.raw(a).powi(2);
    let dh = 2.0 * spec.raw(a) * spec.raw_derivative(a);
    head + spec.raw_sq_integral(a, f64::INFINITY) + 0.5 * h - dh / 12.0
}

/// Largest truncation index ever returned; slowly decaying sequences with
/// tight tolerances saturate here.
pub const MAX_TRUNCATION_INDEX: u64 = 1 << 62;

/// Smallest `K` whose integral tail bound is at most `truncation_eps` of the
/// total coefficient variance, capped at [`MAX_TRUNCATION_INDEX`].
pub fn tail_truncation_index(spec: &CoefficientSpec) -> u64 {
    if spec.truncation_eps >= 1.0 {
        return 0;
    }
    let target = spec.truncation_eps * total_variance(spec);
    let meets = |k: u64| tail_variance_bound(spec, k) <= target;
    if meets(1) {
        return 1;
    }
    let mut hi: u64 = 2;
    while !meets(hi) {
        if hi >= MAX_TRUNCATION_INDEX {
            return MAX_TRUNCATION_INDEX;
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    // invariant: !meets(lo), meets(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if meets(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub type SharedCoefficients = Arc<CoefficientSequence>;
