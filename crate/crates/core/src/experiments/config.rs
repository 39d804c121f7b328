use crate::error::{Error, Result};
use crate::lrd::{InnovationLaw, InnovationSpec, SlowlyVarying, DEFAULT_TRUNCATION_EPS};
use crate::processes::{DEFAULT_GRID_POINTS, DEFAULT_TAIL_DEPTH};

/// How the marginal law of `X` is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginalMode {
    /// Closed form; only available for Gaussian innovations, where `X` is
    /// Gaussian with the variance of the truncated sequence.
    Exact,
    /// Simulated oracle built from `sample_size` independent draws.
    Oracle { sample_size: usize },
}

/// Trimming level `l_n` for trimmed sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrimRule {
    /// `l_n = n^{-exponent}`.
    Power(f64),
    /// Constant `l_n`.
    Fixed(f64),
}

impl TrimRule {
    pub fn level(&self, n: usize) -> f64 {
        match *self {
            TrimRule::Power(e) => (n as f64).powf(-e),
            TrimRule::Fixed(l) => l,
        }
    }
}

impl std::fmt::Display for TrimRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrimRule::Power(e) => write!(f, "power({e})"),
            TrimRule::Fixed(l) => write!(f, "fixed({l})"),
        }
    }
}

/// Target marginal of the subordinated model `Y = Q_F(Phi(X))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubordinationTarget {
    Exponential,
    Identity,
    Logistic,
}

impl SubordinationTarget {
    pub fn name(&self) -> &'static str {
        match self {
            SubordinationTarget::Exponential => "exponential",
            SubordinationTarget::Identity => "identity",
            SubordinationTarget::Logistic => "logistic",
        }
    }
}

impl TryFrom<&str> for SubordinationTarget {
    type Error = Error;
    fn try_from(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(SubordinationTarget::Exponential),
            "identity" | "gaussian" => Ok(SubordinationTarget::Identity),
            "logistic" => Ok(SubordinationTarget::Logistic),
            other => Err(Error::Config(format!(
                "unknown subordination target '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub beta: f64,
    pub slowly_varying: SlowlyVarying,
    pub innovation: InnovationSpec,
    pub marginal_mode: MarginalMode,
    /// Sample sizes, strictly increasing.
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    /// Pointwise target for weak-limit and ratio statistics.
    pub y0: f64,
    pub mu: f64,
    /// Constant of the trimmed range `(C0 delta_n, 1 - C0 delta_n)`.
    pub c0: f64,
    /// Band exponent.
    pub nu: f64,
    pub alpha_level: f64,
    pub trim: TrimRule,
    /// Expansion order of the higher-order reduction.
    pub p: u32,
    pub truncation_eps: f64,
    /// Truncation index cap `K <= lag_factor * n`.
    pub lag_factor: u64,
    pub grid_points: usize,
    pub tail_depth: u32,
    pub bootstrap_resamples: usize,
    /// Checkpoints `2^j`, `lil_min_log2 <= j <= lil_max_log2`.
    pub lil_min_log2: u32,
    pub lil_max_log2: u32,
    /// Truncation cap for the single long path of the LIL tracker.
    pub lil_max_lag: u64,
    pub target: SubordinationTarget,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            beta: 0.65,
            slowly_varying: SlowlyVarying::default(),
            innovation: InnovationSpec::standard_normal(),
            marginal_mode: MarginalMode::Exact,
            n_grid: (10..=16).map(|j| 1usize << j).collect(),
            replications: 200,
            seed: 20_240_601,
            y0: 0.3,
            mu: 0.05,
            c0: 1.0,
            nu: 0.9,
            alpha_level: 0.05,
            trim: TrimRule::Power(0.5),
            p: 2,
            truncation_eps: DEFAULT_TRUNCATION_EPS,
            lag_factor: 16,
            grid_points: DEFAULT_GRID_POINTS,
            tail_depth: DEFAULT_TAIL_DEPTH,
            bootstrap_resamples: 200,
            lil_min_log2: 8,
            lil_max_log2: 20,
            lil_max_lag: 1 << 20,
            target: SubordinationTarget::Exponential,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.5 && self.beta < 1.0) {
            return Err(Error::BetaOutOfRange(self.beta));
        }
        if self.p == 0 {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: "order must be at least 1".into(),
            });
        }
        if ((self.p as f64 + 1.0) * (2.0 * self.beta - 1.0) - 1.0).abs() < 1e-12 {
            return Err(Error::BoundaryCase {
                p: self.p,
                beta: self.beta,
            });
        }
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid is empty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!(
                "n_grid must be strictly increasing, got {:?}",
                self.n_grid
            )));
        }
        if self.n_grid[0] < 2 {
            return Err(Error::Config("sample sizes must be at least 2".into()));
        }
        if self.replications < 50 {
            return Err(Error::Config(format!(
                "replications must be at least 50, got {}",
                self.replications
            )));
        }
        if !(self.y0 > 0.0 && self.y0 < 1.0) {
            return Err(Error::QuantileDomain(self.y0));
        }
        if !(self.mu > 0.0) {
            return Err(Error::InvalidParameter {
                name: "mu",
                reason: format!("must be positive, got {}", self.mu),
            });
        }
        if !(self.c0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "c0",
                reason: format!("must be positive, got {}", self.c0),
            });
        }
        if !(self.nu >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "nu",
                reason: format!("must be nonnegative, got {}", self.nu),
            });
        }
        if !(self.alpha_level > 0.0 && self.alpha_level <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("level must lie in (0, 1], got {}", self.alpha_level),
            });
        }
        if !(self.truncation_eps > 0.0 && self.truncation_eps < 1.0) {
            return Err(Error::InvalidParameter {
                name: "truncation_eps",
                reason: format!("must lie in (0, 1), got {}", self.truncation_eps),
            });
        }
        if self.lag_factor == 0 || self.lil_max_lag == 0 {
            return Err(Error::InvalidParameter {
                name: "lag_factor",
                reason: "lag caps must be positive".into(),
            });
        }
        if self.grid_points == 0 {
            return Err(Error::InvalidParameter {
                name: "grid_points",
                reason: "grid needs at least one point".into(),
            });
        }
        if self.lil_min_log2 < 4 || self.lil_min_log2 > self.lil_max_log2 || self.lil_max_log2 > 30
        {
            return Err(Error::Config(format!(
                "LIL checkpoints need 4 <= lil_min_log2 <= lil_max_log2 <= 30, got {}..{}",
                self.lil_min_log2, self.lil_max_log2
            )));
        }
        if let MarginalMode::Exact = self.marginal_mode {
            if !self.innovation.is_gaussian() {
                return Err(Error::Config(
                    "exact marginal mode requires Gaussian innovations; use marginal=oracle".into(),
                ));
            }
        }
        if let MarginalMode::Oracle { sample_size } = self.marginal_mode {
            if sample_size < 100_000 {
                return Err(Error::Config(format!(
                    "oracle sample size must be at least 100000, got {sample_size}"
                )));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(())
    }

    /// `key=value` pairs echoing every parameter (thread count excluded, as it
    /// never changes results).
    pub fn echo(&self) -> Vec<(String, String)> {
        let law = match self.innovation.law {
            InnovationLaw::StandardNormal => "normal".to_string(),
            InnovationLaw::DoubleExponential => "laplace".to_string(),
            InnovationLaw::SmoothedSymmetricPareto { alpha, width } => {
                format!("pareto({alpha},{width})")
            }
        };
        let l0 = match self.slowly_varying {
            SlowlyVarying::Constant { scale } => format!("const({scale})"),
            SlowlyVarying::LogPower { a } => format!("logpow({a})"),
        };
        let marginal = match self.marginal_mode {
            MarginalMode::Exact => "exact".to_string(),
            MarginalMode::Oracle { sample_size } => format!("oracle({sample_size})"),
        };
        let n_grid = self
            .n_grid
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",");
        [
            ("beta", self.beta.to_string()),
            ("l0", l0),
            ("innovations", law),
            ("marginal", marginal),
            ("n_grid", n_grid),
            ("reps", self.replications.to_string()),
            ("seed", self.seed.to_string()),
            ("y0", self.y0.to_string()),
            ("mu", self.mu.to_string()),
            ("c0", self.c0.to_string()),
            ("nu", self.nu.to_string()),
            ("alpha", self.alpha_level.to_string()),
            ("trim", self.trim.to_string()),
            ("p", self.p.to_string()),
            ("eps", self.truncation_eps.to_string()),
            ("lag_factor", self.lag_factor.to_string()),
            ("grid_points", self.grid_points.to_string()),
            ("tail_depth", self.tail_depth.to_string()),
            ("bootstrap", self.bootstrap_resamples.to_string()),
            ("lil_min_log2", self.lil_min_log2.to_string()),
            ("lil_max_log2", self.lil_max_log2.to_string()),
            ("lil_max_lag", self.lil_max_lag.to_string()),
            ("target", self.target.name().to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}
