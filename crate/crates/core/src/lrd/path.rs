use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lrd::coefficients::{CoefficientSequence, CoefficientSpec};
use crate::lrd::convolution::{ConvolutionMethod, ValidConvolver};
use crate::lrd::innovations::{InnovationSampler, InnovationSpec};
use crate::numerics::fsum;
use crate::rng;

/// Default cap on `n + K` (number of stored innovations).
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 27;

/// One simulated trajectory `X_1..X_n` with the innovations that produced it.
///
/// `innovations[t]` holds `eps_{t + 1 - K}`, so `x[i - 1] = sum_k c_k eps_{i-k}`.
#[derive(Debug, Clone)]
pub struct LrdPath {
    pub x: Vec<f64>,
    pub innovations: Vec<f64>,
    pub spec: CoefficientSpec,
    pub innovation_spec: InnovationSpec,
    pub seed: u64,
    pub stream_index: u64,
    pub k: u64,
    pub coefficients: Arc<Vec<f64>>,
}

impl LrdPath {
    /// Builds a path from explicit coefficients and innovations.
    pub fn from_innovations(
        coefficients: Vec<f64>,
        innovations: Vec<f64>,
        spec: CoefficientSpec,
        method: ConvolutionMethod,
    ) -> Result<Self> {
        if coefficients.is_empty() || innovations.len() < coefficients.len() {
            return Err(Error::InvalidParameter {
                name: "innovations",
                reason: format!(
                    "need at least {} innovations, got {}",
                    coefficients.len(),
                    innovations.len()
                ),
            });
        }
        let coefficients = Arc::new(coefficients);
        let conv = ValidConvolver::new(coefficients.clone(), innovations.len(), method);
        let x = conv.apply(&innovations);
        Ok(LrdPath {
            x,
            innovations,
            spec,
            innovation_spec: InnovationSpec::default(),
            seed: 0,
            stream_index: 0,
            k: (coefficients.len() - 1) as u64,
            coefficients,
        })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
}

/// Reusable generator: coefficient spectra are computed once and shared by
/// every replication.
#[derive(Debug)]
pub struct PathGenerator {
    spec: CoefficientSpec,
    innovation_spec: InnovationSpec,
    n: usize,
    sequence: Arc<CoefficientSequence>,
    coefficients: Arc<Vec<f64>>,
    linear: ValidConvolver,
    squared: std::sync::OnceLock<ValidConvolver>,
    sampler: InnovationSampler,
    method: ConvolutionMethod,
}

impl PathGenerator {
    /// Generator for paths of length `n`. The truncation index is the
    /// tail-variance index of `spec`, capped by `spec.max_lag`.
    pub fn new(spec: CoefficientSpec, innovation_spec: InnovationSpec, n: usize) -> Result<Self> {
        Self::with_options(
            spec,
            innovation_spec,
            n,
            DEFAULT_MEMORY_BUDGET,
            ConvolutionMethod::Auto,
        )
    }

    pub fn with_options(
        spec: CoefficientSpec,
        innovation_spec: InnovationSpec,
        n: usize,
        memory_budget: usize,
        method: ConvolutionMethod,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "path length must be at least 1".into(),
            });
        }
        let sequence = Arc::new(CoefficientSequence::from_spec(spec)?);
        let k = sequence.k_max();
        let requested = n as u128 + k as u128;
        if requested > memory_budget as u128 {
            return Err(Error::MemoryBudget {
                requested,
                budget: memory_budget,
            });
        }
        let coefficients = Arc::new(sequence.to_vec(memory_budget)?);
        let linear = ValidConvolver::new(coefficients.clone(), n + k as usize, method);
        Ok(PathGenerator {
            spec,
            innovation_spec,
            n,
            sequence,
            coefficients,
            linear,
            squared: std::sync::OnceLock::new(),
            sampler: innovation_spec.sampler()?,
            method,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.sequence.k_max()
    }

    pub fn sequence(&self) -> &Arc<CoefficientSequence> {
        &self.sequence
    }

    pub fn coefficients(&self) -> &Arc<Vec<f64>> {
        &self.coefficients
    }

    pub fn innovation_spec(&self) -> &InnovationSpec {
        &self.innovation_spec
    }

    /// Path drawn from the stream `(seed, stream_index)`.
    pub fn generate(&self, seed: u64, stream_index: u64) -> LrdPath {
        let mut r = rng::stream(seed, stream_index);
        let mut innovations = vec![0.0; self.n + self.k() as usize];
        self.sampler.fill(&mut r, &mut innovations);
        let x = self.linear.apply(&innovations);
        LrdPath {
            x,
            innovations,
            spec: self.spec,
            innovation_spec: self.innovation_spec,
            seed,
            stream_index,
            k: self.k(),
            coefficients: self.coefficients.clone(),
        }
    }

    /// `Y_{n,2}` for a path produced by this generator, reusing the cached
    /// spectrum of `c_k^2`.
    pub fn y2(&self, path: &LrdPath) -> f64 {
        fsum(self.y2_terms(path))
    }

    /// Per-index summands of `Y_{n,2}`; prefix sums give `Y_{m,2}` for `m <= n`.
    pub fn y2_terms(&self, path: &LrdPath) -> Vec<f64> {
        let conv = self.squared.get_or_init(|| {
            let sq = Arc::new(self.coefficients.iter().map(|c| c * c).collect::<Vec<_>>());
            ValidConvolver::new(sq, self.n + self.k() as usize, self.method)
        });
        y2_terms_with(conv, path)
    }
}

/// Draws one path; the innovations come from stream `(seed, 0)`.
pub fn sample_path(
    spec: &CoefficientSpec,
    innovation_spec: &InnovationSpec,
    n: usize,
    seed: u64,
) -> Result<LrdPath> {
    Ok(PathGenerator::new(*spec, *innovation_spec, n)?.generate(seed, 0))
}

fn y2_terms_with(conv: &ValidConvolver, path: &LrdPath) -> Vec<f64> {
    let sq: Vec<f64> = path.innovations.iter().map(|e| e * e).collect();
    let w = conv.apply(&sq);
    path.x
        .iter()
        .zip(&w)
        .map(|(x, w)| 0.5 * (x * x - w))
        .collect()
}

/// Multilinear partial sums: `Y_{n,0} = n`, `Y_{n,1} = sum X_i` and
/// `Y_{n,2} = sum_i sum_{0 <= j1 < j2 <= K} c_{j1} c_{j2} eps_{i-j1} eps_{i-j2}`.
pub fn partial_sum_y(path: &LrdPath, r: u32) -> Result<f64> {
    match r {
        0 => Ok(path.n() as f64),
        1 => Ok(fsum(path.x.iter().copied())),
        2 => {
            let sq = Arc::new(path.coefficients.iter().map(|c| c * c).collect::<Vec<_>>());
            let conv = ValidConvolver::new(sq, path.innovations.len(), ConvolutionMethod::Auto);
            Ok(fsum(y2_terms_with(&conv, path)))
        }
        _ => Err(Error::Unsupported(format!(
            "partial sum order r={r}; only r in {{0,1,2}} is implemented"
        ))),
    }
}
