//! Empirical, quantile and Bahadur-Kiefer processes on a y-grid, with the
//! weight functions and rate constants used to normalise them.

mod empirical;
mod grid;
mod rates;
mod sup;
mod weights;

pub use empirical::{
    build_process, empirical_cdf, sample_quantile, sample_rank, uniform_transform, EmpiricalCdf,
    MarginalOnGrid, ProcessId, ProcessSample, SampleContext,
};
pub use grid::{GridKind, YGrid, DEFAULT_GRID_POINTS, DEFAULT_TAIL_DEPTH};
pub use rates::{c_beta_p, c_beta_p_with_check, rate_constants, DBranch, RateConstants};
pub use sup::{weighted_sup, SupRange};
pub use weights::{weight_psi, WeightContext, WeightVariant};
