//! Long-range dependent linear sequences `X_i = sum_k c_k eps_{i-k}` with
//! regularly varying coefficients `c_k ~ k^{-beta} L_0(k)`.

pub mod coefficients;
pub mod convolution;
pub mod innovations;
pub mod path;
pub mod second_order;

pub use coefficients::{
    make_coefficients, make_coefficients_meeting_eps, tail_truncation_index, CoefficientSequence,
    CoefficientSpec, SlowlyVarying, DEFAULT_TRUNCATION_EPS, MAX_TRUNCATION_INDEX,
};
pub use convolution::ConvolutionMethod;
pub use innovations::{InnovationLaw, InnovationSpec};
pub use path::{partial_sum_y, sample_path, LrdPath, PathGenerator, DEFAULT_MEMORY_BUDGET};
pub use second_order::{autocovariance, sigma_np, SecondOrder, SigmaMode};
