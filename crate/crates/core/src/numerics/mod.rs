//! Numerical building blocks shared by the simulation modules.

pub mod quadrature;
pub mod special;
pub mod summation;

pub use quadrature::{integrate, integrate_log_scale, integrate_unit, Quadrature};
pub use special::{beta_fn, log_log, norm_cdf, norm_pdf, norm_quantile, norm_sf};
pub use summation::fsum;
