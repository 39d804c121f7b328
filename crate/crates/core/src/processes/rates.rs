use crate::error::{Error, Result};
use crate::lrd::SlowlyVarying;
use crate::numerics::{beta_fn, integrate_unit, log_log};

/// Which case of `d_{n,p}` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DBranch {
    /// `(p+1)(2 beta - 1) > 1`.
    Above,
    /// `(p+1)(2 beta - 1) < 1`.
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstants {
    pub a_n: f64,
    pub b_n: f64,
    pub c_n: f64,
    pub d_np: f64,
    pub b_np: f64,
    pub delta_n: f64,
    pub branch: DBranch,
}

/// Rate sequences for sample size `n` (natural logarithms; `log log n` is
/// floored at `n = 16`).
pub fn rate_constants(n: f64, beta: f64, l0: SlowlyVarying, p: u32) -> Result<RateConstants> {
    if !(n >= 16.0) {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("rate constants need n >= 16, got {n}"),
        });
    }
    if !(beta > 0.5 && beta < 1.0) {
        return Err(Error::BetaOutOfRange(beta));
    }
    if p == 0 {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: "order must be at least 1".into(),
        });
    }
    let s = (p as f64 + 1.0) * (2.0 * beta - 1.0) - 1.0;
    if s.abs() < 1e-12 {
        return Err(Error::BoundaryCase { p, beta });
    }
    let l = l0.eval(n);
    let ll = log_log(n);
    let ln = n.ln();
    let a_n = n.powf(-(beta - 0.5)) * l * ll;
    let b_n = n.powf(-(3.0 * beta - 2.5)) * l.powi(3) * ll.powf(1.5);
    let c_n = n.powf(-(2.0 * beta - 1.0)) * l * l * ll.powf(1.5) * ln.sqrt();
    let (d_np, branch) = if s > 0.0 {
        (
            n.powf(-(1.0 - beta)) / l * ln.powf(2.5) * ll.powf(0.75),
            DBranch::Above,
        )
    } else {
        (
            n.powf(-(p as f64) * (beta - 0.5)) * l.powi(p as i32) * ln.sqrt() * ll.powf(0.75),
            DBranch::Below,
        )
    };
    // sigma_{n,1}^2 n^{-1} = n^{2 - 2 beta} L_0^2(n)
    let b_np = n.powf(2.0 - 2.0 * beta) * l * l * d_np * ll.sqrt();
    let delta_n = n.powf(-(2.0 * beta - 1.0)) * l * l * ll;
    Ok(RateConstants {
        a_n,
        b_n,
        c_n,
        d_np,
        b_np,
        delta_n,
        branch,
    })
}

/// Result of the `c(beta, p)` evaluation with its Beta-function cross-check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CBetaCheck {
    pub c: f64,
    pub integral: f64,
    pub beta_function: f64,
    pub relative_residual: f64,
    pub quadrature_error: f64,
}

/// `c(beta, p) = sqrt(I(beta) / ((1 - beta)(3 - 2 beta)))` with
/// `I(beta) = int_0^inf x^{-beta} (1 + x)^{-beta} dx`, evaluated by
/// quadrature after `x = t / (1 - t)`.
pub fn c_beta_p_with_check(beta: f64, _p: u32) -> Result<CBetaCheck> {
    if !(beta > 0.5 && beta < 1.0) {
        return Err(Error::BetaOutOfRange(beta));
    }
    let q = integrate_unit(|t, s| t.powf(-beta) * s.powf(2.0 * beta - 2.0), 1e-13)?;
    let reference = beta_fn(1.0 - beta, 2.0 * beta - 1.0);
    Ok(CBetaCheck {
        c: (q.value / ((1.0 - beta) * (3.0 - 2.0 * beta))).sqrt(),
        integral: q.value,
        beta_function: reference,
        relative_residual: (q.value - reference).abs() / reference,
        quadrature_error: q.error,
    })
}

pub fn c_beta_p(beta: f64, p: u32) -> Result<f64> {
    Ok(c_beta_p_with_check(beta, p)?.c)
}
