//! Step-size denominators `h_t`.
//!
//! Every optimizer in this crate takes steps of the form `γ_k / h_t · g_t`. The
//! sequence `h_t` must be positive and non-decreasing along a run; the variants
//! below are functions of the running squared-gradient sum `S_t` (or constants,
//! for the known-horizon settings).

use crate::error::{invalid, Error, Result};

/// `√((S+1)·(1 + ln(1+S)))`, i.e. `√((S+1)·ln(e(1+S)))`.
pub fn h_main(s: f64) -> Result<f64> {
    check_sum(s)?;
    Ok(((s + 1.0) * (1.0 + (1.0 + s).ln())).sqrt())
}

/// `√S`; undefined while no nonzero gradient has been seen.
pub fn h_sqrt(s: f64) -> Result<f64> {
    check_sum(s)?;
    if s == 0.0 {
        return Err(Error::UndefinedScale(
            "sqrt(S) with S = 0 (all gradients so far are zero)".into(),
        ));
    }
    Ok(s.sqrt())
}

/// `√(ε + S)`.
pub fn h_eps(s: f64, epsilon: f64) -> Result<f64> {
    check_sum(s)?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok((epsilon + s).sqrt())
}

/// `L·√T`, the constant scale of the known-`L`, known-horizon setting.
pub fn h_const(l: f64, horizon: usize) -> Result<f64> {
    check_lipschitz(l)?;
    if horizon == 0 {
        return Err(invalid("horizon must be >= 1"));
    }
    Ok(l * (horizon as f64).sqrt())
}

/// The confidence factor `ℓ_T(δ) = max(1, ln(log₂(2T)/δ))`.
pub fn ell_t(horizon: usize, delta: f64) -> Result<f64> {
    if horizon == 0 {
        return Err(invalid("horizon must be >= 1"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1], got {delta}")));
    }
    let log2_2t = (2.0 * horizon as f64).log2();
    Ok((log2_2t / delta).ln().max(1.0))
}

/// `L·√(T·ℓ_T(δ/(1+k_prev)²))`.
pub fn h_stochastic(l: f64, horizon: usize, delta: f64, k_prev: u32) -> Result<f64> {
    check_lipschitz(l)?;
    if k_prev == 0 {
        return Err(invalid("phase index must be >= 1"));
    }
    let shrink = (1.0 + k_prev as f64).powi(2);
    let ell = ell_t(horizon, delta / shrink)?;
    Ok(l * (horizon as f64 * ell).sqrt())
}

fn check_sum(s: f64) -> Result<()> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(invalid(format!("gradient sum must be finite and >= 0, got {s}")));
    }
    Ok(())
}

fn check_lipschitz(l: f64) -> Result<()> {
    if !(l.is_finite() && l > 0.0) {
        return Err(invalid(format!("Lipschitz constant must be positive, got {l}")));
    }
    Ok(())
}

/// The rule producing `h_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepScale {
    /// [`h_main`], the parameter-free default.
    MainH,
    /// [`h_sqrt`], plain AdaGrad normalization.
    SqrtS,
    /// [`h_eps`].
    SqrtEpsS { epsilon: f64 },
    /// [`h_const`]; requires `‖g_t‖ ≤ L` and a fixed horizon.
    ConstLT { lipschitz: f64, horizon: usize },
    /// [`h_stochastic`]; depends on the previous phase index, not on `S`.
    StochasticLT { lipschitz: f64, horizon: usize, delta: f64 },
}

impl StepScale {
    /// `h_t` given the running sum `S_t` and the previous phase index `k_{t−1}`.
    pub fn h(&self, s: f64, k_prev: u32) -> Result<f64> {
        match *self {
            StepScale::MainH => h_main(s),
            StepScale::SqrtS => h_sqrt(s),
            StepScale::SqrtEpsS { epsilon } => h_eps(s, epsilon),
            StepScale::ConstLT { lipschitz, horizon } => {
                check_sum(s)?;
                h_const(lipschitz, horizon)
            }
            StepScale::StochasticLT { lipschitz, horizon, delta } => {
                h_stochastic(lipschitz, horizon, delta, k_prev)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepScale::MainH => "main",
            StepScale::SqrtS => "sqrt",
            StepScale::SqrtEpsS { .. } => "sqrt_eps",
            StepScale::ConstLT { .. } => "const_lt",
            StepScale::StochasticLT { .. } => "stochastic_lt",
        }
    }
}
