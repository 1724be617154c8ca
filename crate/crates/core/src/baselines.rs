//! Comparison methods that need prior knowledge of the problem.
//!
//! [`run_adagrad`] is AdaGrad-norm with the distance to the optimum supplied,
//! `η_t = D/√S_t`. [`run_oracle`] is the fixed step `D/(L√T)`, which needs `D`,
//! the Lipschitz constant and the horizon.

use crate::error::{invalid, Result};
use crate::problem::Problem;
use crate::trace::{Run, TraceRecord};
use crate::vector::{RunningMean, Vector};

/// Regret constant of the classical AdaGrad-norm bound `R_T ≤ c·D·√S_T`.
///
/// Telescoping `⟨g_t, x_t − x*⟩ ≤ (‖x_t−x*‖² − ‖x_{t+1}−x*‖²)/(2η_t) + η_t‖g_t‖²/2`
/// with `η_t = D/√S_t` gives `max_t‖x_t−x*‖²·√S_T/(2D) + D·√S_T`, using
/// `Σ a_t/√S_t ≤ 2√S_T` for the second sum. When every iterate stays within
/// `D` of `x*` this is `(1/2 + 1)·D·√S_T`.
pub const ADAGRAD_REGRET_CONSTANT: f64 = 1.5;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Shared projected-step loop; `scale(S_t)` returns `h_t`, or `None` to skip the step.
fn run_with(
    problem: &Problem,
    d: f64,
    horizon: usize,
    scale: impl Fn(f64) -> Option<f64>,
) -> Result<Run> {
    check_positive("D", d)?;
    if horizon == 0 {
        return Err(invalid("horizon must be >= 1"));
    }
    let x1 = problem.x1().clone();
    let mut x = x1.clone();
    let mut mean = RunningMean::new(problem.dim());
    let mut records = Vec::with_capacity(horizon);
    let (mut s, mut gamma_sq) = (0.0, 0.0);
    for t in 1..=horizon {
        mean.push(&x);
        let (f_xt, g) = problem.evaluate(&x)?;
        let grad_norm_sq = g.norm_sq();
        s += grad_norm_sq;
        let (h, eta) = match scale(s) {
            Some(h) => (h, d / h),
            None => (f64::INFINITY, 0.0),
        };
        if eta > 0.0 {
            x = problem.project(&x.sub_scaled(eta, &g))?;
            gamma_sq += eta * eta * grad_norm_sq;
        }
        if !x.is_finite() {
            return Err(crate::Error::NonFinite { t, what: "iterate" });
        }
        records.push(TraceRecord {
            t,
            k_t: 1,
            gamma_k: d,
            h_t: h,
            eta_t: eta,
            f_xt,
            grad_norm_sq,
            s_t: s,
            gamma_sq,
            dist_to_x1: x.distance(&x1),
            b_value: f64::INFINITY,
        });
    }
    let (_, g_next) = problem.evaluate(&x)?;
    Ok(Run {
        records,
        s_next: s + g_next.norm_sq(),
        x_average: mean.mean().expect("horizon >= 1"),
        x_last: x,
    })
}

/// AdaGrad-norm with known distance: `x_{t+1} = Proj(x_t − D/√S_t · g_t)`.
///
/// Iterations before the first nonzero gradient take no step.
pub fn run_adagrad(problem: &Problem, d: f64, horizon: usize) -> Result<Run> {
    run_with(problem, d, horizon, |s| (s > 0.0).then(|| s.sqrt()))
}

/// Constant step `D/(L√T)`.
pub fn run_oracle(problem: &Problem, d: f64, lipschitz: f64, horizon: usize) -> Result<Run> {
    check_positive("L", lipschitz)?;
    let h = lipschitz * (horizon as f64).sqrt();
    run_with(problem, d, horizon, |_| Some(h))
}

/// `c·D·√S_T` with [`ADAGRAD_REGRET_CONSTANT`]; valid while `‖x_t − x*‖ ≤ D` along the run.
pub fn adagrad_regret_bound(d: f64, s_t: f64) -> f64 {
    ADAGRAD_REGRET_CONSTANT * d * s_t.sqrt()
}

/// The general form `(max_t‖x_t−x*‖²/(2D) + D)·√S_T`, valid for any run.
pub fn adagrad_regret_bound_with_radius(d: f64, max_dist_to_opt: f64, s_t: f64) -> f64 {
    (max_dist_to_opt * max_dist_to_opt / (2.0 * d) + d) * s_t.sqrt()
}

/// `D·L·√T`, valid when `D = ‖x1 − x*‖` and `‖g_t‖ ≤ L`.
pub fn oracle_regret_bound(d: f64, lipschitz: f64, horizon: usize) -> f64 {
    d * lipschitz * (horizon as f64).sqrt()
}

/// Largest `‖x_t − x*‖` over `t = 1..=T+1`, recomputed by replaying AdaGrad.
pub fn adagrad_max_distance(problem: &Problem, d: f64, horizon: usize, x_star: &Vector) -> Result<f64> {
    check_positive("D", d)?;
    let mut x = problem.x1().clone();
    let mut s = 0.0;
    let mut max_dist = x.distance(x_star);
    for _ in 0..horizon {
        let (_, g) = problem.evaluate(&x)?;
        s += g.norm_sq();
        if s > 0.0 {
            x = problem.project(&x.sub_scaled(d / s.sqrt(), &g))?;
        }
        max_dist = max_dist.max(x.distance(x_star));
    }
    Ok(max_dist)
}
