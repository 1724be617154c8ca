//! Free AdaGrad: projected subgradient descent with a self-tuning step numerator.
//!
//! Each iteration takes the step `x_{t+1} = Proj(x_t − γ_k / h_t · g_t)` with
//! `γ_k = γ₀·2^k`. The phase index `k` never decreases; it is the smallest
//! `k ≥ k_{t−1}` whose trial point stays within a distance budget `B_{t+1}(k)`
//! of the starting point `x1`. When the budget is exceeded the numerator is
//! doubled and the step is re-probed from the same `x_t`, so there are no
//! restarts and no additional gradient evaluations.

use crate::error::{invalid, Error, Probe, Result};
use crate::problem::Problem;
use crate::projection::Projection;
use crate::step_scales::StepScale;
use crate::trace::{Run, TraceRecord};
use crate::vector::{RunningMean, Vector};

/// Maximum number of doublings attempted in a single phase search.
pub const DEFAULT_DOUBLING_CAP: u32 = 64;

/// `γ_k = γ₀·2^k`, computed by exponent arithmetic.
pub fn gamma_k(gamma0: f64, k: u32) -> f64 {
    gamma0 * 2f64.powi(k as i32)
}

/// The distance budget `B_{t+1}(k)` of the phase test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdRule {
    /// `2γ_k/√k + √(Γ²_t + γ_k²‖g_t‖²/h_t²)`.
    FullB,
    /// `3γ_k`, the warm-up threshold.
    SimpleB,
    /// `2γ_k/√k + √(Γ²_t + γ_k²/T)`, the known-horizon warm-up threshold.
    ImprovedWarmupB { horizon: usize },
    /// `38γ_k`, the threshold of the stochastic variant.
    StochasticB,
}

impl ThresholdRule {
    pub fn name(&self) -> &'static str {
        match self {
            ThresholdRule::FullB => "full",
            ThresholdRule::SimpleB => "simple",
            ThresholdRule::ImprovedWarmupB { .. } => "improved_warmup",
            ThresholdRule::StochasticB => "stochastic",
        }
    }
}

/// The squared displacement `γ_k²‖g‖²/h²` folded into `Γ²` on acceptance.
fn displacement_sq(gamma: f64, grad_norm_sq: f64, h: f64) -> f64 {
    gamma * gamma * grad_norm_sq / (h * h)
}

pub fn threshold(
    rule: ThresholdRule,
    k: u32,
    gamma0: f64,
    gamma_sq: f64,
    grad_norm_sq: f64,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(invalid(format!("step scale h must be positive, got {h}")));
    }
    if k == 0 {
        return Err(invalid("phase index must be >= 1"));
    }
    let gamma = gamma_k(gamma0, k);
    Ok(match rule {
        ThresholdRule::FullB => {
            2.0 * gamma / f64::from(k).sqrt()
                + (gamma_sq + displacement_sq(gamma, grad_norm_sq, h)).sqrt()
        }
        ThresholdRule::SimpleB => 3.0 * gamma,
        ThresholdRule::ImprovedWarmupB { horizon } => {
            if horizon == 0 {
                return Err(invalid("warm-up horizon must be >= 1"));
            }
            2.0 * gamma / f64::from(k).sqrt() + (gamma_sq + gamma * gamma / horizon as f64).sqrt()
        }
        ThresholdRule::StochasticB => 38.0 * gamma,
    })
}

/// The accepted outcome of a phase search.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseChoice {
    pub k: u32,
    pub x_next: Vector,
    pub b_value: f64,
    pub distance: f64,
}

/// Running state of Free AdaGrad before iteration `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeState {
    /// Index of the next iteration (starts at 1).
    pub t: usize,
    /// Current iterate `x_t`.
    pub x: Vector,
    /// Anchor `x1`.
    pub x1: Vector,
    /// `S_{t−1}`.
    pub s: f64,
    /// `Γ_t²`.
    pub gamma_sq: f64,
    /// `k_{t−1}`.
    pub k: u32,
    pub gamma0: f64,
}

impl FreeState {
    pub fn new(x1: Vector, gamma0: f64) -> Result<Self> {
        if !(gamma0.is_finite() && gamma0 > 0.0) {
            return Err(invalid(format!("gamma0 must be positive, got {gamma0}")));
        }
        Ok(Self { t: 1, x: x1.clone(), x1, s: 0.0, gamma_sq: 0.0, k: 1, gamma0 })
    }

    pub fn gamma(&self) -> f64 {
        gamma_k(self.gamma0, self.k)
    }

    /// The trial point `Proj(x_t − γ_k/h · g)` for phase `k`.
    pub fn probe(&self, g: &Vector, h: f64, k: u32, projection: &Projection) -> Result<Vector> {
        if g.dim() != self.x.dim() {
            return Err(invalid("gradient dimension differs from the iterate"));
        }
        if !(h > 0.0) {
            return Err(invalid(format!("step scale h must be positive, got {h}")));
        }
        projection.project(&self.x.sub_scaled(gamma_k(self.gamma0, k) / h, g))
    }

    /// Smallest `k ≥ self.k` whose trial point lies within the threshold of `x1`.
    pub fn find_k(
        &self,
        g: &Vector,
        h: f64,
        rule: ThresholdRule,
        projection: &Projection,
        k_cap: u32,
    ) -> Result<PhaseChoice> {
        if k_cap < self.k {
            return Err(invalid("doubling cap is below the current phase"));
        }
        let grad_norm_sq = g.norm_sq();
        let mut probes = Vec::new();
        for k in self.k..=k_cap {
            let x_next = self.probe(g, h, k, projection)?;
            let b_value = threshold(rule, k, self.gamma0, self.gamma_sq, grad_norm_sq, h)?;
            let distance = x_next.distance(&self.x1);
            if distance <= b_value {
                return Ok(PhaseChoice { k, x_next, b_value, distance });
            }
            probes.push(Probe { k, distance, threshold: b_value });
        }
        Err(Error::Divergence { t: self.t, k_start: self.k, k_cap, probes })
    }

    /// One iteration from an already-evaluated `(f(x_t), g_t)`.
    ///
    /// Order is fixed: `S_t`, then `h_t`, then the phase search, then `Γ²`.
    /// The state is left untouched on error.
    pub fn step_with_gradient(
        &mut self,
        f_xt: f64,
        g: &Vector,
        scale: &StepScale,
        rule: ThresholdRule,
        projection: &Projection,
    ) -> Result<TraceRecord> {
        if g.dim() != self.x.dim() {
            return Err(invalid("gradient dimension differs from the iterate"));
        }
        let grad_norm_sq = g.norm_sq();
        if !grad_norm_sq.is_finite() {
            return Err(Error::NonFinite { t: self.t, what: "subgradient" });
        }
        let s = self.s + grad_norm_sq;
        let h = match scale.h(s, self.k) {
            Ok(h) => h,
            Err(Error::UndefinedScale(_)) if grad_norm_sq == 0.0 => {
                return Ok(self.skip(f_xt, rule));
            }
            Err(e) => return Err(e),
        };

        let choice = self.find_k(g, h, rule, projection, self.k + DEFAULT_DOUBLING_CAP)?;
        if !choice.x_next.is_finite() {
            return Err(Error::NonFinite { t: self.t, what: "iterate" });
        }
        let gamma = gamma_k(self.gamma0, choice.k);
        let gamma_sq = self.gamma_sq + displacement_sq(gamma, grad_norm_sq, h);

        let record = TraceRecord {
            t: self.t,
            k_t: choice.k,
            gamma_k: gamma,
            h_t: h,
            eta_t: gamma / h,
            f_xt,
            grad_norm_sq,
            s_t: s,
            gamma_sq,
            dist_to_x1: choice.distance,
            b_value: choice.b_value,
        };
        self.x = choice.x_next;
        self.s = s;
        self.gamma_sq = gamma_sq;
        self.k = choice.k;
        self.t += 1;
        Ok(record)
    }

    /// Zero gradient with an undefined scale: no displacement, nothing accumulates.
    fn skip(&mut self, f_xt: f64, rule: ThresholdRule) -> TraceRecord {
        let b_value = threshold(rule, self.k, self.gamma0, self.gamma_sq, 0.0, 1.0)
            .expect("k >= 1 and h = 1 are valid");
        let record = TraceRecord {
            t: self.t,
            k_t: self.k,
            gamma_k: self.gamma(),
            h_t: f64::INFINITY,
            eta_t: 0.0,
            f_xt,
            grad_norm_sq: 0.0,
            s_t: self.s,
            gamma_sq: self.gamma_sq,
            dist_to_x1: self.x.distance(&self.x1),
            b_value,
        };
        self.t += 1;
        record
    }

    /// One deterministic iteration on `problem`.
    pub fn step(
        &mut self,
        problem: &Problem,
        scale: &StepScale,
        rule: ThresholdRule,
    ) -> Result<TraceRecord> {
        let (f_xt, g) = problem.evaluate(&self.x)?;
        self.step_with_gradient(f_xt, &g, scale, rule, problem.constraint())
    }
}

/// Runs `horizon` iterations of Free AdaGrad from `problem.x1()`.
pub fn run(
    problem: &Problem,
    scale: StepScale,
    rule: ThresholdRule,
    gamma0: f64,
    horizon: usize,
) -> Result<Run> {
    if horizon == 0 {
        return Err(invalid("horizon must be >= 1"));
    }
    let mut state = FreeState::new(problem.x1().clone(), gamma0)?;
    let mut mean = RunningMean::new(problem.dim());
    let mut records = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        mean.push(&state.x);
        records.push(state.step(problem, &scale, rule)?);
    }
    let (_, g_next) = problem.evaluate(&state.x)?;
    Ok(Run {
        records,
        s_next: state.s + g_next.norm_sq(),
        x_average: mean.mean().expect("horizon >= 1"),
        x_last: state.x,
    })
}
