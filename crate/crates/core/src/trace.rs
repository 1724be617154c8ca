//! Per-iteration trace records and finished runs.

use crate::vector::Vector;

/// One row per iteration `t`.
///
/// `f_xt` and `grad_norm_sq` are measured at `x_t`; `s_t` and `gamma_sq` are the
/// running sums after iteration `t` has been folded in; `dist_to_x1` is
/// `‖x_{t+1} − x1‖` for the accepted step and `b_value` the threshold it passed.
/// Baselines have no threshold and report `b_value = +∞`. Iterations that take
/// no step because the scale is undefined report `h_t = +∞` and `eta_t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub k_t: u32,
    pub gamma_k: f64,
    pub h_t: f64,
    pub eta_t: f64,
    pub f_xt: f64,
    pub grad_norm_sq: f64,
    pub s_t: f64,
    pub gamma_sq: f64,
    pub dist_to_x1: f64,
    pub b_value: f64,
}

impl TraceRecord {
    /// `‖g_t‖² / h_t²`, zero for skipped iterations.
    pub fn normalized_grad_sq(&self) -> f64 {
        if self.h_t.is_finite() {
            self.grad_norm_sq / (self.h_t * self.h_t)
        } else {
            0.0
        }
    }
}

/// The output of a finished optimizer run.
#[derive(Debug, Clone)]
pub struct Run {
    pub records: Vec<TraceRecord>,
    /// `x_{T+1}`.
    pub x_last: Vector,
    /// `(x_1 + … + x_T) / T`.
    pub x_average: Vector,
    /// `S_{T+1} = S_T + ‖g_{T+1}‖²`, from one extra subgradient drawn at `x_{T+1}`.
    pub s_next: f64,
}

impl Run {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    /// `k_T`, the phase index of the last iteration.
    pub fn final_phase(&self) -> u32 {
        self.records.last().map_or(1, |r| r.k_t)
    }

    pub fn s_final(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.s_t)
    }

    /// `Σ_t ‖g_t‖² / h_t²` over the whole run.
    pub fn normalized_grad_sum(&self) -> f64 {
        self.records.iter().map(TraceRecord::normalized_grad_sq).sum()
    }

    /// Indices `t` (1-based) at which `eta_t > eta_{t−1}`.
    pub fn step_size_jumps(&self) -> Vec<usize> {
        self.records
            .windows(2)
            .filter(|w| w[1].eta_t > w[0].eta_t)
            .map(|w| w[1].t)
            .collect()
    }
}
