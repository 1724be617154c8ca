//! Regret measurement, phase indices and the closed-form regret bounds.
//!
//! All bounds take `D = ‖x1 − x*‖` and work with `D_γ₀ = max(D, γ₀)`. Sums
//! `S_T` and `S_{T+1}` are passed separately; for a finished [`Run`] they are
//! `run.s_final()` and `run.s_next`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::free_adagrad::gamma_k;
use crate::step_scales::{ell_t, h_main, StepScale};
use crate::trace::{Run, TraceRecord};

/// Additive slack used when certifying inequalities in floating point.
pub const CERT_SLACK: f64 = 1e-9;

/// `Σ_t (f(x_t) − f*)`.
pub fn cumulative_regret(trace: &[TraceRecord], f_star: f64) -> Result<f64> {
    Ok(regret_curve(trace, f_star)?.last().copied().unwrap_or(0.0))
}

/// Running regret `R_1, …, R_T`.
pub fn regret_curve(trace: &[TraceRecord], f_star: f64) -> Result<Vec<f64>> {
    if trace.is_empty() {
        return Err(invalid("empty trace"));
    }
    let min = trace.iter().map(|r| r.f_xt).fold(f64::INFINITY, f64::min);
    if !(f_star <= min + 1e-9) {
        return Err(invalid(format!("f_star = {f_star} exceeds the smallest recorded value {min}")));
    }
    let mut acc = 0.0;
    Ok(trace
        .iter()
        .map(|r| {
            acc += r.f_xt - f_star;
            acc
        })
        .collect())
}

/// `D_γ₀ = max(D, γ₀)`.
pub fn d_gamma0(d: f64, gamma0: f64) -> f64 {
    d.max(gamma0)
}

/// Smallest `k ≥ 1` with `γ₀·2^{k−1} ≤ D_γ₀ ≤ γ₀·2^k`.
pub fn k_star(gamma0: f64, d: f64) -> Result<u32> {
    positive("gamma0", gamma0)?;
    if !(d.is_finite() && d >= 0.0) {
        return Err(invalid(format!("D must be finite and >= 0, got {d}")));
    }
    let dg = d_gamma0(d, gamma0);
    let mut k = 1;
    while gamma_k(gamma0, k) < dg {
        k += 1;
    }
    Ok(k)
}

/// Smallest `k ≥ 1` with `2^k/√k ≥ 2^{k*}`.
///
/// For `k < k*` the left side is below `2^{k*}`, and for `k ≥ k*` the test is
/// `4^{k−k*} ≥ k`, which is evaluated exactly in integers.
pub fn k_bar(k_star: u32) -> Result<u32> {
    if k_star == 0 {
        return Err(invalid("k* must be >= 1"));
    }
    let mut k = k_star;
    loop {
        let shift = 2 * (k - k_star);
        if shift >= 64 || (1u64 << shift) >= u64::from(k) {
            return Ok(k);
        }
        k += 1;
    }
}

/// `k̄ ≤ k* + ½log₂k* + 5/4`, and `k̄ = 1` when `k* = 1`.
pub fn k_bar_within_bound(k_star: u32) -> Result<bool> {
    let kb = k_bar(k_star)?;
    let ks = f64::from(k_star);
    Ok(f64::from(kb) <= ks + 0.5 * ks.log2() + 1.25 && (k_star != 1 || kb == 1))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn sums(s_t: f64, s_t1: f64) -> Result<()> {
    if !(s_t.is_finite() && s_t >= 0.0 && s_t1.is_finite() && s_t1 >= s_t) {
        return Err(invalid(format!("need 0 <= S_T <= S_T+1, got {s_t}, {s_t1}")));
    }
    Ok(())
}

/// `log₂(2·D_γ₀/γ₀)`, which is at least 1.
fn log_ratio(d: f64, gamma0: f64) -> Result<f64> {
    positive("gamma0", gamma0)?;
    if !(d.is_finite() && d >= 0.0) {
        return Err(invalid(format!("D must be finite and >= 0, got {d}")));
    }
    Ok((2.0 * d_gamma0(d, gamma0) / gamma0).log2())
}

/// Bound for the `MainH` scale:
/// `D_γ₀·H(S_{T+1})·√log₂(2D_γ₀/γ₀)·[6·ln ln(e(1+S_T)) + 6.5]`.
pub fn bound_cor_main(d: f64, gamma0: f64, s_t: f64, s_t1: f64) -> Result<f64> {
    sums(s_t, s_t1)?;
    let lr = log_ratio(d, gamma0)?;
    let loglog = (1.0 + s_t.ln_1p()).ln();
    Ok(d_gamma0(d, gamma0) * h_main(s_t1)? * lr.sqrt() * (6.0 * loglog + 6.5))
}

/// Bound for the `SqrtS` scale:
/// `D_γ₀·√(S_{T+1}·log₂(2D_γ₀/γ₀))·[6·ln(e·S_T/‖g₁‖²) + 6.5]`.
pub fn bound_cor_sqrt(d: f64, gamma0: f64, s_t: f64, s_t1: f64, g1_norm_sq: f64) -> Result<f64> {
    sums(s_t, s_t1)?;
    if g1_norm_sq == 0.0 {
        return Err(Error::UndefinedScale("bound needs a nonzero first subgradient".into()));
    }
    positive("|g1|^2", g1_norm_sq)?;
    let lr = log_ratio(d, gamma0)?;
    let log = 1.0 + (s_t / g1_norm_sq).ln();
    Ok(d_gamma0(d, gamma0) * (s_t1 * lr).sqrt() * (6.0 * log + 6.5))
}

/// Bound for the `SqrtEpsS` scale:
/// `D_γ₀·√((S_{T+1}+ε)·log₂(2D_γ₀/γ₀))·[6·ln(1 + S_T/ε) + 6.5]`.
pub fn bound_cor_eps(d: f64, gamma0: f64, s_t: f64, s_t1: f64, epsilon: f64) -> Result<f64> {
    sums(s_t, s_t1)?;
    positive("epsilon", epsilon)?;
    let lr = log_ratio(d, gamma0)?;
    Ok(d_gamma0(d, gamma0) * ((s_t1 + epsilon) * lr).sqrt() * (6.0 * (s_t / epsilon).ln_1p() + 6.5))
}

/// Warm-up bounds with `h = L√T`.
///
/// Improved threshold: `10·D_γ₀·L√T·√(2log₂(2D_γ₀/γ₀))`.
/// Simple threshold: `3·dist·L√T·log₂(2D_γ₀/γ₀) + 2·D_γ₀·L√T` with `dist = ‖x1 − x*‖`.
pub fn bound_warmup(d: f64, gamma0: f64, lipschitz: f64, horizon: usize, simple: bool, dist: f64) -> Result<f64> {
    positive("L", lipschitz)?;
    if horizon == 0 {
        return Err(invalid("horizon must be >= 1"));
    }
    let lr = log_ratio(d, gamma0)?;
    let dg = d_gamma0(d, gamma0);
    let lt = lipschitz * (horizon as f64).sqrt();
    if simple {
        if !(dist.is_finite() && dist >= 0.0) {
            return Err(invalid("dist must be finite and >= 0"));
        }
        Ok(3.0 * dist * lt * lr + 2.0 * dg * lt)
    } else {
        Ok(10.0 * dg * lt * (2.0 * lr).sqrt())
    }
}

/// High-probability bound of the stochastic variant:
/// `3500·D_γ₀·L√T·log₂(2D_γ₀/γ₀)·√ℓ_T(δ/log₂²(4D_γ₀/γ₀))`.
pub fn bound_stochastic(d: f64, gamma0: f64, lipschitz: f64, horizon: usize, delta: f64) -> Result<f64> {
    positive("L", lipschitz)?;
    let lr = log_ratio(d, gamma0)?;
    let dg = d_gamma0(d, gamma0);
    let l4 = (4.0 * dg / gamma0).log2();
    let ell = ell_t(horizon, delta / (l4 * l4))?;
    Ok(3500.0 * dg * lipschitz * (horizon as f64).sqrt() * lr * ell.sqrt())
}

/// The per-run inequality that holds for any nondecreasing `h_t`:
/// `h_{T+1}·[2·dist·√k_T·(2 + √(⅓Σ‖g_t‖²/h_t²)) + γ_{k_T}·Σ‖g_t‖²/h_t²]`.
///
/// `h_{T+1}` is taken from `scale` at `S_{T+1} = run.s_next` with phase `k_T`.
pub fn any_h_regret_bound(dist: f64, run: &Run, scale: &StepScale) -> Result<f64> {
    let last = run.records.last().ok_or_else(|| invalid("empty run"))?;
    let k = last.k_t;
    let h_next = scale.h(run.s_next, k)?;
    let sum = run.normalized_grad_sum();
    let sk = f64::from(k).sqrt();
    Ok(h_next * (2.0 * dist * sk * (2.0 + (sum / 3.0).sqrt()) + last.gamma_k * sum))
}

/// Checks `√k_T ≤ √2·√(log₂(D_γ₀/γ₀)+1)` and `γ_{k_T} ≤ 5·D_γ₀·√(log₂(D_γ₀/γ₀)+1)`.
pub fn check_phase_growth(d: f64, gamma0: f64, k_t: u32) -> Result<()> {
    positive("gamma0", gamma0)?;
    let dg = d_gamma0(d, gamma0);
    let base = (dg / gamma0).log2() + 1.0;
    let lhs = f64::from(k_t).sqrt();
    let rhs = 2f64.sqrt() * base.sqrt();
    if lhs > rhs + CERT_SLACK {
        return Err(Error::PropertyFailure { name: "sqrt_k_growth", lhs, rhs });
    }
    let lhs = gamma_k(gamma0, k_t);
    let rhs = 5.0 * dg * base.sqrt();
    if lhs > rhs + CERT_SLACK {
        return Err(Error::PropertyFailure { name: "gamma_k_growth", lhs, rhs });
    }
    Ok(())
}

/// Both sides of one certified inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequality {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + CERT_SLACK
    }
}

/// Evaluates the five summation inequalities for the partial sums `S_t = a_1 + … + a_t`.
///
/// Terms with `a_t = 0` contribute zero even when `S_t = 0`. The `sums3` check
/// (`Σa_t/S_t ≤ 1 + ln(S_T/S_1)`) needs `a_1 > 0` and is omitted otherwise.
pub fn check_aux_sums(a: &[f64], epsilon: f64) -> Result<Vec<Inequality>> {
    if a.is_empty() {
        return Err(invalid("sequence must be nonempty"));
    }
    if a.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("entries must be finite and >= 0"));
    }
    positive("epsilon", epsilon)?;

    let term = |a: f64, denom: f64| if a == 0.0 { 0.0 } else { a / denom };
    let mut s = 0.0;
    let (mut l1, mut l2a, mut l2b, mut l3, mut l4) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &at in a {
        s += at;
        let log_e = 1.0 + s.ln_1p();
        l1 += term(at, s.sqrt());
        l2a += term(at, ((s + 1.0) * log_e).sqrt());
        l2b += term(at, (s + 1.0) * log_e);
        l3 += term(at, s);
        l4 += term(at, epsilon + s);
    }
    let s_t = s;
    let mut out = vec![
        Inequality { name: "sums", lhs: l1, rhs: 2.0 * s_t.sqrt() },
        Inequality { name: "sums2_sqrt", lhs: l2a, rhs: 2.0 * s_t.sqrt() },
        Inequality { name: "sums2_log", lhs: l2b, rhs: (1.0 + s_t.ln_1p()).ln() },
    ];
    if a[0] > 0.0 {
        out.push(Inequality { name: "sums3", lhs: l3, rhs: 1.0 + (s_t / a[0]).ln() });
    }
    out.push(Inequality { name: "sums4", lhs: l4, rhs: (s_t / epsilon).ln_1p() });

    if let Some(bad) = out.iter().find(|i| !i.holds()) {
        return Err(Error::PropertyFailure { name: bad.name, lhs: bad.lhs, rhs: bad.rhs });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundKind {
    CorMain,
    CorSqrt,
    CorEps,
    WarmupImproved,
    WarmupSimple,
    Stochastic,
}

impl BoundKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::CorMain => "cor_main",
            BoundKind::CorSqrt => "cor_sqrt",
            BoundKind::CorEps => "cor_eps",
            BoundKind::WarmupImproved => "warmup_improved",
            BoundKind::WarmupSimple => "warmup_simple",
            BoundKind::Stochastic => "stochastic",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What is known about a run; optional fields enable the corresponding bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    /// `‖x1 − x*‖`.
    pub dist: f64,
    pub gamma0: f64,
    pub s_t: f64,
    pub s_t1: f64,
    pub g1_norm_sq: f64,
    pub epsilon: Option<f64>,
    pub lipschitz: Option<f64>,
    pub horizon: usize,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub d_gamma0: f64,
    pub k_star: u32,
    pub k_bar: u32,
    pub s_t: f64,
    pub s_t1: f64,
    pub bounds: BTreeMap<BoundKind, f64>,
}

impl BoundReport {
    pub fn compute(inp: &BoundInputs) -> Result<Self> {
        let d = inp.dist;
        let g0 = inp.gamma0;
        let ks = k_star(g0, d)?;
        let mut bounds = BTreeMap::new();
        bounds.insert(BoundKind::CorMain, bound_cor_main(d, g0, inp.s_t, inp.s_t1)?);
        if inp.g1_norm_sq > 0.0 {
            bounds.insert(BoundKind::CorSqrt, bound_cor_sqrt(d, g0, inp.s_t, inp.s_t1, inp.g1_norm_sq)?);
        }
        if let Some(eps) = inp.epsilon {
            bounds.insert(BoundKind::CorEps, bound_cor_eps(d, g0, inp.s_t, inp.s_t1, eps)?);
        }
        if let Some(l) = inp.lipschitz {
            let t = inp.horizon;
            bounds.insert(BoundKind::WarmupImproved, bound_warmup(d, g0, l, t, false, d)?);
            bounds.insert(BoundKind::WarmupSimple, bound_warmup(d, g0, l, t, true, d)?);
            if let Some(delta) = inp.delta {
                bounds.insert(BoundKind::Stochastic, bound_stochastic(d, g0, l, t, delta)?);
            }
        }
        Ok(Self {
            d_gamma0: d_gamma0(d, g0),
            k_star: ks,
            k_bar: k_bar(ks)?,
            s_t: inp.s_t,
            s_t1: inp.s_t1,
            bounds,
        })
    }

    pub fn get(&self, kind: BoundKind) -> Option<f64> {
        self.bounds.get(&kind).copied()
    }
}
