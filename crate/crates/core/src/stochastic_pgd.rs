//! Free AdaGrad with stochastic subgradients and a known Lipschitz constant.
//!
//! The scale is `h_t = L·√(T·ℓ_T(δ/(1+k_{t−1})²))`, computed once per iteration
//! from the previous phase, and the phase test uses the fixed budget `38·γ_k`.
//! Regret is always measured on the true objective held by the [`Problem`].

use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::error::{invalid, Result};
use crate::free_adagrad::{FreeState, ThresholdRule};
use crate::problem::{Objective, Problem};
use crate::problems::{seeded_rng, sign, AbsLinear, INIT_STREAM, NOISE_STREAM};
use crate::projection::Projection;
use crate::step_scales::StepScale;
use crate::trace::Run;
use crate::vector::{RunningMean, Vector};

/// Source of unbiased stochastic subgradients, bounded by `L` almost surely.
pub trait StochasticOracle: Send + Sync {
    fn sample_subgradient(&self, x: &Vector, rng: &mut dyn RngCore) -> Vector;

    fn lipschitz(&self) -> f64;
}

/// Wraps a deterministic objective as a zero-noise oracle.
pub struct ExactOracle {
    objective: Arc<dyn Objective>,
    lipschitz: f64,
}

impl ExactOracle {
    pub fn new(objective: Arc<dyn Objective>, lipschitz: f64) -> Self {
        Self { objective, lipschitz }
    }
}

impl StochasticOracle for ExactOracle {
    fn sample_subgradient(&self, x: &Vector, _rng: &mut dyn RngCore) -> Vector {
        self.objective.subgradient(x)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Samples one row `aᵢ` uniformly and returns `aᵢ·sign(⟨aᵢ, x⟩)`.
pub struct RowSamplingOracle {
    data: Arc<AbsLinear>,
}

impl RowSamplingOracle {
    pub fn new(data: Arc<AbsLinear>) -> Self {
        Self { data }
    }
}

impl StochasticOracle for RowSamplingOracle {
    fn sample_subgradient(&self, x: &Vector, rng: &mut dyn RngCore) -> Vector {
        let i = rng.random_range(0..self.data.n());
        let row = self.data.row(i);
        let u: f64 = row.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum();
        let s = sign(u);
        Vector::from_raw(row.iter().map(|a| s * a).collect())
    }

    fn lipschitz(&self) -> f64 {
        self.data.max_row_norm()
    }
}

/// `f(x) = E|⟨a, x⟩ − ξ|` with `ξ ~ U[−σ, σ]`.
///
/// With `u = ⟨a, x⟩`: `f = (u² + σ²)/(2σ)` for `|u| ≤ σ` and `|u|` otherwise, so
/// `f* = σ/2` on the hyperplane `⟨a, x⟩ = 0`. The sampled subgradient
/// `a·sign(u − ξ)` is bounded by `‖a‖`.
#[derive(Debug, Clone)]
pub struct NoisySign {
    a: Vector,
    sigma: f64,
}

impl NoisySign {
    pub fn new(a: Vector, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid(format!("sigma must be positive, got {sigma}")));
        }
        if a.norm_sq() == 0.0 {
            return Err(invalid("direction a must be nonzero"));
        }
        Ok(Self { a, sigma })
    }

    /// Unit-norm Gaussian direction drawn from `seed`.
    pub fn random(dim: usize, sigma: f64, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        let mut rng = seeded_rng(seed, crate::problems::DATA_STREAM);
        let z = Vector::from_raw(
            (0..dim).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect(),
        );
        let n = z.norm();
        Self::new(z.scaled(1.0 / n), sigma)
    }

    pub fn direction(&self) -> &Vector {
        &self.a
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The minimizer closest to `x`: its projection onto `⟨a, ·⟩ = 0`.
    pub fn nearest_minimizer(&self, x: &Vector) -> Vector {
        x.sub_scaled(self.a.dot(x) / self.a.norm_sq(), &self.a)
    }

    pub fn f_star(&self) -> f64 {
        self.sigma / 2.0
    }

    /// Problem on `ℝ^d` with `x1 ~ U[−spread, spread]^d` and the nearest minimizer attached.
    pub fn problem(&self, spread: f64, init_seed: u64) -> Result<Problem> {
        if !(spread.is_finite() && spread > 0.0) {
            return Err(invalid("spread must be positive"));
        }
        let mut rng = seeded_rng(init_seed, INIT_STREAM);
        let x1 = Vector::new((0..self.a.dim()).map(|_| rng.random_range(-spread..=spread)).collect())?;
        let x_star = self.nearest_minimizer(&x1);
        Problem::new(Arc::new(self.clone()), Projection::WholeSpace, x1)?
            .with_minimizer(x_star, self.f_star())
    }
}

impl Objective for NoisySign {
    fn value(&self, x: &Vector) -> f64 {
        let u = self.a.dot(x);
        if u.abs() <= self.sigma {
            (u * u + self.sigma * self.sigma) / (2.0 * self.sigma)
        } else {
            u.abs()
        }
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        let u = self.a.dot(x);
        let c = if u.abs() <= self.sigma { u / self.sigma } else { sign(u) };
        self.a.scaled(c)
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.a.norm())
    }
}

impl StochasticOracle for NoisySign {
    fn sample_subgradient(&self, x: &Vector, rng: &mut dyn RngCore) -> Vector {
        let xi = rng.random_range(-self.sigma..=self.sigma);
        self.a.scaled(sign(self.a.dot(x) - xi))
    }

    fn lipschitz(&self) -> f64 {
        self.a.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticConfig {
    pub gamma0: f64,
    pub lipschitz: f64,
    pub horizon: usize,
    pub delta: f64,
}

impl StochasticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0.is_finite() && self.gamma0 > 0.0) {
            return Err(invalid("gamma0 must be positive"));
        }
        if !(self.lipschitz.is_finite() && self.lipschitz > 0.0) {
            return Err(invalid("L must be positive"));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon must be >= 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    pub fn scale(&self) -> StepScale {
        StepScale::StochasticLT { lipschitz: self.lipschitz, horizon: self.horizon, delta: self.delta }
    }
}

/// Runs the stochastic variant for `config.horizon` iterations.
///
/// Noise is drawn from a ChaCha stream seeded by `seed`; equal seeds give
/// identical runs.
pub fn run_stochastic(
    problem: &Problem,
    oracle: &dyn StochasticOracle,
    config: &StochasticConfig,
    seed: u64,
) -> Result<Run> {
    config.validate()?;
    let mut rng = seeded_rng(seed, NOISE_STREAM);
    let scale = config.scale();
    let bound = config.lipschitz * (1.0 + 1e-12);
    let mut state = FreeState::new(problem.x1().clone(), config.gamma0)?;
    let mut mean = RunningMean::new(problem.dim());
    let mut records = Vec::with_capacity(config.horizon);

    let sample = |x: &Vector, rng: &mut dyn RngCore| -> Result<Vector> {
        let g = oracle.sample_subgradient(x, rng);
        if g.dim() != x.dim() {
            return Err(invalid("oracle returned a vector of the wrong dimension"));
        }
        if g.norm() > bound {
            return Err(invalid(format!(
                "oracle sample has norm {} above L = {}",
                g.norm(),
                config.lipschitz
            )));
        }
        Ok(g)
    };

    for _ in 0..config.horizon {
        mean.push(&state.x);
        let f_xt = problem.objective().value(&state.x);
        let g = sample(&state.x, &mut rng)?;
        records.push(state.step_with_gradient(
            f_xt,
            &g,
            &scale,
            ThresholdRule::StochasticB,
            problem.constraint(),
        )?);
    }
    let g_next = sample(&state.x, &mut rng)?;
    Ok(Run {
        records,
        s_next: state.s + g_next.norm_sq(),
        x_average: mean.mean().expect("horizon >= 1"),
        x_last: state.x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::NormL1;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    // Iteration 1 on f = |x| with zero noise, L = 1, T = 4, δ = 0.5, γ₀ = 1, x1 = 0.5.
    // ℓ₄(0.5/4) = ln 24, h = √(4 ln 24); decimals from a 40-digit mpmath evaluation.
    #[test]
    fn first_iteration_hand_trace() {
        let objective = Arc::new(NormL1::new(1));
        let problem = Problem::new(objective.clone(), Projection::WholeSpace, v(&[0.5])).unwrap();
        let oracle = ExactOracle::new(objective, 1.0);
        let config = StochasticConfig { gamma0: 1.0, lipschitz: 1.0, horizon: 4, delta: 0.5 };
        let run = run_stochastic(&problem, &oracle, &config, 0).unwrap();
        let r = &run.records[0];
        assert!((r.h_t - 3.565_419_375_247_711_7).abs() < 1e-14);
        assert_eq!(r.k_t, 1);
        assert_eq!(r.b_value, 76.0);
        assert!((r.dist_to_x1 - 0.560_943_830_025_899_2).abs() < 1e-14);
    }

    // Zero noise and no doubling: identical to deterministic PGD with constant h.
    #[test]
    fn zero_noise_reduces_to_constant_step_pgd() {
        let objective = Arc::new(NormL1::new(3));
        let x1 = v(&[0.7, -0.2, 0.4]);
        let problem = Problem::new(objective.clone(), Projection::WholeSpace, x1.clone()).unwrap();
        let oracle = ExactOracle::new(objective.clone(), 3f64.sqrt());
        let config = StochasticConfig { gamma0: 1.0, lipschitz: 3f64.sqrt(), horizon: 50, delta: 0.1 };
        let run = run_stochastic(&problem, &oracle, &config, 0).unwrap();
        assert!(run.records.iter().all(|r| r.k_t == 1));
        let h = crate::step_scales::h_stochastic(3f64.sqrt(), 50, 0.1, 1).unwrap();
        let mut x = x1;
        for r in &run.records {
            assert_eq!(r.f_xt, objective.value(&x));
            x = x.sub_scaled(2.0 / h, &objective.subgradient(&x));
        }
        assert_eq!(run.x_last, x);
    }

    #[test]
    fn huge_gamma0_never_doubles() {
        let ns = NoisySign::random(20, 1.0, 3).unwrap();
        for seed in 0..20 {
            let problem = ns.problem(10.0, seed).unwrap();
            let config = StochasticConfig { gamma0: 1e6, lipschitz: 1.0, horizon: 500, delta: 0.1 };
            let run = run_stochastic(&problem, &ns, &config, seed).unwrap();
            assert!(run.records.iter().all(|r| r.k_t == 1 && r.dist_to_x1 <= r.b_value));
        }
    }

    #[test]
    fn runs_are_reproducible_per_seed() {
        let ns = NoisySign::random(5, 1.0, 1).unwrap();
        let problem = ns.problem(0.5, 2).unwrap();
        let config = StochasticConfig { gamma0: 1.0, lipschitz: 1.0, horizon: 200, delta: 0.1 };
        let a = run_stochastic(&problem, &ns, &config, 7).unwrap();
        let b = run_stochastic(&problem, &ns, &config, 7).unwrap();
        let c = run_stochastic(&problem, &ns, &config, 8).unwrap();
        assert_eq!(a.records, b.records);
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn scale_is_constant_within_a_phase() {
        let ns = NoisySign::random(5, 1.0, 1).unwrap();
        let problem = ns.problem(20.0, 2).unwrap();
        let config = StochasticConfig { gamma0: 1e-3, lipschitz: 1.0, horizon: 2000, delta: 0.1 };
        let run = run_stochastic(&problem, &ns, &config, 1).unwrap();
        // h at t+1 is determined by k_t alone.
        for w in run.records.windows(2) {
            assert!(w[1].h_t >= w[0].h_t);
            assert_eq!(w[1].h_t, crate::step_scales::h_stochastic(1.0, 2000, 0.1, w[0].k_t).unwrap());
        }
    }

    #[test]
    fn noisy_sign_closed_form() {
        let ns = NoisySign::new(v(&[1.0, 0.0]), 2.0).unwrap();
        assert_eq!(ns.value(&v(&[0.0, 5.0])), 1.0);
        assert_eq!(ns.value(&v(&[1.0, 0.0])), 1.25);
        assert_eq!(ns.value(&v(&[3.0, 0.0])), 3.0);
        assert_eq!(ns.subgradient(&v(&[1.0, 0.0])), v(&[0.5, 0.0]));
        assert_eq!(ns.subgradient(&v(&[-3.0, 0.0])), v(&[-1.0, 0.0]));
        assert_eq!(ns.nearest_minimizer(&v(&[4.0, 1.0])), v(&[0.0, 1.0]));
    }

    #[test]
    fn noisy_sign_samples_are_unbiased_and_bounded() {
        let ns = NoisySign::random(3, 1.0, 5).unwrap();
        let x = v(&[0.3, -0.1, 0.2]);
        let truth = ns.subgradient(&x);
        let n = 100_000;
        let mut rng = seeded_rng(42, NOISE_STREAM);
        let mut sum = [0.0; 3];
        let mut sum_sq = [0.0; 3];
        for _ in 0..n {
            let g = ns.sample_subgradient(&x, &mut rng);
            assert!(g.norm() <= ns.lipschitz() * (1.0 + 1e-12));
            for j in 0..3 {
                sum[j] += g[j];
                sum_sq[j] += g[j] * g[j];
            }
        }
        for j in 0..3 {
            let mean = sum[j] / n as f64;
            let var = sum_sq[j] / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            assert!((mean - truth[j]).abs() <= 5.0 * se, "coord {j}: {mean} vs {}", truth[j]);
        }
    }

    #[test]
    fn config_validation() {
        let ok = StochasticConfig { gamma0: 1.0, lipschitz: 1.0, horizon: 10, delta: 0.1 };
        assert!(ok.validate().is_ok());
        assert!(StochasticConfig { delta: 1.0, ..ok }.validate().is_err());
        assert!(StochasticConfig { horizon: 0, ..ok }.validate().is_err());
        assert!(StochasticConfig { lipschitz: 0.0, ..ok }.validate().is_err());
    }

    #[test]
    fn oracle_exceeding_its_bound_is_rejected() {
        let objective = Arc::new(NormL1::new(2));
        let problem = Problem::new(objective.clone(), Projection::WholeSpace, v(&[1.0, 1.0])).unwrap();
        let oracle = ExactOracle::new(objective, 1.0);
        let config = StochasticConfig { gamma0: 1.0, lipschitz: 1.0, horizon: 3, delta: 0.1 };
        assert!(run_stochastic(&problem, &oracle, &config, 0).is_err());
    }
}
