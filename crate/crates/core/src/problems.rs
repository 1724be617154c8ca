//! Test objectives with exact subgradients, and seeded instance generation.
//!
//! All families except [`ExpSum`] are minimized at the origin with value 0.
//! [`ExpSum`] is convex but not globally Lipschitz, and has no closed-form
//! minimizer.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::problem::{Objective, Problem};
use crate::projection::Projection;
use crate::vector::Vector;

/// Generator used for every seeded draw in the crate.
pub const GENERATOR_NAME: &str = "ChaCha8Rng (rand_chacha 0.9)";

/// ChaCha stream ids, so the streams drawn from one seed never overlap.
pub const INIT_STREAM: u64 = 1;
pub const DATA_STREAM: u64 = 2;
pub const NOISE_STREAM: u64 = 3;

pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `sign` with `sign(0) = 0`.
pub(crate) fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `f(x) = ‖x‖₁`.
#[derive(Debug, Clone, Copy)]
pub struct NormL1 {
    dim: usize,
}

impl NormL1 {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Objective for NormL1 {
    fn value(&self, x: &Vector) -> f64 {
        x.as_slice().iter().map(|v| v.abs()).sum()
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        x.map(|_, v| sign(v))
    }

    /// The sign vector has Euclidean norm at most `√d`.
    fn lipschitz_bound(&self) -> Option<f64> {
        Some((self.dim as f64).sqrt())
    }
}

/// `f(x) = ‖x‖₂`.
#[derive(Debug, Clone, Copy)]
pub struct NormL2;

impl Objective for NormL2 {
    fn value(&self, x: &Vector) -> f64 {
        x.norm()
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        let n = x.norm();
        if n == 0.0 {
            Vector::zeros(x.dim())
        } else {
            x.map(|_, v| v / n)
        }
    }

    fn value_and_subgradient(&self, x: &Vector) -> (f64, Vector) {
        let n = x.norm();
        let g = if n == 0.0 { Vector::zeros(x.dim()) } else { x.map(|_, v| v / n) };
        (n, g)
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `f(x) = n⁻¹ Σᵢ |⟨aᵢ, x⟩|`.
#[derive(Debug, Clone)]
pub struct AbsLinear {
    /// Row-major `n × d`.
    rows: Vec<f64>,
    n: usize,
    dim: usize,
    mean_row_norm: f64,
    max_row_norm: f64,
}

impl AbsLinear {
    pub fn new(rows: Vec<Vector>) -> Result<Self> {
        let n = rows.len();
        let dim = rows.first().map(Vector::dim).ok_or_else(|| invalid("need at least one row"))?;
        if rows.iter().any(|r| r.dim() != dim) {
            return Err(invalid("rows have different dimensions"));
        }
        let norms: Vec<f64> = rows.iter().map(Vector::norm).collect();
        let mean_row_norm = norms.iter().sum::<f64>() / n as f64;
        let max_row_norm = norms.iter().copied().fold(0.0, f64::max);
        let rows = rows.into_iter().flat_map(Vector::into_inner).collect();
        Ok(Self { rows, n, dim, mean_row_norm, max_row_norm })
    }

    /// Rows drawn i.i.d. from the standard Gaussian on `ℝ^dim`.
    pub fn gaussian(n: usize, dim: usize, data_seed: u64) -> Result<Self> {
        if n == 0 || dim == 0 {
            return Err(invalid("n and dim must be >= 1"));
        }
        let mut rng = seeded_rng(data_seed, DATA_STREAM);
        let rows = (0..n)
            .map(|_| Vector::from_raw((0..dim).map(|_| rng.sample(StandardNormal)).collect()))
            .collect();
        Self::new(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    /// `maxᵢ ‖aᵢ‖`, the almost-sure bound of the row-sampling stochastic oracle.
    pub fn max_row_norm(&self) -> f64 {
        self.max_row_norm
    }

    fn dot_row(&self, i: usize, x: &[f64]) -> f64 {
        self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

impl Objective for AbsLinear {
    fn value(&self, x: &Vector) -> f64 {
        let x = x.as_slice();
        (0..self.n).map(|i| self.dot_row(i, x).abs()).sum::<f64>() / self.n as f64
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        self.value_and_subgradient(x).1
    }

    fn value_and_subgradient(&self, x: &Vector) -> (f64, Vector) {
        let xs = x.as_slice();
        let mut value = 0.0;
        let mut g = vec![0.0; self.dim];
        for i in 0..self.n {
            let u = self.dot_row(i, xs);
            value += u.abs();
            let s = sign(u);
            if s != 0.0 {
                for (gj, aj) in g.iter_mut().zip(self.row(i)) {
                    *gj += s * aj;
                }
            }
        }
        let inv_n = 1.0 / self.n as f64;
        g.iter_mut().for_each(|v| *v *= inv_n);
        (value * inv_n, Vector::from_raw(g))
    }

    /// `n⁻¹ Σᵢ ‖aᵢ‖`.
    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.mean_row_norm)
    }
}

/// `f(x) = Σᵢ exp(‖x − aᵢ‖ / σᵢ)`; convex, not globally Lipschitz.
#[derive(Debug, Clone)]
pub struct ExpSum {
    centers: Vec<Vector>,
    sigmas: Vec<f64>,
}

impl ExpSum {
    pub fn new(centers: Vec<Vector>, sigmas: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || centers.len() != sigmas.len() {
            return Err(invalid("need one sigma per center and at least one center"));
        }
        let dim = centers[0].dim();
        if centers.iter().any(|c| c.dim() != dim) {
            return Err(invalid("centers have different dimensions"));
        }
        if let Some(s) = sigmas.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(invalid(format!("sigmas must be positive, got {s}")));
        }
        Ok(Self { centers, sigmas })
    }

    pub fn centers(&self) -> &[Vector] {
        &self.centers
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }
}

impl Objective for ExpSum {
    fn value(&self, x: &Vector) -> f64 {
        self.centers
            .iter()
            .zip(&self.sigmas)
            .map(|(a, s)| (x.distance(a) / s).exp())
            .sum()
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        expsum_subgrad(x, &self.centers, &self.sigmas).expect("dimensions checked by Problem")
    }
}

/// `Σᵢ exp(‖x−aᵢ‖/σᵢ)·(x−aᵢ)/(σᵢ‖x−aᵢ‖)`, with the i-th term zero when `x = aᵢ`.
pub fn expsum_subgrad(x: &Vector, centers: &[Vector], sigmas: &[f64]) -> Result<Vector> {
    if centers.len() != sigmas.len() {
        return Err(invalid("need one sigma per center"));
    }
    let mut g = vec![0.0; x.dim()];
    for (a, &sigma) in centers.iter().zip(sigmas) {
        if a.dim() != x.dim() {
            return Err(invalid(format!(
                "dimension mismatch: center has {}, point has {}",
                a.dim(),
                x.dim()
            )));
        }
        let dist = x.distance(a);
        if dist == 0.0 {
            continue;
        }
        let coef = (dist / sigma).exp() / (sigma * dist);
        for ((gj, xj), aj) in g.iter_mut().zip(x.as_slice()).zip(a.as_slice()) {
            *gj += coef * (xj - aj);
        }
    }
    Ok(Vector::from_raw(g))
}

/// Which test objective to build.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `‖x‖_p`, `p ∈ {1, 2}`.
    NormP { p: u8 },
    AbsLinear { n: usize, data_seed: u64 },
    ExpSum { centers: Vec<Vector>, sigmas: Vec<f64> },
}

/// A reproducible problem instance: family, dimension and the seed for `x1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub family: Family,
    pub dim: usize,
    pub init_seed: u64,
}

impl ProblemSpec {
    pub fn norm(p: u8, dim: usize, init_seed: u64) -> Self {
        Self { family: Family::NormP { p }, dim, init_seed }
    }

    pub fn abs_linear(n: usize, dim: usize, data_seed: u64, init_seed: u64) -> Self {
        Self { family: Family::AbsLinear { n, data_seed }, dim, init_seed }
    }

    /// `n_centers` centers uniform on `[0, 1]^dim` and unit widths.
    pub fn expsum_default(dim: usize, n_centers: usize, seed: u64) -> Self {
        let mut rng = seeded_rng(seed, DATA_STREAM);
        let centers = (0..n_centers)
            .map(|_| Vector::from_raw((0..dim).map(|_| rng.random_range(0.0..1.0)).collect()))
            .collect();
        Self {
            family: Family::ExpSum { centers, sigmas: vec![1.0; n_centers] },
            dim,
            init_seed: seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        match &self.family {
            Family::NormP { p } if *p != 1 && *p != 2 => {
                Err(invalid(format!("p must be 1 or 2, got {p}")))
            }
            Family::AbsLinear { n, .. } if *n == 0 => Err(invalid("n must be >= 1")),
            Family::ExpSum { centers, .. } if centers.iter().any(|c| c.dim() != self.dim) => {
                Err(invalid("center dimension differs from dim"))
            }
            _ => Ok(()),
        }
    }

    fn objective(&self) -> Result<Arc<dyn Objective>> {
        self.validate()?;
        Ok(match &self.family {
            Family::NormP { p: 1 } => Arc::new(NormL1::new(self.dim)),
            Family::NormP { .. } => Arc::new(NormL2),
            Family::AbsLinear { n, data_seed } => {
                Arc::new(AbsLinear::gaussian(*n, self.dim, *data_seed)?)
            }
            Family::ExpSum { centers, sigmas } => {
                Arc::new(ExpSum::new(centers.clone(), sigmas.clone())?)
            }
        })
    }

    pub fn constraint(&self) -> Projection {
        match self.family {
            Family::ExpSum { .. } => Projection::NonnegativeOrthant,
            _ => Projection::WholeSpace,
        }
    }

    /// `x1` drawn uniformly on `[−1, 1]^dim`, then projected onto the constraint set.
    pub fn initial_point(&self) -> Result<Vector> {
        if self.dim == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        let mut rng = seeded_rng(self.init_seed, INIT_STREAM);
        let raw = Vector::from_raw((0..self.dim).map(|_| rng.random_range(-1.0..=1.0)).collect());
        self.constraint().project(&raw)
    }

    pub fn build(&self) -> Result<Problem> {
        let objective = self.objective()?;
        let problem = Problem::new(objective, self.constraint(), self.initial_point()?)?;
        match self.family {
            Family::ExpSum { .. } => Ok(problem),
            _ => problem.with_minimizer(Vector::zeros(self.dim), 0.0),
        }
    }

    pub fn lipschitz_bound(&self) -> Option<f64> {
        self.objective().ok()?.lipschitz_bound()
    }
}
