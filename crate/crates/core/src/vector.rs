//! Dense real vectors with finite entries.

use std::ops::Index;

use crate::error::{invalid, Result};

/// A non-empty vector of finite `f64` entries.
///
/// Construction rejects NaN/Inf and empty input. Arithmetic helpers return
/// new vectors; callers that need the finiteness guarantee after arithmetic
/// check [`Vector::is_finite`] (the optimizers do so after every step).
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("vector must have dimension >= 1"));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("entry {i} is not finite ({})", entries[i])));
        }
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector must have dimension >= 1");
        Self(vec![0.0; dim])
    }

    /// Wraps entries produced by internal arithmetic without re-validating.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `self − scale · direction`.
    pub fn sub_scaled(&self, scale: f64, direction: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), direction.dim());
        Vector::from_raw(
            self.0
                .iter()
                .zip(&direction.0)
                .map(|(x, g)| x - scale * g)
                .collect(),
        )
    }

    pub fn scaled(&self, scale: f64) -> Vector {
        Vector::from_raw(self.0.iter().map(|v| v * scale).collect())
    }

    /// In-place `self += other`.
    pub fn add_assign(&mut self, other: &Vector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub(crate) fn map(&self, f: impl Fn(usize, f64) -> f64) -> Vector {
        Vector::from_raw(self.0.iter().enumerate().map(|(i, &v)| f(i, v)).collect())
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = crate::Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

/// Running mean of a vector sequence (online-to-batch averaging).
#[derive(Debug, Clone)]
pub struct RunningMean {
    sum: Vec<f64>,
    count: usize,
}

impl RunningMean {
    pub fn new(dim: usize) -> Self {
        Self { sum: vec![0.0; dim], count: 0 }
    }

    pub fn push(&mut self, x: &Vector) {
        for (s, v) in self.sum.iter_mut().zip(x.as_slice()) {
            *s += v;
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// The current mean, or `None` before the first push.
    pub fn mean(&self) -> Option<Vector> {
        (self.count > 0).then(|| {
            let n = self.count as f64;
            Vector::from_raw(self.sum.iter().map(|s| s / n).collect())
        })
    }
}
