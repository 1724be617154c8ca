//! Fixtures shared by the criterion benchmarks.

use freegrad_core::problems::ProblemSpec;
use freegrad_core::{Problem, Projection, Vector};

/// The full-size averaged-absolute-value instance (`n = 1000`, `d = 625`).
pub fn full_size_abslinear() -> Problem {
    ProblemSpec::abs_linear(1000, 625, 0, 0).build().expect("valid spec")
}

pub fn norm1(dim: usize) -> Problem {
    ProblemSpec::norm(1, dim, 0).build().expect("valid spec")
}

/// A point with entries alternating in sign and growing in magnitude.
pub fn probe_point(dim: usize) -> Vector {
    Vector::new((0..dim).map(|i| if i % 2 == 0 { 1.0 + i as f64 } else { -(i as f64) }).collect())
        .expect("finite, nonempty")
}

/// One projection of each kind in `dim` dimensions.
pub fn projections(dim: usize) -> Vec<(&'static str, Projection)> {
    let zeros = Vector::zeros(dim);
    let ones = Vector::new(vec![1.0; dim]).expect("finite");
    let lower = Vector::new(vec![-1.0; dim]).expect("finite");
    vec![
        ("whole_space", Projection::WholeSpace),
        ("orthant", Projection::NonnegativeOrthant),
        ("box", Projection::boxed(lower, ones).expect("lower <= upper")),
        ("ball", Projection::ball(zeros, 1.0).expect("positive radius")),
    ]
}
