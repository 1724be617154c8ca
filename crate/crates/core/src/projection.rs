//! Euclidean projections onto the closed convex sets with closed-form projectors.

use crate::error::{invalid, Result};
use crate::vector::Vector;

/// A closed convex constraint set together with its Euclidean projector.
#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    /// `ℝ^d`; projection is the identity.
    WholeSpace,
    /// `[0, ∞)^d`.
    NonnegativeOrthant,
    /// `{x : lower ≤ x ≤ upper}` componentwise.
    Box { lower: Vector, upper: Vector },
    /// `{x : ‖x − center‖ ≤ radius}`.
    Ball { center: Vector, radius: f64 },
}

impl Projection {
    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        let p = Projection::Box { lower, upper };
        p.validate(None)?;
        Ok(p)
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        let p = Projection::Ball { center, radius };
        p.validate(None)?;
        Ok(p)
    }

    /// Checks the set parameters, and the dimension of `x` when given.
    fn validate(&self, dim: Option<usize>) -> Result<()> {
        match self {
            Projection::WholeSpace | Projection::NonnegativeOrthant => Ok(()),
            Projection::Box { lower, upper } => {
                if lower.dim() != upper.dim() {
                    return Err(invalid("box bounds have different dimensions"));
                }
                if let Some(i) = (0..lower.dim()).find(|&i| lower[i] > upper[i]) {
                    return Err(invalid(format!(
                        "box lower bound exceeds upper bound at coordinate {i} ({} > {})",
                        lower[i], upper[i]
                    )));
                }
                match dim {
                    Some(d) if d != lower.dim() => Err(invalid(format!(
                        "dimension mismatch: box has {}, point has {d}",
                        lower.dim()
                    ))),
                    _ => Ok(()),
                }
            }
            Projection::Ball { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(invalid(format!("ball radius must be positive, got {radius}")));
                }
                match dim {
                    Some(d) if d != center.dim() => Err(invalid(format!(
                        "dimension mismatch: ball has {}, point has {d}",
                        center.dim()
                    ))),
                    _ => Ok(()),
                }
            }
        }
    }

    /// The Euclidean-nearest point of the set to `x`.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        self.validate(Some(x.dim()))?;
        Ok(match self {
            Projection::WholeSpace => x.clone(),
            Projection::NonnegativeOrthant => x.map(|_, v| v.max(0.0)),
            Projection::Box { lower, upper } => Vector::from_raw(
                x.as_slice()
                    .iter()
                    .zip(lower.as_slice().iter().zip(upper.as_slice()))
                    .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
                    .collect(),
            ),
            Projection::Ball { center, radius } => {
                let dist = x.distance(center);
                if dist <= *radius {
                    x.clone()
                } else {
                    let c = center.as_slice();
                    Vector::from_raw(
                        x.as_slice().iter().zip(c).map(|(v, ci)| ci + (v - ci) * radius / dist).collect(),
                    )
                }
            }
        })
    }

    /// Membership test with an absolute slack `tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        if self.validate(Some(x.dim())).is_err() {
            return false;
        }
        match self {
            Projection::WholeSpace => true,
            Projection::NonnegativeOrthant => x.as_slice().iter().all(|&v| v >= -tol),
            Projection::Box { lower, upper } => (0..x.dim())
                .all(|i| x[i] >= lower[i] - tol && x[i] <= upper[i] + tol),
            Projection::Ball { center, radius } => x.distance(center) <= radius * (1.0 + tol) + tol,
        }
    }
}
