//! Objectives and the problem bundle handed to every optimizer.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::projection::Projection;
use crate::vector::Vector;

/// A convex function with a subgradient oracle.
pub trait Objective: Send + Sync {
    fn value(&self, x: &Vector) -> f64;

    /// Some element of the subdifferential at `x`, of the same dimension as `x`.
    fn subgradient(&self, x: &Vector) -> Vector;

    /// Value and subgradient together; override when they share work.
    fn value_and_subgradient(&self, x: &Vector) -> (f64, Vector) {
        (self.value(x), self.subgradient(x))
    }

    /// A global bound on subgradient norms, when one is known.
    fn lipschitz_bound(&self) -> Option<f64> {
        None
    }
}

/// Adapts a pair of closures into an [`Objective`].
pub struct FnObjective<F, G> {
    value: F,
    subgradient: G,
    lipschitz: Option<f64>,
}

impl<F, G> FnObjective<F, G>
where
    F: Fn(&Vector) -> f64 + Send + Sync,
    G: Fn(&Vector) -> Vector + Send + Sync,
{
    pub fn new(value: F, subgradient: G) -> Self {
        Self { value, subgradient, lipschitz: None }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&Vector) -> f64 + Send + Sync,
    G: Fn(&Vector) -> Vector + Send + Sync,
{
    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        (self.subgradient)(x)
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// Objective, constraint set, starting point and (optionally) a known solution.
#[derive(Clone)]
pub struct Problem {
    objective: Arc<dyn Objective>,
    constraint: Projection,
    x1: Vector,
    known_minimizer: Option<Vector>,
    known_f_star: Option<f64>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("dim", &self.x1.dim())
            .field("constraint", &self.constraint)
            .field("known_f_star", &self.known_f_star)
            .finish_non_exhaustive()
    }
}

const MEMBERSHIP_TOL: f64 = 1e-12;

impl Problem {
    pub fn new(objective: Arc<dyn Objective>, constraint: Projection, x1: Vector) -> Result<Self> {
        if !constraint.contains(&x1, MEMBERSHIP_TOL) {
            return Err(invalid("initial point is outside the constraint set"));
        }
        Ok(Self { objective, constraint, x1, known_minimizer: None, known_f_star: None })
    }

    /// Attaches a known minimizer; its objective value must equal `f_star` to 1e-10.
    pub fn with_minimizer(mut self, x_star: Vector, f_star: f64) -> Result<Self> {
        if x_star.dim() != self.x1.dim() {
            return Err(invalid("minimizer dimension differs from x1"));
        }
        if !self.constraint.contains(&x_star, MEMBERSHIP_TOL) {
            return Err(invalid("known minimizer is outside the constraint set"));
        }
        let value = self.objective.value(&x_star);
        if (value - f_star).abs() > 1e-10 {
            return Err(invalid(format!("f(x*) = {value} but f_star = {f_star}")));
        }
        self.known_minimizer = Some(x_star);
        self.known_f_star = Some(f_star);
        Ok(self)
    }

    /// Replaces the starting point, keeping everything else.
    pub fn with_x1(mut self, x1: Vector) -> Result<Self> {
        if x1.dim() != self.x1.dim() {
            return Err(invalid("new x1 has a different dimension"));
        }
        if !self.constraint.contains(&x1, MEMBERSHIP_TOL) {
            return Err(invalid("initial point is outside the constraint set"));
        }
        self.x1 = x1;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.x1.dim()
    }

    pub fn objective(&self) -> &dyn Objective {
        self.objective.as_ref()
    }

    /// The objective as a shared handle, e.g. to wrap it as a sampling oracle.
    pub fn shared_objective(&self) -> Arc<dyn Objective> {
        Arc::clone(&self.objective)
    }

    pub fn constraint(&self) -> &Projection {
        &self.constraint
    }

    pub fn x1(&self) -> &Vector {
        &self.x1
    }

    pub fn known_minimizer(&self) -> Option<&Vector> {
        self.known_minimizer.as_ref()
    }

    pub fn known_f_star(&self) -> Option<f64> {
        self.known_f_star
    }

    pub fn lipschitz_bound(&self) -> Option<f64> {
        self.objective.lipschitz_bound()
    }

    /// `‖x1 − x*‖` when a minimizer is known.
    pub fn initial_distance(&self) -> Option<f64> {
        self.known_minimizer.as_ref().map(|xs| self.x1.distance(xs))
    }

    /// Objective value and one subgradient at `x`.
    pub fn evaluate(&self, x: &Vector) -> Result<(f64, Vector)> {
        if x.dim() != self.dim() {
            return Err(invalid(format!(
                "dimension mismatch: problem has {}, point has {}",
                self.dim(),
                x.dim()
            )));
        }
        let (value, g) = self.objective.value_and_subgradient(x);
        if g.dim() != x.dim() {
            return Err(invalid("subgradient oracle returned a vector of the wrong dimension"));
        }
        Ok((value, g))
    }

    pub fn project(&self, x: &Vector) -> Result<Vector> {
        self.constraint.project(x)
    }
}
