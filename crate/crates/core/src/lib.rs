//! Free AdaGrad and friends: projected subgradient descent whose step-size
//! numerator is tuned on the fly by a doubling search, with no knowledge of the
//! distance to the optimum or of the Lipschitz constant.
//!
//! ```
//! use freegrad_core::{free_adagrad, problems::ProblemSpec, StepScale, ThresholdRule};
//!
//! let problem = ProblemSpec::norm(2, 10, 0).build().unwrap();
//! let run = free_adagrad::run(&problem, StepScale::MainH, ThresholdRule::FullB, 1.0, 100).unwrap();
//! assert_eq!(run.records.len(), 100);
//! ```

pub mod analysis;
pub mod baselines;
mod error;
pub mod free_adagrad;
mod problem;
pub mod problems;
mod projection;
pub mod step_scales;
pub mod stochastic_pgd;
mod trace;
mod vector;

pub use analysis::{BoundInputs, BoundKind, BoundReport};
pub use error::{Error, Probe, Result};
pub use free_adagrad::{FreeState, ThresholdRule};
pub use problem::{FnObjective, Objective, Problem};
pub use problems::{Family, ProblemSpec};
pub use projection::Projection;
pub use step_scales::StepScale;
pub use stochastic_pgd::{NoisySign, StochasticConfig, StochasticOracle};
pub use trace::{Run, TraceRecord};
pub use vector::{RunningMean, Vector};
