//! Universal online convex optimization.
//!
//! A tilted exponentially weighted meta learner runs three families of
//! experts side by side: one convex online gradient descent expert, a grid of
//! online Newton step experts on exp-concave surrogates, and a grid of
//! strongly convex gradient descent experts on strongly convex surrogates.
//! The combination adapts to convex, exp-concave and strongly convex loss
//! sequences without being told which one it faces.
//!
//! The crate also carries the baselines used for comparison (an ONS-only
//! ensemble, plain OGD in both step-size regimes, standalone ONS) and the
//! runtime certificates that check the regret inequalities on recorded runs.

pub mod bounds;
mod error;
pub mod exec;
pub mod experts;
pub mod geometry;
pub mod meta;
pub mod problem;
pub mod quadratic;
pub mod surrogates;
pub mod universal;

pub use error::{Error, Result};
pub use exec::Execution;
pub use experts::{Broadcast, ConvexExpert, Expert, ExpertKind, OnlineNewton, OnsExpert, ScExpert};
pub use geometry::{DecisionSet, WeightedProjection};
pub use meta::{ExpertGrid, ExpertSlot, Families, MetaState};
pub use problem::{CurvatureClass, GradientSample, LossOracle, ProblemParams};
pub use quadratic::Quadratic;
pub use surrogates::SurrogateContext;
pub use universal::{Learner, LearnerKind, MalerLearner, MetaRecord, RoundRecord};

/// Dense column vector used for decisions and gradients.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix used for ONS preconditioners and quadratic forms.
pub type Matrix = nalgebra::DMatrix<f64>;
