//! Variance-reduced stochastic solvers for finite-sum convex problems
//!
//! ```text
//! minimize F(x) = (1/n) Σ f_i(x) + ψ(x)
//! ```
//!
//! The centrepiece is [`scsg`], the stochastically controlled stochastic
//! gradient method: each epoch estimates an anchor gradient on a batch whose
//! size grows geometrically, then runs an inner loop whose *length* is drawn
//! from a geometric distribution. Together these make the method adapt to
//! strong convexity and target accuracy while needing only the smoothness
//! constant `L`. A mirror-proximal variant handles a composite term `ψ` and
//! non-Euclidean distance generators ([`geometry`]).
//!
//! [`baselines`] carries the comparison methods (SVRG, SARAH, Katyusha-ns,
//! SGD and GD) on the same oracle and trace machinery, so that every run is
//! measured on one axis: incremental first-order oracle (IFO) units.
//!
//! Component indices are 0-based throughout the API.

pub mod baselines;
pub mod error;
pub mod geometry;
pub mod objectives;
pub mod problem;
pub mod sampling;
pub mod scsg;
pub mod vector;

pub use error::{Error, Result};
pub use problem::{effective_passes, ComponentLoss, FiniteSumProblem, IfoCounter, RunOutput, RunTrace, TraceSample};
pub use sampling::RngStream;
