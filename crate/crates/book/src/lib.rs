//! Code listings from the guide in `book/`, compiled as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/cost-model.md")]
pub mod cost_model {}

#[doc = include_str!("../../../book/src/geometrization.md")]
pub mod geometrization {}

#[doc = include_str!("../../../book/src/scsg.md")]
pub mod scsg_solver {}

#[doc = include_str!("../../../book/src/mirror-prox.md")]
pub mod mirror_prox {}

#[doc = include_str!("../../../book/src/baselines.md")]
pub mod baselines {}

#[doc = include_str!("../../../book/src/harness.md")]
pub mod harness {}
