//! Simulator and verifier for a model of oscillating wandering domains.
//!
//! A point's orbit visits a sequence of discs: the translation discs `Δ_n`,
//! the discs `G_n` where a Blaschke product `b_n` acts, and the chains of
//! discs inside `D_k`. The crate builds the radii and error budgets of the
//! construction, checks the nesting properties they must satisfy, runs
//! perturbed orbits and classifies the resulting dynamics.

// `!(x > 0.0)` is used deliberately so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blaschke;
pub mod classify;
pub mod cli;
pub mod error;
pub mod hypgeo;
pub mod model;
pub mod scale;
pub mod schedule;

pub use blaschke::{BlaschkeProduct, Family};
pub use error::{Error, Result};
pub use hypgeo::DiscPoint;
pub use model::{ell, phase_of, Phase, PerturbationModel};
pub use scale::LogScaled;
pub use schedule::{build_schedule, Schedule};
