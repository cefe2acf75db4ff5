//! Exact geometry of the local-realistic polytope for two parties, two
//! measurement settings per party and `d` outcomes per measurement.
//!
//! The crate builds the polytope from its deterministic-strategy vertices,
//! certifies the CGLMP inequality as a facet for any `d`, projects behaviors to
//! generalized correlators, enumerates facets by double description, classifies
//! them up to relabeling symmetries and decides locality of a given behavior.
//! All arithmetic is exact over the rationals.

pub mod cglmp;
pub mod correlators;
pub mod error;
pub mod facets;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod membership;
pub mod rational;
pub mod scenario;
pub mod symmetry;

pub use cglmp::{CaseClass, Rstu, WitnessBatch};
pub use correlators::CorrVector;
pub use error::{Error, Result};
pub use facets::{HRep, VRep};
pub use linalg::{RationalMatrix, RationalVector};
pub use lp::{LpResult, LpStatus};
pub use rational::Rational;
pub use scenario::{Behavior, DeterministicStrategy, Inequality, Scenario, Space};
pub use symmetry::SymmetryOp;
