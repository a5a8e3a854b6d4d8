//! Weighted `L^p` convolution algebras on groups of polynomial growth.
//!
//! The crate models a handful of concrete groups (integer lattices, the
//! discrete Heisenberg group, cyclic groups and a mesh model of the real
//! line), weights on them, and the numerical machinery needed to test when
//! `L^p_ω(G)` is a convolution algebra, when it is symmetric, and how a
//! smooth functional calculus behaves inside it.

// Guards written as `!(x > 0.0)` deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod asymptotics;
pub mod conditions;
pub mod error;
pub mod funcalc;
pub mod group;
pub mod numeric;
pub mod operator;
pub mod par;
pub mod quad;
pub mod spectral;
pub mod weight;

pub use error::{Error, Result};
pub use group::{GroupElement, GroupKind, GroupModel, LengthMode};
pub use par::Execution;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
