//! Exact distributional quantities and simulators for the support function of
//! the Poisson polytope in the high-dimensional unit ball.

// NaN-rejecting checks are written as !(x > 0.0) on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covering;
pub mod error;
pub mod exactlaw;
pub mod mc;
pub mod polysim;
pub mod specfun;

pub use error::{Error, Result};
pub use mc::Estimate;
