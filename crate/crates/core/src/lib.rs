#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod continuous;
pub mod error;
pub mod instance;
pub mod matroid;
pub mod multilinear;
pub mod objective;
pub mod polytope;
pub mod rounding;
pub mod seed;
pub mod set;
pub mod solvers;

pub use error::{FmsmError, Result};
