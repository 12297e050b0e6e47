// Frozen oracle constants intentionally carry more digits than f64 holds,
// and argument guards use negated comparisons so NaN is rejected too.
#![allow(clippy::excessive_precision)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod models;
pub mod partitions;
pub mod quad;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod verify;
pub mod specfun;

pub use error::{PkError, Result};
