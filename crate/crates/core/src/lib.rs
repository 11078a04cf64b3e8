// NaN-rejecting `!(a < b)` guards and multi-array index loops are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::excessive_precision)]

pub mod capacity;
pub mod config;
pub mod error;
pub mod exec;
pub mod montecarlo;
pub mod numerics;
pub mod outage;
pub mod postsic_bpsk;
pub mod postsic_qpsk;
pub mod reproduce;
pub mod scenario;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
pub use exec::Execution;
