//! Character locomotion over deformable terrain and grass.

// `!(x < limit)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod balance;
pub mod cli;
pub mod error;
pub mod export;
pub mod gait;
pub mod heightfield;
pub mod math;
pub mod scenario;
pub mod sim;
pub mod vegetation;

pub use error::{Error, Result};
