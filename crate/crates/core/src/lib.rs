//! Arc-fault waveform synthesis and forcing-based fault classification.
//!
//! The crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod arc_model;
pub mod detector;
pub mod error;
pub mod feeder;
pub mod havok;
pub mod linalg;
pub mod pipeline;

pub use error::{Error, Result};
