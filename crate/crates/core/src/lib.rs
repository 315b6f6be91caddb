//! Wavelet-chirplet transform (WCT), its X-ray variant (XWCT), higher-order
//! synchrosqueezing over time, frequency and chirprate, ridge extraction and
//! retrieval of modes whose instantaneous frequencies cross.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod reassign;
pub mod retrieve;
pub mod ridge;
pub mod signal;
pub mod squeeze;
pub mod wct;
pub mod window;
pub mod xray;

pub use error::{Error, Result};
