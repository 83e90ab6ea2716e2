//! Sparse group filter bank classification of two-class motor-imagery EEG.
//!
//! The pipeline splits each trial into frequency bands, learns common
//! spatial patterns per band, and classifies log-variance features by
//! sparse representation over the training trials, with band codes pulled
//! toward each other.

pub mod cli;
pub mod csp;
pub mod error;
pub mod eval;
pub mod filterbank;
pub mod io;
pub mod numerics;
pub mod sgfb;

pub use error::{Error, FormatError, Result};
