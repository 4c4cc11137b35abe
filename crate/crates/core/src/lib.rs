//! Simulation of binary and ternary neural-network inference on binary RRAM
//! crossbars.
//!
//! - [`xbar`]: cell programming with variability, column-current summation, ADC.
//! - [`mapping`]: the BNN I–VI and TNN I–V integer-to-crossbar mappings.
//! - [`tiler`]: `write_matrix` / `mvm` over matrices of any size.
//! - [`nn`]: a small quantized-network engine that offloads every MVM.
//! - [`dse`]: grid sweeps over crossbar and ADC parameters.
//! - [`cli`]: the `cimsim` command-line front end.

pub mod cli;
pub mod dse;
pub mod error;
pub mod nn;
pub mod mapping;
pub mod matrix;
pub mod seed;
pub mod tiler;
pub mod xbar;

pub use error::{Error, Result};
pub use matrix::IntMatrix;
