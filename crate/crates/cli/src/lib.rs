//! Command-line front end for the 1D linear-growth variational solver.
//!
//! Exposed as a library so the integration and acceptance suites can
//! drive the exact code paths the binary runs.

pub mod config;
pub mod out;
pub mod pipeline;
