//! Command-line front end for the controlled Kuramoto model experiments:
//! configuration loading, orchestration and CSV/JSON emission. The
//! computational pieces are exposed as library functions so the test suites
//! can drive them directly.

pub mod commands;
pub mod config;
pub mod output;
