//! Command-line front end: configuration, orchestration and frame output.

pub mod config;
pub mod render;
pub mod run;
