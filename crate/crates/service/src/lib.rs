//! Command-line pipeline and HTTP service around `sopcheck-core`.

pub mod cli;
pub mod server;
