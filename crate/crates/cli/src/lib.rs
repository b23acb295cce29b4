//! Command line and HTTP service over `argstrength-core`.

pub mod api;
pub mod cli;
pub mod service;
