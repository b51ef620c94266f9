//! Command line tools and the HTTP API over a semantic full-text index.

pub mod api;
pub mod cli;
