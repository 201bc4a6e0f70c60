//! Library surface of the `ownet` command-line tool: configuration,
//! manifest handling and the pipeline stages, so the binary stays a thin
//! argument-parsing shell and tests can drive stages directly.

pub mod config;
pub mod manifest;
pub mod stages;
