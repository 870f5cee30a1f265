//! Library surface of the CLI: the config schema and command implementations,
//! exposed so integration tests can exercise them directly.

pub mod commands;
pub mod config;
pub mod error;
