//! Std companion of `so3bethe`: JSON configuration, seeded sampling and
//! the command implementations behind the `so3bethe` binary.

pub mod commands;
pub mod config;
pub mod sample;

pub use commands::{run, Command, Outcome};
pub use config::RunConfig;
