//! Specification language, output formats, verification, benchmarks and the command line
//! for `cfboltz-core`.

pub mod bench;
pub mod cli;
pub mod format;
pub mod models;
pub mod parser;
pub mod render;
pub mod sampling;
pub mod stats;
pub mod svg;
pub mod verify;
