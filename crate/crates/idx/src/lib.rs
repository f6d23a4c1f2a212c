//! IO, corpus generation, persistence formats and the benchmark harness
//! around `idx-core`, plus the `idx` command-line tool.

pub mod bench;
pub mod cli;
pub mod gen;
pub mod persist;
