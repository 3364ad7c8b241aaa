//! File formats, pipeline execution and the command-line front end for
//! `veinsight-core`.

pub mod bench;
pub mod cli;
pub mod config;
mod error;
pub mod executor;
pub mod pnm;
pub mod y4m;

pub use error::{Error, Result};
pub use veinsight_core as core;
