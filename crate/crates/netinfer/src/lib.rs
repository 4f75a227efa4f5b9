//! File formats, configuration, parallel chains and experiment runners on top of
//! `netinfer-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod pipeline;

pub use config::RunConfig;
pub use error::{Error, Result};
