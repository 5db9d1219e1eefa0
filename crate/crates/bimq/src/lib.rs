//! Files, corpus directories and the staged command-line pipeline around
//! `bimq-core`.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod formats;
pub mod model_file;
pub mod pipeline;

pub use config::PipelineConfig;
pub use error::{Error, Result};
