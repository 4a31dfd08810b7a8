//! Config files, data formats and the command-line front end around
//! `dpsm-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod export;
pub mod instance_io;
pub mod mnist;
pub mod pgm;

pub use config::{parse_config, parse_with_overrides, render, ConfigLayers};
pub use error::{Error, Result};
pub use experiment::{execute, load_problem, Outcome};
