//! File formats, IO and the `tactile` command-line tool built on `tactile-core`.

pub mod bench;
pub mod calib_io;
pub mod cli;
pub mod config;
pub mod error;
pub mod flowio;
pub mod grasp_io;
pub mod meta;
pub mod pgm;
pub mod records;

pub use error::{Error, Result};
