//! File formats, configuration, threading and the command-line driver for
//! `featgen-core`.

pub mod bench;
pub mod commands;
pub mod config;
pub mod dataset_io;
mod error;
pub mod formats;
pub mod output;
pub mod threads;

pub use error::{Error, Result};
pub use threads::Threads;
