//! File formats, batch runners and the command-line front end for
//! [`teamfuse_core`].

pub mod batch;
pub mod cli;
pub mod error;
pub mod formats;

pub use error::{Error, Result};
