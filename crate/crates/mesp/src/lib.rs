//! Command-line front end for `mesp-core`: file formats, instance
//! generation and the experiment runner.

pub mod error;
pub mod experiment;
pub mod gen;
pub mod io;

pub use error::{Error, ParseError};
