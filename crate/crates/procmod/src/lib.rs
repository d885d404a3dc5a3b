//! File formats, reports and the command-line driver around
//! [`procmod_core`].

pub mod cli;
pub mod error;
pub mod manifest;
pub mod progfile;
pub mod report;
pub mod traces;

pub use error::CliError;
