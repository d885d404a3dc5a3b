//! Synthesis of white-box procedural models of deterministic transition
//! systems.
//!
//! A model is a small structured program for a random-access machine that
//! copies a pre-state into a post-state and then edits the copy. Programs
//! are found by best-first search over well-structured, terminating RAM
//! programs, optionally confined by a target-language grammar (STRIPS,
//! STRIPS with quantified effects, 1-D cellular automata).
//!
//! The crate is `no_std` and only needs `alloc`; file formats and the
//! command-line driver live in the `procmod` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod domains;
mod error;
pub mod examples;
pub mod language;
pub mod machine;
pub mod program;
pub mod rng;
pub mod synth;
pub mod text;
pub mod validate;

pub use error::Error;
pub use examples::{Example, ExampleSet, Label};
pub use language::{LanguageId, ProgramSpace};
pub use machine::{MachineState, ModelSignature, StateVar, Value};
pub use program::Program;
pub use synth::{SynthesisConfig, SynthesisOutcome};
pub use validate::ValidationReport;
