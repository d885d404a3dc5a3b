//! Trace generators for built-in domains.

mod ca;
mod pancakes;
mod strips;

pub use ca::{ca_signature, ca_step, gen_ca_traces};
pub use pancakes::{flip, flip_program, gen_pancake_traces, pancake_signature};
pub use strips::{blocks, gripper, hanoi, hanoi_move, StripsDomain};

use crate::error::Error;
use crate::examples::ExampleSet;

/// A random walk of `count` legal moves from the tower on the first peg.
pub fn gen_hanoi_traces(num_discs: usize, count: usize, seed: u64) -> Result<ExampleSet, Error> {
    hanoi(num_discs)?.random_walk(count, seed)
}
