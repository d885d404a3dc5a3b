//! The 64-bit linear congruential generator behind every random walk.
//!
//! `state' = state * 6364136223846793005 + 1442695040888963407 (mod 2^64)`;
//! each draw outputs bits 63..32 of the new state. Traces generated from a
//! seed are therefore reproducible by any implementation of these three
//! lines.

pub const MULTIPLIER: u64 = 6364136223846793005;
pub const INCREMENT: u64 = 1442695040888963407;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    pub fn next_u32(&mut self) -> u32 {
        self.state = self.state.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT);
        (self.state >> 32) as u32
    }

    /// Uniform draw from `[0, n)` by multiply-shift; `n` must be non-zero.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0 && n <= u32::MAX as usize);
        ((u64::from(self.next_u32()) * n as u64) >> 32) as usize
    }
}
