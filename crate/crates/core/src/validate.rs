//! Replaying programs on held-out examples.

use alloc::vec::Vec;

use crate::error::Error;
use crate::examples::ExampleSet;
use crate::machine::{run, Address, Instruction, MachineState, Reg, Value};
use crate::program::Program;
use crate::synth::step_limit;

/// At most this many failures are recorded per report.
pub const MAX_FAILURES: usize = 100;

/// The first state variable an example got wrong.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub example: usize,
    pub variable: usize,
    pub expected: Value,
    pub got: Value,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub total: usize,
    pub passed: usize,
    /// The first [`MAX_FAILURES`] failing examples.
    pub failures: Vec<Mismatch>,
}

impl ValidationReport {
    /// Fraction of examples reproduced exactly; 1 for an empty set.
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.passed as f64 / self.total as f64
        }
    }

    pub fn is_perfect(&self) -> bool {
        self.passed == self.total
    }
}

fn registers(instr: &Instruction) -> [Option<Reg>; 2] {
    match *instr {
        Instruction::Inc(r) | Instruction::Dec(r) | Instruction::Test(r) | Instruction::SetConst(r, _) => [Some(r), None],
        Instruction::SetReg(a, b) | Instruction::Cmp(a, b) => [Some(a), Some(b)],
        Instruction::Jmp(_) | Instruction::Halt => [None, None],
    }
}

/// Latent registers a program needs: one past the highest it mentions.
pub fn latent_needed(p: &Program) -> usize {
    let mut n = 0;
    for instr in p.lines() {
        for r in registers(instr).into_iter().flatten() {
            let mut see = |z: usize| n = n.max(z + 1);
            match r {
                Reg::Latent(z) => see(z.index()),
                Reg::Pre(Address::Indirect(a)) | Reg::Post(Address::Indirect(a)) => a.args().for_each(|z| see(z.index())),
                _ => {}
            }
        }
    }
    n
}

/// Replays `p` from each example's pre-state and compares the result
/// exactly with its post-state.
pub fn validate(p: &Program, examples: &ExampleSet, multiplier: u64) -> Result<ValidationReport, Error> {
    let sig = examples.signature();
    if !p.is_closed() {
        return Err(Error::Incomplete);
    }
    for instr in p.lines() {
        for r in registers(instr).into_iter().flatten() {
            if let Reg::Pre(Address::Direct(i)) | Reg::Post(Address::Direct(i)) = r {
                if i >= sig.state_size() {
                    return Err(Error::NonGeneralizable { index: i, objects: sig.num_objects() });
                }
            }
        }
    }
    let sig = sig.with_latent(sig.num_latent().max(latent_needed(p)));
    let limit = step_limit(p, sig.num_objects(), multiplier);
    let mut report = ValidationReport { total: examples.len(), ..ValidationReport::default() };
    for (i, e) in examples.iter().enumerate() {
        let mut state = MachineState::init(&e.pre, &e.label.args, &sig)?;
        run(p.lines(), &mut state, &sig, limit)?;
        match state.post.iter().zip(&e.post).position(|(a, b)| a != b) {
            None => report.passed += 1,
            Some(v) if report.failures.len() < MAX_FAILURES => report.failures.push(Mismatch {
                example: i,
                variable: v,
                expected: e.post[v],
                got: state.post[v],
            }),
            Some(_) => {}
        }
    }
    Ok(report)
}

/// Validates `p` on examples generated at each size. The program is
/// re-grounded by the generated signature: loops run to the new object
/// count and indirect accesses resolve against the new layout.
pub fn cross_validate(
    p: &Program,
    generate: impl Fn(usize) -> Result<ExampleSet, Error>,
    sizes: &[usize],
    multiplier: u64,
) -> Result<Vec<ValidationReport>, Error> {
    sizes.iter().map(|&n| validate(p, &generate(n)?, multiplier)).collect()
}
