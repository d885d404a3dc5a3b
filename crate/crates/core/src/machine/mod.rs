//! The RAM register model and its interpreter.
//!
//! Registers are split into four banks: a read-only pre-state, a
//! write-only post-state, the FLAGS pair and the latent registers. Every
//! instruction except `jmp`/`halt` sets `ZF := res == 0` and
//! `CF := res > 0` for its result `res`.
//!
//! Boundary rules:
//! * latent registers live in `[-1, |Ω|]`; `-1` and `|Ω|` are sentinels.
//!   Indexed reads through a sentinel return 0 and indexed writes through a
//!   sentinel are dropped, which gives zero-padded automaton borders.
//! * `inc` on a latent register reports `res := new - |Ω|`, so ZF rises
//!   exactly when a counter leaves the object range at the top; `dec`
//!   reports `res := new`, so `dec` from 0 yields `-1` with both flags
//!   clear.
//! * `dec` of a state register holding 0 saturates at 0.

mod instr;
mod signature;

pub use instr::{Address, Atom, Flags, Instruction, Jump, LatentId, Reg, Value, MAX_ARITY};
pub use signature::{LanguageId, ModelSignature, StateVar};

use alloc::vec::Vec;

use crate::error::Error;

/// The full register file of one execution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineState<'a> {
    pre: &'a [Value],
    pub post: Vec<Value>,
    pub flags: Flags,
    pub latent: Vec<Value>,
    pub step_count: u64,
}

impl<'a> MachineState<'a> {
    /// Post-state starts as a copy of the pre-state, flags and latent
    /// registers start at zero, and the `k` action arguments are bound to
    /// the last `k` latent registers.
    pub fn init(pre: &'a [Value], args: &[usize], sig: &ModelSignature) -> Result<Self, Error> {
        if pre.len() != sig.state_size() {
            return Err(Error::DimensionMismatch { expected: sig.state_size(), found: pre.len() });
        }
        if args.len() > sig.num_latent() {
            return Err(Error::TooManyArguments { args: args.len(), latent: sig.num_latent() });
        }
        let mut latent = alloc::vec![0; sig.num_latent()];
        let first = sig.num_latent() - args.len();
        for (slot, &a) in latent[first..].iter_mut().zip(args) {
            if a >= sig.num_objects() {
                return Err(Error::ArgumentOutOfRange { arg: a, objects: sig.num_objects() });
            }
            *slot = a as Value;
        }
        Ok(MachineState {
            pre,
            post: pre.to_vec(),
            flags: Flags::default(),
            latent,
            step_count: 0,
        })
    }

    pub fn pre(&self) -> &'a [Value] {
        self.pre
    }

    /// Resolve an address to a register index; `None` is a sentinel access.
    pub fn resolve(&self, addr: &Address, sig: &ModelSignature) -> Option<usize> {
        match addr {
            Address::Direct(i) => (*i < sig.state_size()).then_some(*i),
            Address::Indirect(atom) => {
                let mut objects = [0i64; MAX_ARITY];
                for (slot, z) in objects.iter_mut().zip(atom.args()) {
                    *slot = *self.latent.get(z.index())? as i64;
                }
                sig.ground_index(atom.pred, &objects[..atom.arity()])
            }
        }
    }

    /// Indexed read of the pre- or post-state bank; sentinel reads give 0.
    pub fn read_indexed(&self, post_bank: bool, addr: &Address, sig: &ModelSignature) -> Value {
        match self.resolve(addr, sig) {
            Some(i) if post_bank => self.post[i],
            Some(i) => self.pre[i],
            None => 0,
        }
    }

    /// Indexed write into the post-state bank; sentinel writes are dropped.
    /// Returns the register index actually written.
    pub fn write_indexed(&mut self, addr: &Address, value: Value, sig: &ModelSignature) -> Option<usize> {
        let i = self.resolve(addr, sig)?;
        self.post[i] = value;
        Some(i)
    }

    fn read(&self, r: &Reg, sig: &ModelSignature) -> Value {
        match r {
            Reg::Pre(a) => self.read_indexed(false, a, sig),
            Reg::Post(a) => self.read_indexed(true, a, sig),
            Reg::Latent(z) => self.latent.get(z.index()).copied().unwrap_or(0),
        }
    }

    /// Returns the post-state index written (for post writes).
    fn write(&mut self, r: &Reg, value: Value, sig: &ModelSignature) -> Option<usize> {
        match r {
            Reg::Post(a) => self.write_indexed(a, value, sig),
            Reg::Latent(z) => {
                if let Some(slot) = self.latent.get_mut(z.index()) {
                    *slot = clamp_latent(value as i64, sig);
                }
                None
            }
            Reg::Pre(_) => None,
        }
    }

    /// Execute one instruction located at `line`.
    pub fn exec(&mut self, line: usize, instr: &Instruction, sig: &ModelSignature) -> Result<Step, Error> {
        self.step_count += 1;
        let omega = sig.num_objects() as i64;
        let step = match instr {
            Instruction::Inc(r) | Instruction::Dec(r) => {
                let up = matches!(instr, Instruction::Inc(_));
                let old = match r {
                    Reg::Pre(_) => return Err(Error::WriteToPreState { line }),
                    _ => self.read(r, sig) as i64,
                };
                let (new, res) = match r {
                    Reg::Latent(_) if up => {
                        let new = (old + 1).min(omega);
                        (new, new - omega)
                    }
                    Reg::Latent(_) => {
                        let new = (old - 1).max(-1);
                        (new, new)
                    }
                    _ if up => {
                        let new = (old + 1).min(Value::MAX as i64);
                        (new, new)
                    }
                    _ => {
                        let new = if old <= 0 { old.max(0) } else { old - 1 };
                        (new, new)
                    }
                };
                self.flags = Flags::from_res(res);
                let written = self.write(r, new as Value, sig);
                post_event(r, written, new as Value)
            }
            Instruction::Test(r) => {
                if matches!(r, Reg::Post(_)) {
                    return Err(Error::ReadOfPostState { line });
                }
                self.flags = Flags::from_res(self.read(r, sig) as i64);
                Step::Next(Event::None)
            }
            Instruction::SetConst(r, bit) => {
                if matches!(r, Reg::Pre(_)) {
                    return Err(Error::WriteToPreState { line });
                }
                let v = Value::from(*bit);
                self.flags = Flags::from_res(v as i64);
                let written = self.write(r, v, sig);
                post_event(r, written, v)
            }
            Instruction::SetReg(dst, src) => {
                if matches!(dst, Reg::Pre(_)) {
                    return Err(Error::WriteToPreState { line });
                }
                if matches!(src, Reg::Post(_)) {
                    return Err(Error::ReadOfPostState { line });
                }
                let v = self.read(src, sig);
                self.flags = Flags::from_res(v as i64);
                let written = self.write(dst, v, sig);
                let stored = match dst {
                    Reg::Latent(z) => self.latent.get(z.index()).copied().unwrap_or(v),
                    _ => v,
                };
                post_event(dst, written, stored)
            }
            Instruction::Cmp(a, b) => {
                if matches!(a, Reg::Post(_)) || matches!(b, Reg::Post(_)) {
                    return Err(Error::ReadOfPostState { line });
                }
                let res = self.read(a, sig) as i64 - self.read(b, sig) as i64;
                self.flags = Flags::from_res(res);
                Step::Next(Event::None)
            }
            Instruction::Jmp(j) => {
                if self.flags == j.guard {
                    Step::Next(Event::Branch { taken: false })
                } else {
                    Step::Goto(j.target)
                }
            }
            Instruction::Halt => Step::Halt,
        };
        Ok(step)
    }
}

fn clamp_latent(v: i64, sig: &ModelSignature) -> Value {
    v.clamp(-1, sig.num_objects() as i64) as Value
}

fn post_event(r: &Reg, written: Option<usize>, value: Value) -> Step {
    match r {
        Reg::Post(_) => Step::Next(Event::PostWrite { index: written, value }),
        _ => Step::Next(Event::None),
    }
}

/// Control-flow outcome of executing one instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Next(Event),
    Goto(usize),
    Halt,
}

/// What an executed instruction did, as seen by an [`Observer`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    None,
    /// A post-state write; `index` is `None` when it went to a sentinel.
    PostWrite { index: Option<usize>, value: Value },
    Branch { taken: bool },
}

/// Receives one call per executed line; returning `false` aborts the run.
pub trait Observer {
    fn observe(&mut self, line: usize, event: Event, state: &MachineState<'_>) -> bool;
}

/// Observer that watches nothing.
pub struct Unobserved;

impl Observer for Unobserved {
    fn observe(&mut self, _: usize, _: Event, _: &MachineState<'_>) -> bool {
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// A `halt` was executed.
    Halted,
    /// Execution fell past the last line.
    Returned,
    /// The step limit was reached first.
    Truncated,
    /// The observer asked to stop.
    Aborted,
}

/// Execute `lines` from line 0 until halt, implicit return, the step
/// limit, or an observer abort.
pub fn run_observed(
    lines: &[Instruction],
    state: &mut MachineState<'_>,
    sig: &ModelSignature,
    step_limit: u64,
    observer: &mut impl Observer,
) -> Result<RunStatus, Error> {
    let mut pc = 0usize;
    loop {
        let Some(instr) = lines.get(pc) else {
            return Ok(RunStatus::Returned);
        };
        if state.step_count >= step_limit {
            return Ok(RunStatus::Truncated);
        }
        let (next, event) = match state.exec(pc, instr, sig)? {
            Step::Next(e) => (pc + 1, e),
            Step::Goto(t) => (t, Event::Branch { taken: true }),
            Step::Halt => return Ok(RunStatus::Halted),
        };
        if !observer.observe(pc, event, state) {
            return Ok(RunStatus::Aborted);
        }
        pc = next;
    }
}

pub fn run(
    lines: &[Instruction],
    state: &mut MachineState<'_>,
    sig: &ModelSignature,
    step_limit: u64,
) -> Result<RunStatus, Error> {
    run_observed(lines, state, sig, step_limit, &mut Unobserved)
}

/// Upper bound on the steps a terminating program of `lines` lines and
/// loop-nesting depth `depth` needs over `num_objects` objects.
pub fn step_bound(lines: usize, depth: usize, num_objects: usize) -> u64 {
    let base = num_objects as u64 + 2;
    let mut bound = lines.max(1) as u64;
    for _ in 0..depth {
        bound = bound.saturating_mul(base);
    }
    bound
}
