use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::examples::{Example, ExampleSet, Label};
use crate::machine::{Atom, Instruction, LanguageId, LatentId, ModelSignature, Reg, StateVar, Value};
use crate::program::{Condition, Production, Program};
use crate::rng::Lcg;

/// `f(i)` is the size of the pancake at position `i`; two latent registers.
pub fn pancake_signature(n: usize) -> Result<ModelSignature, Error> {
    ModelSignature::new(n, vec![StateVar::new("f", 1, (1, n as Value))], 2, LanguageId::GeneralRam)
}

/// Reverses positions `0..=k`.
pub fn flip(stack: &[Value], k: usize) -> Vec<Value> {
    let mut next = stack.to_vec();
    next[..=k].reverse();
    next
}

/// The hand-written flip model: `for z1 { if z1 < z2 { post(z1) = pre(z2);
/// post(z2) = pre(z1); dec(z2) } }`, with `k` bound to `z2`.
pub fn flip_program() -> Program {
    let (z1, z2) = (LatentId(0), LatentId(1));
    let f = |z| Atom::new(0, &[z]);
    let mut p = Program::new(8);
    for prod in [
        Production::OpenFor(z1),
        Production::OpenIf(Condition::Less(Reg::Latent(z1), Reg::Latent(z2))),
        Production::Emit(Instruction::SetReg(Reg::post(f(z1)), Reg::pre(f(z2)))),
        Production::Emit(Instruction::SetReg(Reg::post(f(z2)), Reg::pre(f(z1)))),
        Production::Emit(Instruction::Dec(Reg::Latent(z2))),
        Production::CloseIf,
        Production::CloseFor,
    ] {
        p.apply_mut(&prod).expect("flip fits in 8 lines");
    }
    p
}

/// A random walk of `count` flips from a random stack; `k` is drawn
/// uniformly from `[0, n-1)`.
pub fn gen_pancake_traces(n: usize, count: usize, seed: u64) -> Result<ExampleSet, Error> {
    if n < 2 {
        return Err(Error::InvalidParameters("at least 2 pancakes".into()));
    }
    let mut rng = Lcg::new(seed);
    let mut stack: Vec<Value> = (1..=n as Value).collect();
    for i in (1..n).rev() {
        stack.swap(i, rng.below(i + 1));
    }
    let mut examples = Vec::with_capacity(count);
    for _ in 0..count {
        let k = rng.below(n - 1);
        let next = flip(&stack, k);
        examples.push(Example::new(stack, Label::new("flip", &[k]), next.clone()));
        stack = next;
    }
    ExampleSet::new(pancake_signature(n)?, examples)
}
