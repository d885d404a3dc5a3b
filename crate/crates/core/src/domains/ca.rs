use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::examples::{Example, ExampleSet, Label};
use crate::language::ca_rule_table;
use crate::machine::{LanguageId, ModelSignature, StateVar, Value};

/// One Boolean `cell` per object, three latent registers.
pub fn ca_signature(cells: usize) -> Result<ModelSignature, Error> {
    ModelSignature::new(cells, vec![StateVar::boolean("cell", 1)], 3, LanguageId::Ca1D)
}

/// One synchronous update with cells beyond either end reading 0.
pub fn ca_step(table: &[u8; 8], tape: &[Value]) -> Vec<Value> {
    let at = |i: isize| -> usize {
        if i < 0 || i as usize >= tape.len() {
            0
        } else {
            usize::from(tape[i as usize] != 0)
        }
    };
    (0..tape.len() as isize)
        .map(|i| Value::from(table[at(i - 1) << 2 | at(i) << 1 | at(i + 1)]))
        .collect()
}

/// `steps` consecutive `step` transitions of an elementary automaton.
/// Without `init` the tape starts with ones in the three central cells.
pub fn gen_ca_traces(rule: u32, cells: usize, steps: usize, init: Option<&[Value]>) -> Result<ExampleSet, Error> {
    let table = ca_rule_table(rule)?;
    if cells < 3 {
        return Err(Error::InvalidParameters("a tape needs at least 3 cells".into()));
    }
    let mut tape = match init {
        Some(t) if t.len() != cells => {
            return Err(Error::DimensionMismatch { expected: cells, found: t.len() });
        }
        Some(t) => t.to_vec(),
        None => {
            let mut t = vec![0; cells];
            let mid = cells / 2;
            t[mid - 1..=mid + 1].fill(1);
            t
        }
    };
    let mut examples = Vec::with_capacity(steps);
    for _ in 0..steps {
        let next = ca_step(&table, &tape);
        examples.push(Example::new(tape, Label::new("step", &[]), next.clone()));
        tape = next;
    }
    ExampleSet::new(ca_signature(cells)?, examples)
}
