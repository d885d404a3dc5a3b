use crate::error::Error;
use crate::machine::{Atom, Instruction, LatentId, Reg};
use crate::program::{Condition, Production, Program};

use super::CA_PROLOGUE;

/// Next-value table of an elementary automaton: entry `b` is the successor
/// of a cell whose (left, center, right) neighbourhood reads `b` in binary.
pub fn ca_rule_table(wolfram: u32) -> Result<[u8; 8], Error> {
    if wolfram > 255 {
        return Err(Error::RuleOutOfRange(wolfram));
    }
    let mut table = [0u8; 8];
    for (b, t) in table.iter_mut().enumerate() {
        *t = ((wolfram >> b) & 1) as u8;
    }
    Ok(table)
}

/// A hand-built program of the automaton grammar for a rule: one nest of
/// tests on (left, center, right) per neighbourhood whose successor differs
/// from the center cell.
pub fn ca_program(wolfram: u32) -> Result<Program, Error> {
    let table = ca_rule_table(wolfram)?;
    let cell = |z: u8| Atom::new(0, &[LatentId(z)]);
    let test = |z: u8, bit: usize| {
        if bit == 1 {
            Condition::IsPositive(Reg::pre(cell(z)))
        } else {
            Condition::IsZero(Reg::pre(cell(z)))
        }
    };
    // registers: z1 center, z2 left, z3 right
    let mut p = Program::new(usize::MAX / 4);
    p.apply_mut(&Production::OpenFor(LatentId(0)))?;
    for instr in CA_PROLOGUE {
        p.apply_mut(&Production::Emit(instr))?;
    }
    for b in 0..8 {
        let (l, c, r) = (b >> 2 & 1, b >> 1 & 1, b & 1);
        if usize::from(table[b]) == c {
            continue;
        }
        for (z, bit) in [(0, c), (1, l), (2, r)] {
            p.apply_mut(&Production::OpenIf(test(z, bit)))?;
        }
        let write = Instruction::SetConst(Reg::post(cell(0)), table[b] == 1);
        p.apply_mut(&Production::Emit(write))?;
        for _ in 0..3 {
            p.apply_mut(&Production::CloseIf)?;
        }
    }
    p.apply_mut(&Production::CloseFor)?;
    let lines = p.lines().to_vec();
    Program::from_lines(lines.len(), lines)
}
