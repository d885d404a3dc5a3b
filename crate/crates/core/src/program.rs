//! Fixed-capacity RAM programs, possibly partial.
//!
//! Lines are defined strictly left to right, so a partial program is its
//! defined prefix plus a stack of control structures that are still open.
//! An open `if` owns a jump whose target is not known yet; an open `for`
//! has emitted its `set(z,0)` head but not its closing `inc(z); jmp`.
//! Partial programs execute as if every open structure were closed right
//! after the last defined line.

use alloc::borrow::Cow;
use alloc::vec::Vec;

use crate::error::Error;
use crate::machine::{self, Flags, Instruction, Jump, LatentId, Reg};

/// A structured-programming condition and the `test`/`cmp` plus jump guard
/// it compiles to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    /// `r == 0`
    IsZero(Reg),
    /// `r > 0` (`r == 1` for Boolean registers)
    IsPositive(Reg),
    /// `a == b`
    Equal(Reg, Reg),
    /// `a > b`
    Greater(Reg, Reg),
    /// `a < b`
    Less(Reg, Reg),
}

impl Condition {
    pub fn compile(&self) -> (Instruction, Flags) {
        match *self {
            Condition::IsZero(r) => (Instruction::Test(r), Flags::ZERO),
            Condition::IsPositive(r) => (Instruction::Test(r), Flags::POSITIVE),
            Condition::Equal(a, b) => (Instruction::Cmp(a, b), Flags::ZERO),
            Condition::Greater(a, b) => (Instruction::Cmp(a, b), Flags::POSITIVE),
            Condition::Less(a, b) => (Instruction::Cmp(a, b), Flags::NEGATIVE),
        }
    }

    /// Inverse of [`compile`](Self::compile).
    pub fn recover(instr: &Instruction, guard: Flags) -> Option<Condition> {
        match (*instr, guard) {
            (Instruction::Test(r), Flags::ZERO) => Some(Condition::IsZero(r)),
            (Instruction::Test(r), Flags::POSITIVE) => Some(Condition::IsPositive(r)),
            (Instruction::Cmp(a, b), Flags::ZERO) => Some(Condition::Equal(a, b)),
            (Instruction::Cmp(a, b), Flags::POSITIVE) => Some(Condition::Greater(a, b)),
            (Instruction::Cmp(a, b), Flags::NEGATIVE) => Some(Condition::Less(a, b)),
            _ => None,
        }
    }

    pub fn registers(&self) -> (Reg, Option<Reg>) {
        match *self {
            Condition::IsZero(r) | Condition::IsPositive(r) => (r, None),
            Condition::Equal(a, b) | Condition::Greater(a, b) | Condition::Less(a, b) => (a, Some(b)),
        }
    }
}

/// One step of the search operator: program the next line(s) or close the
/// innermost open structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Production {
    /// A primitive instruction (`inc`, `dec`, `set`, `halt`).
    Emit(Instruction),
    /// `test`/`cmp` followed by a jump whose target is fixed on close.
    OpenIf(Condition),
    /// The `set(z,0)` head of `for(z=0; z<|Ω|; z++)`.
    OpenFor(LatentId),
    /// Resolve the innermost open `if` to end here.
    CloseIf,
    /// Emit `inc(z); jmp` for the innermost open `for`.
    CloseFor,
}

impl Production {
    /// Program lines this production defines.
    pub fn lines(&self) -> usize {
        match self {
            Production::Emit(_) | Production::OpenFor(_) => 1,
            Production::OpenIf(_) | Production::CloseFor => 2,
            Production::CloseIf => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpenBlock {
    If { jmp_line: usize },
    For { head: usize, counter: LatentId },
}

/// Jump guard that closes an ascending for-loop: leave once ZF is raised by
/// `inc` reaching `|Ω|`.
pub const LOOP_EXIT: Flags = Flags::ZERO;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Program {
    capacity: usize,
    lines: Vec<Instruction>,
    open: Vec<OpenBlock>,
}

impl Program {
    /// The empty program: every line undefined.
    pub fn new(capacity: usize) -> Self {
        Program { capacity, lines: Vec::new(), open: Vec::new() }
    }

    /// A fully defined program from compiled lines.
    pub fn from_lines(capacity: usize, lines: Vec<Instruction>) -> Result<Self, Error> {
        if lines.len() > capacity {
            return Err(Error::MalformedProgram(alloc::format!(
                "{} lines exceed capacity {capacity}",
                lines.len()
            )));
        }
        for (i, l) in lines.iter().enumerate() {
            if let Instruction::Jmp(j) = l {
                if j.is_pending() || j.target > lines.len() {
                    return Err(Error::MalformedProgram(alloc::format!(
                        "line {i}: jump target out of range"
                    )));
                }
            }
        }
        Ok(Program { capacity, lines, open: Vec::new() })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// The defined prefix.
    pub fn lines(&self) -> &[Instruction] {
        &self.lines
    }

    /// Index of the first undefined line.
    pub fn frontier(&self) -> usize {
        self.lines.len()
    }

    pub fn open_blocks(&self) -> &[OpenBlock] {
        &self.open
    }

    /// No control structure is left open.
    pub fn is_closed(&self) -> bool {
        self.open.is_empty()
    }

    pub fn is_halted(&self) -> bool {
        matches!(self.lines.last(), Some(Instruction::Halt))
    }

    /// Lines needed to close everything that is open.
    pub fn closing_cost(&self) -> usize {
        self.open.iter().filter(|b| matches!(b, OpenBlock::For { .. })).count() * 2
    }

    /// Counters of the enclosing open for-loops, outermost first.
    pub fn active_counters(&self) -> impl Iterator<Item = LatentId> + '_ {
        self.open.iter().filter_map(|b| match b {
            OpenBlock::For { counter, .. } => Some(*counter),
            OpenBlock::If { .. } => None,
        })
    }

    /// Whether `prod` is structurally applicable and leaves room to close.
    pub fn fits(&self, prod: &Production) -> bool {
        // after a halt only the enclosing structures may still be closed
        if self.is_halted() && !matches!(prod, Production::CloseIf | Production::CloseFor) {
            return false;
        }
        let extra_close = match prod {
            Production::OpenFor(_) => 2,
            Production::CloseFor => -2,
            _ => 0,
        };
        let needed = self.lines.len() as isize
            + prod.lines() as isize
            + self.closing_cost() as isize
            + extra_close;
        if needed > self.capacity as isize {
            return false;
        }
        match prod {
            Production::CloseIf => {
                matches!(self.open.last(), Some(OpenBlock::If { jmp_line }) if self.lines.len() > jmp_line + 1)
            }
            Production::CloseFor => {
                matches!(self.open.last(), Some(OpenBlock::For { head, .. }) if self.lines.len() > head + 1)
            }
            _ => true,
        }
    }

    /// Apply a production in place.
    pub fn apply_mut(&mut self, prod: &Production) -> Result<(), Error> {
        if !self.fits(prod) {
            return Err(Error::MalformedProgram(alloc::format!(
                "{prod:?} does not fit at line {}",
                self.lines.len()
            )));
        }
        match *prod {
            Production::Emit(instr) => {
                if matches!(instr, Instruction::Jmp(_) | Instruction::Test(_) | Instruction::Cmp(..)) {
                    return Err(Error::MalformedProgram("control instructions need a structure".into()));
                }
                self.lines.push(instr);
            }
            Production::OpenIf(cond) => {
                let (test, guard) = cond.compile();
                self.lines.push(test);
                self.open.push(OpenBlock::If { jmp_line: self.lines.len() });
                self.lines.push(Instruction::Jmp(Jump { guard, target: Jump::PENDING }));
            }
            Production::OpenFor(z) => {
                self.open.push(OpenBlock::For { head: self.lines.len(), counter: z });
                self.lines.push(Instruction::SetConst(Reg::Latent(z), false));
            }
            Production::CloseIf => {
                let Some(OpenBlock::If { jmp_line }) = self.open.pop() else { unreachable!() };
                let end = self.lines.len();
                if let Instruction::Jmp(j) = &mut self.lines[jmp_line] {
                    j.target = end;
                }
            }
            Production::CloseFor => {
                let Some(OpenBlock::For { head, counter }) = self.open.pop() else { unreachable!() };
                self.lines.push(Instruction::Inc(Reg::Latent(counter)));
                self.lines.push(Instruction::Jmp(Jump { guard: LOOP_EXIT, target: head + 1 }));
            }
        }
        Ok(())
    }

    pub fn apply(&self, prod: &Production) -> Result<Program, Error> {
        let mut p = self.clone();
        p.apply_mut(prod)?;
        Ok(p)
    }

    /// Close every open structure. Fails if the closing lines do not fit.
    pub fn close_all(&self) -> Result<Program, Error> {
        let mut p = self.clone();
        while !p.open.is_empty() {
            p.close_innermost()?;
        }
        Ok(p)
    }

    /// Close the innermost open structure, even with an empty body.
    pub(crate) fn close_innermost(&mut self) -> Result<(), Error> {
        match self.open.pop() {
            None => return Err(Error::MalformedProgram("nothing to close".into())),
            Some(OpenBlock::If { jmp_line }) => {
                let end = self.lines.len();
                if let Instruction::Jmp(j) = &mut self.lines[jmp_line] {
                    j.target = end;
                }
            }
            Some(OpenBlock::For { head, counter }) => {
                if self.lines.len() + 2 > self.capacity {
                    return Err(Error::Incomplete);
                }
                self.lines.push(Instruction::Inc(Reg::Latent(counter)));
                self.lines.push(Instruction::Jmp(Jump { guard: LOOP_EXIT, target: head + 1 }));
            }
        }
        Ok(())
    }

    /// The lines to execute: the defined prefix with every open structure
    /// closed after it.
    pub fn executable(&self) -> Cow<'_, [Instruction]> {
        if self.open.is_empty() {
            return Cow::Borrowed(&self.lines);
        }
        let mut lines = self.lines.clone();
        for b in self.open.iter().rev() {
            match *b {
                OpenBlock::If { jmp_line } => {
                    let end = lines.len();
                    if let Instruction::Jmp(j) = &mut lines[jmp_line] {
                        j.target = end;
                    }
                }
                OpenBlock::For { head, counter } => {
                    lines.push(Instruction::Inc(Reg::Latent(counter)));
                    lines.push(Instruction::Jmp(Jump { guard: LOOP_EXIT, target: head + 1 }));
                }
            }
        }
        Cow::Owned(lines)
    }

    /// Number of `if` constructs (forward or still-pending jumps).
    pub fn count_ifs(&self) -> usize {
        self.lines
            .iter()
            .enumerate()
            .filter(|(i, l)| matches!(l, Instruction::Jmp(j) if j.target > *i))
            .count()
    }

    /// Number of `for` constructs, open ones included.
    pub fn count_loops(&self) -> usize {
        let closed = self
            .lines
            .iter()
            .enumerate()
            .filter(|(i, l)| matches!(l, Instruction::Jmp(j) if j.target <= *i))
            .count();
        closed + self.active_counters().count()
    }

    /// Maximum loop nesting depth of the executable view.
    pub fn loop_depth(&self) -> usize {
        let lines = self.executable();
        let loops: Vec<(usize, usize)> = lines
            .iter()
            .enumerate()
            .filter_map(|(i, l)| match l {
                Instruction::Jmp(j) if j.target <= i => Some((j.target, i)),
                _ => None,
            })
            .collect();
        loops
            .iter()
            .map(|&(s, e)| loops.iter().filter(|&&(s2, e2)| s2 <= s && e <= e2).count())
            .max()
            .unwrap_or(0)
    }

    /// Analytic bound on the steps one execution of the executable view
    /// can take over `num_objects` objects.
    pub fn step_bound(&self, num_objects: usize) -> u64 {
        let len = self.lines.len() + self.closing_cost();
        machine::step_bound(len, self.loop_depth(), num_objects)
    }

    pub fn is_well_structured(&self) -> bool {
        is_well_structured(&self.lines)
    }

    pub fn is_terminating(&self) -> bool {
        is_terminating(&self.lines, &self.open)
    }

    /// Number of defined lines, the `n_sol` of a solution.
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

/// Jump ranges must nest or be disjoint: for jumps `i -> i'` and
/// `j -> j'` the intervals `[min(i,i'), max(i,i')]` and
/// `[min(j,j'), max(j,j')]` may not cross. Pending jumps are ignored.
pub fn is_well_structured(lines: &[Instruction]) -> bool {
    let spans: Vec<(usize, usize)> = lines
        .iter()
        .enumerate()
        .filter_map(|(i, l)| match l {
            Instruction::Jmp(j) if !j.is_pending() => Some((i.min(j.target), i.max(j.target))),
            _ => None,
        })
        .collect();
    for (k, &(a1, a2)) in spans.iter().enumerate() {
        for &(b1, b2) in &spans[k + 1..] {
            if (a1 < b1 && b1 < a2 && a2 < b2) || (b1 < a1 && a1 < b2 && b2 < a2) {
                return false;
            }
        }
    }
    true
}

/// Every backward jump must close the loop shape
/// `set(z,0); body; inc(z); jmp(ZF, head+1)` with `z` latent and never
/// written inside `body`. Open loops must not write their counter either.
pub fn is_terminating(lines: &[Instruction], open: &[OpenBlock]) -> bool {
    let writes = |range: core::ops::Range<usize>, z: LatentId| {
        lines[range].iter().any(|l| l.written() == Some(Reg::Latent(z)))
    };
    for (j, l) in lines.iter().enumerate() {
        let Instruction::Jmp(jump) = l else { continue };
        if jump.is_pending() || jump.target > j {
            continue;
        }
        let t = jump.target;
        if t == 0 || j == 0 || jump.guard != LOOP_EXIT || j - 1 < t {
            return false;
        }
        let (Instruction::SetConst(Reg::Latent(z), false), Instruction::Inc(Reg::Latent(z2))) =
            (lines[t - 1], lines[j - 1])
        else {
            return false;
        };
        if z != z2 || writes(t..j - 1, z) {
            return false;
        }
    }
    open.iter().all(|b| match *b {
        OpenBlock::For { head, counter } => !writes(head + 1..lines.len(), counter),
        OpenBlock::If { .. } => true,
    })
}
