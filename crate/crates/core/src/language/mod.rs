//! Target languages as program spaces.
//!
//! A [`ProgramSpace`] proposes the productions a grammar allows at the
//! frontier of a partial program. The grammar state (which structures are
//! open and what each block already holds) is recovered from the program
//! itself, so any program built by the space can be resumed.

mod ca;
mod strips;

pub use ca::{ca_program, ca_rule_table};
pub use strips::{
    schema_to_pddl_text, schema_to_program, strips_schema_from_program, Literal, PredicateSignature,
    StripsSchema,
};

pub use crate::machine::LanguageId;

use alloc::vec::Vec;

use crate::error::Error;
use crate::machine::{Atom, Instruction, LatentId, ModelSignature, Reg};
use crate::program::{Condition, OpenBlock, Production, Program};

/// Register index of the ground atom `pred(objects...)` (declaration order
/// of predicates, row-major object tuples).
pub fn ground_state_index(pred: &PredicateSignature, objects: &[usize], sig: &ModelSignature) -> Option<usize> {
    if objects.len() != pred.arity as usize {
        return None;
    }
    let p = sig.pred_index(&pred.name)?;
    let objects: Vec<i64> = objects.iter().map(|&o| o as i64).collect();
    sig.ground_index(p, &objects)
}

/// A grammar over RAM programs for one action label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramSpace {
    language: LanguageId,
    sig: ModelSignature,
    arity: usize,
}

impl ProgramSpace {
    /// `action_arity` latent registers (the last ones) hold the action
    /// arguments.
    pub fn new(language: LanguageId, sig: ModelSignature, action_arity: usize) -> Result<Self, Error> {
        if action_arity > sig.num_latent() {
            return Err(Error::TooManyArguments { args: action_arity, latent: sig.num_latent() });
        }
        match language {
            LanguageId::Ca1D => {
                let vars = sig.state_vars();
                if vars.len() != 1 || vars[0].arity != 1 || !vars[0].is_boolean() {
                    return Err(Error::InvalidSignature(
                        "ca1d needs exactly one Boolean unary state variable".into(),
                    ));
                }
                if sig.num_latent() < 3 {
                    return Err(Error::InvalidSignature("ca1d needs three latent registers".into()));
                }
            }
            LanguageId::Strips | LanguageId::StripsQuantified => {
                if let Some(v) = sig.state_vars().iter().find(|v| !v.is_boolean()) {
                    return Err(Error::InvalidSignature(alloc::format!(
                        "STRIPS state variable `{}` must be Boolean",
                        v.name
                    )));
                }
            }
            LanguageId::GeneralRam => {}
        }
        Ok(ProgramSpace { language, sig, arity: action_arity })
    }

    pub fn language(&self) -> LanguageId {
        self.language
    }

    pub fn signature(&self) -> &ModelSignature {
        &self.sig
    }

    /// Latent registers bound to action arguments.
    pub fn parameters(&self) -> impl Iterator<Item = LatentId> + Clone {
        let n = self.sig.num_latent();
        (n - self.arity..n).map(|z| LatentId(z as u8))
    }

    fn latents(&self) -> impl Iterator<Item = LatentId> + Clone {
        (0..self.sig.num_latent()).map(|z| LatentId(z as u8))
    }

    /// Known upper bound on the lines a model needs, when the language has
    /// one: a STRIPS nest tests, and may assign, each atom over the
    /// parameters once, then halts; automata use [`CA_LINE_BOUND`].
    pub fn line_bound(&self) -> Option<usize> {
        match self.language {
            LanguageId::Strips => {
                let params: Vec<LatentId> = self.parameters().collect();
                Some(3 * self.atoms(&params).len() + 1)
            }
            LanguageId::Ca1D => Some(CA_LINE_BOUND),
            LanguageId::GeneralRam | LanguageId::StripsQuantified => None,
        }
    }

    /// Whether every example must satisfy an `if` opened at the frontier of
    /// `p`: true for STRIPS precondition nests, where an unmet condition
    /// leaves the post-state equal to the pre-state.
    pub fn conditions_must_hold(&self, p: &Program) -> bool {
        match self.language {
            LanguageId::Strips => true,
            LanguageId::StripsQuantified => p.active_counters().next().is_none(),
            _ => false,
        }
    }

    /// The productions the grammar allows at the frontier of `p`, in
    /// canonical order: post-state writes, latent writes, `inc`, `dec`,
    /// if-openers, for-openers, closers, `halt`.
    pub fn candidates(&self, p: &Program) -> Vec<Production> {
        let frames = frames(p);
        let mut out = match self.language {
            LanguageId::GeneralRam => self.general(p),
            LanguageId::Strips => self.strips(&frames, false),
            LanguageId::StripsQuantified => self.strips(&frames, true),
            LanguageId::Ca1D => self.ca(&frames),
        };
        if !matches!(self.language, LanguageId::Ca1D) || p.frontier() > 0 {
            self.closers(p, &frames, &mut out);
        }
        out.retain(|prod| p.fits(prod));
        out
    }

    fn closers(&self, p: &Program, frames: &[Frame], out: &mut Vec<Production>) {
        if self.language == LanguageId::GeneralRam && !p.is_closed() && !p.is_halted() {
            out.push(Production::Emit(Instruction::Halt));
        }
        match p.open_blocks().last() {
            Some(OpenBlock::If { .. }) => out.push(Production::CloseIf),
            Some(OpenBlock::For { .. }) => {
                let top = frames.last().expect("root frame");
                // the automaton loop closes only after its prologue
                if self.language != LanguageId::Ca1D || top.instrs.len() >= CA_PROLOGUE.len() {
                    out.push(Production::CloseFor);
                }
            }
            None => {
                if !p.is_empty() && !p.is_halted() {
                    out.push(Production::Emit(Instruction::Halt));
                }
            }
        }
    }

    /// Atoms over `latents` with pairwise distinct arguments, predicates
    /// in declaration order, argument tuples lexicographic.
    fn atoms(&self, latents: &[LatentId]) -> Vec<Atom> {
        let mut out = Vec::new();
        for (p, var) in self.sig.state_vars().iter().enumerate() {
            let k = var.arity as usize;
            let mut tuple = Vec::with_capacity(k);
            tuples(latents, k, &mut tuple, &mut |t| out.push(Atom::new(p as u16, t)));
        }
        out
    }

    fn general(&self, p: &Program) -> Vec<Production> {
        let active: Vec<LatentId> = p.active_counters().collect();
        let latents: Vec<LatentId> = self.latents().collect();
        let free: Vec<LatentId> = latents.iter().copied().filter(|z| !active.contains(z)).collect();
        let atoms = self.atoms(&latents);
        let mut out = Vec::new();

        for dst in &atoms {
            for src in atoms.iter().filter(|a| a.pred == dst.pred) {
                out.push(Production::Emit(Instruction::SetReg(Reg::post(*dst), Reg::pre(*src))));
            }
            let (lo, hi) = self.sig.state_vars()[dst.pred as usize].domain;
            for bit in [false, true] {
                if (lo..=hi).contains(&i32::from(bit)) {
                    out.push(Production::Emit(Instruction::SetConst(Reg::post(*dst), bit)));
                }
            }
        }
        for &dst in &free {
            for &src in latents.iter().filter(|&&s| s != dst) {
                out.push(Production::Emit(Instruction::SetReg(Reg::Latent(dst), Reg::Latent(src))));
            }
        }
        for &z in &free {
            out.push(Production::Emit(Instruction::Inc(Reg::Latent(z))));
        }
        for &z in &free {
            out.push(Production::Emit(Instruction::Dec(Reg::Latent(z))));
        }
        for &z in &latents {
            out.push(Production::OpenIf(Condition::IsZero(Reg::Latent(z))));
            out.push(Production::OpenIf(Condition::IsPositive(Reg::Latent(z))));
        }
        for a in &atoms {
            out.push(Production::OpenIf(Condition::IsZero(Reg::pre(*a))));
            out.push(Production::OpenIf(Condition::IsPositive(Reg::pre(*a))));
        }
        for (i, &a) in latents.iter().enumerate() {
            for &b in &latents[i + 1..] {
                let (a, b) = (Reg::Latent(a), Reg::Latent(b));
                out.push(Production::OpenIf(Condition::Equal(a, b)));
                out.push(Production::OpenIf(Condition::Greater(a, b)));
                out.push(Production::OpenIf(Condition::Less(a, b)));
            }
        }
        for (i, a) in atoms.iter().enumerate() {
            for b in atoms[i + 1..].iter().filter(|b| b.pred == a.pred) {
                let (a, b) = (Reg::pre(*a), Reg::pre(*b));
                out.push(Production::OpenIf(Condition::Equal(a, b)));
                out.push(Production::OpenIf(Condition::Greater(a, b)));
                out.push(Production::OpenIf(Condition::Less(a, b)));
            }
        }
        for &z in &free {
            out.push(Production::OpenFor(z));
        }
        out
    }

    fn strips(&self, frames: &[Frame], quantified: bool) -> Vec<Production> {
        let top = frames.last().expect("root frame");
        let in_loop = frames.iter().any(|f| matches!(f.kind, FrameKind::For(_)));
        let mut out = Vec::new();

        if in_loop {
            // conditional effects over the loop variable(s)
            let active: Vec<LatentId> = frames
                .iter()
                .filter_map(|f| match f.kind {
                    FrameKind::For(z) => Some(z),
                    _ => None,
                })
                .collect();
            let mut scope: Vec<LatentId> = self.parameters().collect();
            scope.extend(active.iter().copied());
            let atoms: Vec<Atom> = self
                .atoms(&scope)
                .into_iter()
                .filter(|a| active.iter().any(|z| a.mentions(*z)))
                .collect();
            let path_max = nest_max(frames, &atoms, true);
            if top.instrs.is_empty() {
                push_tests(
                    &mut out,
                    atoms.iter().enumerate().filter(|(i, _)| path_max.is_none_or(|m| *i > m)).map(|(_, a)| a),
                );
            }
            if top.children == 0 {
                push_assignments(&mut out, &atoms, top);
            }
            reorder(&mut out);
            return out;
        }

        let params: Vec<LatentId> = self.parameters().collect();
        let atoms = self.atoms(&params);
        let effect_zone = !top.instrs.is_empty() || top.loops > 0;
        if top.children == 0 && !effect_zone {
            let path_max = nest_max(frames, &atoms, false);
            push_tests(
                &mut out,
                atoms.iter().enumerate().filter(|(i, _)| path_max.is_none_or(|m| *i > m)).map(|(_, a)| a),
            );
        }
        if top.children == 0 {
            push_assignments(&mut out, &atoms, top);
            if quantified {
                let used: Vec<LatentId> = params.clone();
                for z in self.latents().filter(|z| !used.contains(z)) {
                    out.push(Production::OpenFor(z));
                }
            }
        }
        reorder(&mut out);
        out
    }

    fn ca(&self, frames: &[Frame]) -> Vec<Production> {
        let z = |i: u8| LatentId(i);
        let top = frames.last().expect("root frame");
        let mut out = Vec::new();
        match top.kind {
            FrameKind::Root => {
                if top.loops == 0 {
                    out.push(Production::OpenFor(z(0)));
                }
            }
            FrameKind::For(_) => {
                if let Some(instr) = CA_PROLOGUE.get(top.instrs.len()) {
                    out.push(Production::Emit(*instr));
                } else {
                    for k in 0..3 {
                        push_ca_tests(&mut out, z(k));
                    }
                }
            }
            FrameKind::If(_) => {
                if top.instrs.is_empty() {
                    if top.children == 0 {
                        let cell = Reg::post(Atom::new(0, &[z(0)]));
                        out.push(Production::Emit(Instruction::SetConst(cell, false)));
                        out.push(Production::Emit(Instruction::SetConst(cell, true)));
                    }
                    let tested = frames
                        .iter()
                        .filter_map(|f| match f.kind {
                            FrameKind::If(c) => c.registers().0.atom().and_then(|a| a.args().next()),
                            _ => None,
                        })
                        .max();
                    for k in 0..3 {
                        if tested.is_none_or(|t| z(k) > t) {
                            push_ca_tests(&mut out, z(k));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Alias of [`ProgramSpace::candidates`].
pub fn candidate_instructions(space: &ProgramSpace, p: &Program) -> Vec<Production> {
    space.candidates(p)
}

/// Line budget for automaton update rules.
pub const CA_LINE_BOUND: usize = 95;

const CA_PROLOGUE: [Instruction; 4] = [
    Instruction::SetReg(Reg::Latent(LatentId(1)), Reg::Latent(LatentId(0))),
    Instruction::Dec(Reg::Latent(LatentId(1))),
    Instruction::SetReg(Reg::Latent(LatentId(2)), Reg::Latent(LatentId(0))),
    Instruction::Inc(Reg::Latent(LatentId(2))),
];

fn push_ca_tests(out: &mut Vec<Production>, z: LatentId) {
    let cell = Reg::pre(Atom::new(0, &[z]));
    out.push(Production::OpenIf(Condition::IsZero(cell)));
    out.push(Production::OpenIf(Condition::IsPositive(cell)));
}

fn push_tests<'a>(out: &mut Vec<Production>, atoms: impl Iterator<Item = &'a Atom>) {
    for a in atoms {
        out.push(Production::OpenIf(Condition::IsZero(Reg::pre(*a))));
        out.push(Production::OpenIf(Condition::IsPositive(Reg::pre(*a))));
    }
}

/// Assignments to atoms after the last one assigned in this block.
fn push_assignments(out: &mut Vec<Production>, atoms: &[Atom], top: &Frame) {
    let last = top
        .instrs
        .iter()
        .rev()
        .find_map(|i| match i {
            Instruction::SetConst(Reg::Post(crate::machine::Address::Indirect(a)), _) => {
                atoms.iter().position(|b| b == a)
            }
            _ => None,
        });
    for (i, a) in atoms.iter().enumerate() {
        if last.is_none_or(|l| i > l) {
            out.push(Production::Emit(Instruction::SetConst(Reg::post(*a), false)));
            out.push(Production::Emit(Instruction::SetConst(Reg::post(*a), true)));
        }
    }
}

/// Highest canonical atom index tested along the open nest.
fn nest_max(frames: &[Frame], atoms: &[Atom], inside_loop_only: bool) -> Option<usize> {
    let mut seen_loop = !inside_loop_only;
    let mut best = None;
    for f in frames {
        match f.kind {
            FrameKind::For(_) => {
                seen_loop = true;
                best = None;
            }
            FrameKind::If(c) if seen_loop => {
                if let Some(i) = c.registers().0.atom().and_then(|a| atoms.iter().position(|b| b == a)) {
                    best = best.max(Some(i));
                }
            }
            _ => {}
        }
    }
    best
}

/// Canonical order: assignments before if-openers before for-openers.
fn reorder(out: &mut [Production]) {
    out.sort_by_key(|p| match p {
        Production::Emit(_) => 0,
        Production::OpenIf(_) => 1,
        Production::OpenFor(_) => 2,
        _ => 3,
    });
}

fn tuples(latents: &[LatentId], k: usize, tuple: &mut Vec<LatentId>, emit: &mut impl FnMut(&[LatentId])) {
    if tuple.len() == k {
        emit(tuple);
        return;
    }
    for &z in latents {
        if !tuple.contains(&z) {
            tuple.push(z);
            tuples(latents, k, tuple, emit);
            tuple.pop();
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum FrameKind {
    Root,
    If(Condition),
    For(LatentId),
}

/// An open block of a partial program and what it already contains.
#[derive(Clone, Debug)]
pub(crate) struct Frame {
    pub kind: FrameKind,
    end: Option<usize>,
    /// Primitive instructions directly in this block.
    pub instrs: Vec<Instruction>,
    /// Closed `if` blocks directly in this block.
    pub children: usize,
    /// Closed `for` blocks directly in this block.
    pub loops: usize,
}

/// The open blocks of `p`, outermost (the program root) first.
pub(crate) fn frames(p: &Program) -> Vec<Frame> {
    let lines = p.lines();
    let mut loop_end = alloc::collections::BTreeMap::new();
    for (j, l) in lines.iter().enumerate() {
        if let Instruction::Jmp(jump) = l {
            if !jump.is_pending() && jump.target <= j && jump.target > 0 {
                loop_end.insert(jump.target - 1, j + 1);
            }
        }
    }
    let open_heads: Vec<usize> = p
        .open_blocks()
        .iter()
        .filter_map(|b| match b {
            OpenBlock::For { head, .. } => Some(*head),
            _ => None,
        })
        .collect();

    let mut stack = alloc::vec![Frame { kind: FrameKind::Root, end: None, instrs: Vec::new(), children: 0, loops: 0 }];
    let pop_ended = |stack: &mut Vec<Frame>, i: usize| {
        while stack.len() > 1 && stack.last().unwrap().end == Some(i) {
            let f = stack.pop().unwrap();
            let parent = stack.last_mut().unwrap();
            match f.kind {
                FrameKind::For(_) => parent.loops += 1,
                _ => parent.children += 1,
            }
        }
    };
    let mut i = 0;
    while i < lines.len() {
        pop_ended(&mut stack, i);
        let instr = lines[i];
        let next_jump = lines.get(i + 1).and_then(Instruction::jump).copied();
        match instr {
            Instruction::Test(_) | Instruction::Cmp(..) if next_jump.is_some_and(|j| j.is_pending() || j.target > i + 1) => {
                let j = next_jump.unwrap();
                let cond = Condition::recover(&instr, j.guard).unwrap_or(Condition::IsZero(Reg::Latent(LatentId(0))));
                let end = (!j.is_pending()).then_some(j.target);
                stack.push(Frame { kind: FrameKind::If(cond), end, instrs: Vec::new(), children: 0, loops: 0 });
                i += 2;
            }
            Instruction::SetConst(Reg::Latent(z), false) if loop_end.contains_key(&i) || open_heads.contains(&i) => {
                let end = loop_end.get(&i).copied();
                stack.push(Frame { kind: FrameKind::For(z), end, instrs: Vec::new(), children: 0, loops: 0 });
                i += 1;
            }
            Instruction::Inc(Reg::Latent(_)) if next_jump.is_some_and(|j| !j.is_pending() && j.target <= i + 1) => {
                i += 2;
            }
            _ => {
                stack.last_mut().unwrap().instrs.push(instr);
                i += 1;
            }
        }
    }
    pop_ended(&mut stack, lines.len());
    stack
}
