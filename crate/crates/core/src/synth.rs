//! Frontier best-first search over partial programs.
//!
//! Nodes are ordered by more loops, then more conditionals, then lower goal
//! count `f_gc`, then insertion order. Only the open list is stored. A node
//! is a goal when its program, closed, reproduces every example.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::Error;
use crate::examples::{Example, ExampleSet};
use crate::language::ProgramSpace;
use crate::machine::{run_observed, Event, MachineState, ModelSignature, Observer, RunStatus, Value};
use crate::program::{Production, Program};

/// Largest line budget tried when escalating.
pub const MAX_ESCALATED_LINES: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesisConfig {
    /// Line budget `n`; `None` uses the language's bound, or tries
    /// 2, 4, 8, ... up to [`MAX_ESCALATED_LINES`] when it has none.
    pub max_lines: Option<usize>,
    /// Latent register count; `None` keeps the signature's.
    pub num_latent: Option<usize>,
    /// Scales the analytic step bound of a run.
    pub step_multiplier: u64,
    /// Maximum number of expanded nodes per search.
    pub node_budget: u64,
    pub incremental: bool,
    pub initial_batch: usize,
    /// Prune post-state writes that contradict an example.
    pub r1: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            max_lines: None,
            num_latent: None,
            step_multiplier: 4,
            node_budget: 1_000_000,
            incremental: false,
            initial_batch: 2,
            r1: true,
        }
    }
}

impl SynthesisConfig {
    pub fn with_max_lines(mut self, n: usize) -> Self {
        self.max_lines = Some(n);
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.max_lines == Some(0) {
            return Err(Error::InvalidParameters("max_lines must be at least 1".into()));
        }
        if self.node_budget == 0 {
            return Err(Error::InvalidParameters("node budget must be at least 1".into()));
        }
        if self.step_multiplier == 0 {
            return Err(Error::InvalidParameters("step multiplier must be at least 1".into()));
        }
        if self.incremental && self.initial_batch == 0 {
            return Err(Error::InvalidParameters("initial batch must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SynthesisStatus {
    Solved,
    /// The node budget ran out.
    Budget,
    /// The open list emptied.
    Exhausted,
}

impl SynthesisStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SynthesisStatus::Solved => "solved",
            SynthesisStatus::Budget => "budget",
            SynthesisStatus::Exhausted => "exhausted",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Nodes taken off the open list.
    pub expanded: u64,
    /// Children generated and evaluated, pruned ones included.
    pub evaluated: u64,
    /// Searches run (escalation steps times incremental rounds).
    pub searches: u32,
}

impl SearchStats {
    fn add(&mut self, other: SearchStats) {
        self.expanded += other.expanded;
        self.evaluated += other.evaluated;
        self.searches += other.searches;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesisOutcome {
    pub status: SynthesisStatus,
    /// The closed program when solved.
    pub program: Option<Program>,
    /// Line budget of the last search.
    pub n_max: usize,
    pub stats: SearchStats,
}

impl SynthesisOutcome {
    /// Lines of the solution.
    pub fn n_sol(&self) -> Option<usize> {
        self.program.as_ref().map(Program::len)
    }

    pub fn is_solved(&self) -> bool {
        self.status == SynthesisStatus::Solved
    }
}

/// Per-node evaluation `(f_#loops, f_#ifs, f_gc)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Eval {
    pub loops: usize,
    pub ifs: usize,
    pub gc: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchNode {
    pub program: Program,
    pub eval: Eval,
    pub seq: u64,
}

/// `Less` when `a` is expanded before `b`.
pub fn node_order(a: &SearchNode, b: &SearchNode) -> Ordering {
    b.eval
        .loops
        .cmp(&a.eval.loops)
        .then(b.eval.ifs.cmp(&a.eval.ifs))
        .then(a.eval.gc.cmp(&b.eval.gc))
        .then(a.seq.cmp(&b.seq))
}

struct Queued(SearchNode);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // max-heap: the node to expand first compares greatest
    fn cmp(&self, other: &Self) -> Ordering {
        node_order(&other.0, &self.0)
    }
}

/// Step limit for runs of `p` over `num_objects` objects.
pub fn step_limit(p: &Program, num_objects: usize, multiplier: u64) -> u64 {
    crate::machine::step_bound(p.capacity().max(p.len()), p.loop_depth(), num_objects).saturating_mul(multiplier)
}

/// Runs the executable form of `p` on one example; the post-state reached
/// when the run ends, is truncated or is aborted by `observer`.
fn execute(
    p: &Program,
    e: &Example,
    sig: &ModelSignature,
    limit: u64,
    observer: &mut impl Observer,
) -> Result<(Vec<Value>, RunStatus), Error> {
    let lines = p.executable();
    let mut state = MachineState::init(&e.pre, &e.label.args, sig)?;
    let status = run_observed(&lines, &mut state, sig, limit, observer)?;
    Ok((state.post, status))
}

fn distance(a: &[Value], b: &[Value]) -> u64 {
    a.iter().zip(b).map(|(x, y)| u64::from(x.abs_diff(*y))).sum()
}

/// Goal count: summed absolute difference between the post-states `p`
/// produces and the expected ones.
pub fn f_gc(p: &Program, examples: &ExampleSet, multiplier: u64) -> Result<u64, Error> {
    let sig = examples.signature();
    let limit = step_limit(p, sig.num_objects(), multiplier);
    let mut gc = 0;
    for e in examples {
        let (post, _) = execute(p, e, sig, limit, &mut crate::machine::Unobserved)?;
        gc += distance(&post, &e.post);
    }
    Ok(gc)
}

/// Aborts a run when the watched line writes a value the example's
/// post-state contradicts (R1), or when the watched jump skips an `if`
/// body on an example whose state changes.
struct Watch<'e> {
    line: usize,
    expected: &'e [Value],
    branch: bool,
}

impl Observer for Watch<'_> {
    fn observe(&mut self, line: usize, event: Event, _: &MachineState<'_>) -> bool {
        if line != self.line {
            return true;
        }
        match event {
            Event::PostWrite { index: Some(i), value } if !self.branch => self.expected[i] == value,
            Event::Branch { taken } if self.branch => !taken,
            _ => true,
        }
    }
}

fn watch_for(space: &ProgramSpace, parent: &Program, prod: &Production, r1: bool) -> Option<(usize, bool)> {
    match prod {
        Production::Emit(instr) if r1 && instr.writes_post() => Some((parent.frontier(), false)),
        Production::OpenIf(_) if space.conditions_must_hold(parent) => Some((parent.frontier() + 1, true)),
        _ => None,
    }
}

/// R1: true when programming `prod` makes some example write a value that
/// differs from its post-state.
pub fn prune_r1(prod: &Production, p: &Program, examples: &ExampleSet, multiplier: u64) -> Result<bool, Error> {
    let Production::Emit(instr) = prod else {
        return Ok(false);
    };
    if !instr.writes_post() || !p.fits(prod) {
        return Ok(false);
    }
    let child = p.apply(prod)?;
    let sig = examples.signature();
    let limit = step_limit(&child, sig.num_objects(), multiplier);
    for e in examples {
        let mut w = Watch { line: p.frontier(), expected: &e.post, branch: false };
        if execute(&child, e, sig, limit, &mut w)?.1 == RunStatus::Aborted {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Evaluates a child; `None` when a pruning rule removes it.
fn evaluate_child(
    child: &Program,
    watch: Option<(usize, bool)>,
    examples: &ExampleSet,
    multiplier: u64,
) -> Result<Option<u64>, Error> {
    let sig = examples.signature();
    let limit = step_limit(child, sig.num_objects(), multiplier);
    let mut gc = 0;
    for e in examples {
        let (post, status) = match watch {
            // branches are only constrained on examples that change the state
            Some((line, branch)) if !branch || e.pre != e.post => {
                execute(child, e, sig, limit, &mut Watch { line, expected: &e.post, branch })?
            }
            _ => execute(child, e, sig, limit, &mut crate::machine::Unobserved)?,
        };
        if status == RunStatus::Aborted {
            return Ok(None);
        }
        gc += distance(&post, &e.post);
    }
    Ok(Some(gc))
}

/// Children of `node`, one per surviving grammar proposal, with fresh
/// insertion numbers from `seq`. Returns the children and the number of
/// proposals evaluated.
pub fn expand(
    node: &SearchNode,
    space: &ProgramSpace,
    examples: &ExampleSet,
    cfg: &SynthesisConfig,
    seq: &mut u64,
) -> Result<(Vec<SearchNode>, u64), Error> {
    let mut children = Vec::new();
    let candidates = space.candidates(&node.program);
    let evaluated = candidates.len() as u64;
    for prod in candidates {
        let child = node.program.apply(&prod)?;
        let watch = watch_for(space, &node.program, &prod, cfg.r1);
        if let Some(gc) = evaluate_child(&child, watch, examples, cfg.step_multiplier)? {
            let eval = Eval { loops: child.count_loops(), ifs: child.count_ifs(), gc };
            *seq += 1;
            children.push(SearchNode { program: child, eval, seq: *seq });
        }
    }
    Ok((children, evaluated))
}

fn check_space(examples: &ExampleSet, space: &ProgramSpace) -> Result<(), Error> {
    let (a, b) = (examples.signature(), space.signature());
    if a.state_size() != b.state_size() || a.num_objects() != b.num_objects() || a.num_latent() != b.num_latent() {
        return Err(Error::SignatureMismatch("program space and examples disagree".into()));
    }
    Ok(())
}

/// Closes every structure of a covering program and ends it with `halt`
/// unless it is empty or already fills its budget.
fn complete(p: &Program) -> Result<Program, Error> {
    let mut p = p.close_all()?;
    let halt = Production::Emit(crate::machine::Instruction::Halt);
    if !p.is_empty() && p.fits(&halt) {
        p.apply_mut(&halt)?;
    }
    Ok(p)
}

/// One best-first search with a fixed line budget.
fn search(examples: &ExampleSet, space: &ProgramSpace, cfg: &SynthesisConfig, n: usize) -> Result<SynthesisOutcome, Error> {
    let mut stats = SearchStats { searches: 1, ..SearchStats::default() };
    let root = Program::new(n);
    let gc = f_gc(&root, examples, cfg.step_multiplier)?;
    let mut seq = 0;
    let mut open = BinaryHeap::new();
    open.push(Queued(SearchNode { program: root, eval: Eval { loops: 0, ifs: 0, gc }, seq }));
    while let Some(Queued(node)) = open.pop() {
        if node.eval.gc == 0 {
            // closing an open loop can still break coverage
            let program = complete(&node.program)?;
            if f_gc(&program, examples, cfg.step_multiplier)? == 0 {
                return Ok(SynthesisOutcome { status: SynthesisStatus::Solved, program: Some(program), n_max: n, stats });
            }
        }
        if stats.expanded >= cfg.node_budget {
            return Ok(SynthesisOutcome { status: SynthesisStatus::Budget, program: None, n_max: n, stats });
        }
        stats.expanded += 1;
        let (children, evaluated) = expand(&node, space, examples, cfg, &mut seq)?;
        stats.evaluated += evaluated;
        open.extend(children.into_iter().map(Queued));
    }
    Ok(SynthesisOutcome { status: SynthesisStatus::Exhausted, program: None, n_max: n, stats })
}

/// Best-first search for a program reproducing every example. Without a
/// line budget the language's bound is used; languages without one try
/// budgets 2, 4, 8, ... in turn.
pub fn synthesize(examples: &ExampleSet, space: &ProgramSpace, cfg: &SynthesisConfig) -> Result<SynthesisOutcome, Error> {
    cfg.validate()?;
    check_space(examples, space)?;
    if let Some(n) = cfg.max_lines.or(space.line_bound()) {
        return search(examples, space, cfg, n);
    }
    let mut stats = SearchStats::default();
    let mut n = 2;
    loop {
        let mut out = search(examples, space, cfg, n)?;
        stats.add(out.stats);
        out.stats = stats;
        if out.status != SynthesisStatus::Exhausted || n >= MAX_ESCALATED_LINES {
            return Ok(out);
        }
        n *= 2;
    }
}

/// Index of the first example `p` gets wrong.
pub fn first_mismatch(p: &Program, examples: &ExampleSet, multiplier: u64) -> Result<Option<usize>, Error> {
    let sig = examples.signature();
    let limit = step_limit(p, sig.num_objects(), multiplier);
    for (i, e) in examples.iter().enumerate() {
        if execute(p, e, sig, limit, &mut crate::machine::Unobserved)?.0 != e.post {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Synthesis from a growing batch: start with the first examples, and add
/// the first example the current solution gets wrong until none is left.
pub fn synthesize_incremental(
    examples: &ExampleSet,
    space: &ProgramSpace,
    cfg: &SynthesisConfig,
) -> Result<SynthesisOutcome, Error> {
    cfg.validate()?;
    let mut batch: Vec<usize> = (0..cfg.initial_batch.min(examples.len())).collect();
    let mut stats = SearchStats::default();
    loop {
        let mut out = synthesize(&examples.select(&batch), space, cfg)?;
        stats.add(out.stats);
        out.stats = stats;
        let Some(p) = &out.program else {
            return Ok(out);
        };
        match first_mismatch(p, examples, cfg.step_multiplier)? {
            None => return Ok(out),
            Some(i) => {
                // a solution of the batch reproduces the batch
                debug_assert!(!batch.contains(&i));
                batch.push(i);
            }
        }
    }
}

/// Latent count and action arity for the examples of one label.
pub fn label_space(
    examples: &ExampleSet,
    label: &str,
    cfg: &SynthesisConfig,
) -> Result<(ExampleSet, ProgramSpace), Error> {
    let sig = examples.signature();
    let arity = examples.arity_of(label)?.unwrap_or(0);
    let latent = cfg.num_latent.unwrap_or(sig.num_latent()).max(arity);
    let sig = sig.with_latent(latent);
    let examples = examples.with_signature(sig.clone())?;
    let space = ProgramSpace::new(sig.language(), sig, arity)?;
    Ok((examples, space))
}

/// Synthesis for the examples of one label, plain or incremental.
pub fn synthesize_label(examples: &ExampleSet, label: &str, cfg: &SynthesisConfig) -> Result<SynthesisOutcome, Error> {
    let indices: Vec<usize> = (0..examples.len()).filter(|&i| examples.examples()[i].label.name == label).collect();
    let (examples, space) = label_space(&examples.select(&indices), label, cfg)?;
    if examples.is_empty() {
        return Err(Error::NoExamples);
    }
    if cfg.incremental {
        synthesize_incremental(&examples, &space, cfg)
    } else {
        synthesize(&examples, &space, cfg)
    }
}

/// One outcome per action label, in label order.
pub fn synthesize_all(examples: &ExampleSet, cfg: &SynthesisConfig) -> Result<BTreeMap<String, SynthesisOutcome>, Error> {
    if examples.is_empty() {
        return Err(Error::NoExamples);
    }
    let mut out = BTreeMap::new();
    for (label, group) in examples.partition_by_label() {
        let outcome = synthesize_label(&group, &label, cfg)?;
        out.insert(label, outcome);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
