use super::*;
use crate::domains::{flip_program, gen_ca_traces, gen_pancake_traces, pancake_signature};
use crate::examples::Label;
use crate::machine::{Atom, Instruction, LanguageId, LatentId, Reg};
use crate::validate::validate;
use alloc::vec;

fn pancake_examples() -> ExampleSet {
    let e = |pre: [i32; 4], k: usize, post: [i32; 4]| Example::new(pre.to_vec(), Label::new("flip", &[k]), post.to_vec());
    ExampleSet::new(
        pancake_signature(4).unwrap(),
        vec![
            e([3, 2, 1, 4], 2, [1, 2, 3, 4]),
            e([2, 3, 1, 4], 1, [3, 2, 1, 4]),
            e([1, 3, 2, 4], 2, [2, 3, 1, 4]),
        ],
    )
    .unwrap()
}

fn pancake_space() -> ProgramSpace {
    ProgramSpace::new(LanguageId::GeneralRam, pancake_signature(4).unwrap(), 1).unwrap()
}

fn node(loops: usize, ifs: usize, gc: u64, seq: u64) -> SearchNode {
    SearchNode { program: Program::new(1), eval: Eval { loops, ifs, gc }, seq }
}

#[test]
fn goal_count_of_empty_program() {
    let es = pancake_examples().select(&[0]);
    assert_eq!(f_gc(&Program::new(8), &es, 4).unwrap(), 4);
    let all = pancake_examples();
    // independent re-sum of |post - pre| over every example
    let brute: u64 = all.iter().flat_map(|e| e.pre.iter().zip(&e.post).map(|(a, b)| (a - b).unsigned_abs() as u64)).sum();
    assert_eq!(f_gc(&Program::new(8), &all, 4).unwrap(), brute);
}

#[test]
fn flip_program_covers_the_examples() {
    assert_eq!(f_gc(&flip_program(), &pancake_examples(), 4).unwrap(), 0);
    let empty = pancake_examples().select(&[]);
    assert_eq!(f_gc(&Program::new(3), &empty, 4).unwrap(), 0);
}

#[test]
fn node_ordering() {
    assert_eq!(node_order(&node(1, 0, 9, 5), &node(0, 5, 0, 1)), Ordering::Less);
    assert_eq!(node_order(&node(0, 2, 9, 5), &node(0, 1, 0, 1)), Ordering::Less);
    assert_eq!(node_order(&node(0, 0, 2, 9), &node(0, 0, 7, 1)), Ordering::Less);
    assert_eq!(node_order(&node(0, 0, 2, 1), &node(0, 0, 2, 3)), Ordering::Less);
    assert_eq!(node_order(&node(0, 0, 2, 3), &node(0, 0, 2, 1)), Ordering::Greater);
}

fn f(z: u8) -> Atom {
    Atom::new(0, &[LatentId(z)])
}

#[test]
fn r1_on_flip_writes() {
    let es = pancake_examples();
    // every example swaps the top pancake with pancake k
    let keep = Production::Emit(Instruction::SetReg(Reg::post(f(1)), Reg::pre(f(0))));
    assert!(!prune_r1(&keep, &Program::new(8), &es, 4).unwrap());
    let wrong = Production::Emit(Instruction::SetReg(Reg::post(f(0)), Reg::pre(f(0))));
    assert!(prune_r1(&wrong, &Program::new(8), &es, 4).unwrap());
    // inside an unfinished loop the write repeats without the later dec
    let mut p = Program::new(8);
    p.apply_mut(&Production::OpenFor(LatentId(0))).unwrap();
    p.apply_mut(&Production::OpenIf(crate::program::Condition::Less(Reg::latent(0), Reg::latent(1)))).unwrap();
    let repeated = Production::Emit(Instruction::SetReg(Reg::post(f(0)), Reg::pre(f(1))));
    assert!(prune_r1(&repeated, &p, &es, 4).unwrap());
    assert!(!prune_r1(&Production::Emit(Instruction::Inc(Reg::latent(1))), &p, &es, 4).unwrap());
}

#[test]
fn r1_prunes_direct_contradiction() {
    let sig = ModelSignature::new(2, vec![crate::machine::StateVar::boolean("p", 1)], 1, LanguageId::GeneralRam).unwrap();
    let es = ExampleSet::new(sig, vec![Example::new(vec![1, 0], Label::new("a", &[]), vec![0, 0])]).unwrap();
    let set = Production::Emit(Instruction::SetConst(Reg::Post(crate::machine::Address::Direct(0)), true));
    assert!(prune_r1(&set, &Program::new(4), &es, 4).unwrap());
    let clear = Production::Emit(Instruction::SetConst(Reg::Post(crate::machine::Address::Direct(0)), false));
    assert!(!prune_r1(&clear, &Program::new(4), &es, 4).unwrap());
}

#[test]
fn expansion_of_empty_automaton() {
    let es = gen_ca_traces(30, 9, 3, None).unwrap();
    let space = ProgramSpace::new(LanguageId::Ca1D, es.signature().clone(), 0).unwrap();
    let root = SearchNode { program: Program::new(95), eval: Eval { loops: 0, ifs: 0, gc: 0 }, seq: 0 };
    let mut seq = 0;
    let (children, evaluated) = expand(&root, &space, &es, &SynthesisConfig::default(), &mut seq).unwrap();
    assert_eq!((children.len(), evaluated), (1, 1));
    assert_eq!(children[0].eval.loops, 1);
    let full = SearchNode { program: Program::new(0), ..root };
    assert!(expand(&full, &space, &es, &SynthesisConfig::default(), &mut seq).unwrap().0.is_empty());
}

#[test]
fn children_carry_fresh_evaluations() {
    let es = pancake_examples();
    let space = pancake_space();
    let root = SearchNode { program: Program::new(8), eval: Eval { loops: 0, ifs: 0, gc: 12 }, seq: 0 };
    let mut seq = 0;
    let (children, evaluated) = expand(&root, &space, &es, &SynthesisConfig::default(), &mut seq).unwrap();
    assert!(children.len() as u64 <= evaluated);
    let seqs: Vec<u64> = children.iter().map(|c| c.seq).collect();
    assert!(seqs.windows(2).all(|w| w[0] < w[1]));
    for c in &children {
        assert_eq!(c.eval.gc, f_gc(&c.program, &es, 4).unwrap());
        assert_eq!((c.eval.loops, c.eval.ifs), (c.program.count_loops(), c.program.count_ifs()));
    }
}

#[test]
fn identity_examples_need_no_program() {
    let es = gen_ca_traces(204, 9, 4, None).unwrap();
    let space = ProgramSpace::new(LanguageId::Ca1D, es.signature().clone(), 0).unwrap();
    let out = synthesize(&es, &space, &SynthesisConfig::default().with_max_lines(95)).unwrap();
    assert!(out.is_solved());
    assert_eq!(out.n_sol(), Some(0));
    assert_eq!(out.stats.expanded, 0);
}

#[test]
fn pancake_flip_is_found() {
    let es = gen_pancake_traces(6, 8, 3).unwrap();
    let space = ProgramSpace::new(LanguageId::GeneralRam, es.signature().clone(), 1).unwrap();
    let out = synthesize(&es, &space, &SynthesisConfig::default().with_max_lines(8)).unwrap();
    let p = out.program.expect("solved");
    assert_eq!(f_gc(&p, &es, 4).unwrap(), 0);
    let wide = gen_pancake_traces(20, 30, 11).unwrap();
    assert!(validate(&p, &wide, 4).unwrap().is_perfect());
}

#[test]
fn budget_and_exhaustion() {
    let es = pancake_examples();
    let space = pancake_space();
    let cfg = SynthesisConfig { node_budget: 3, ..SynthesisConfig::default().with_max_lines(8) };
    let out = synthesize(&es, &space, &cfg).unwrap();
    assert_eq!(out.status, SynthesisStatus::Budget);
    assert_eq!(out.stats.expanded, 3);
    let es = gen_pancake_traces(5, 10, 4).unwrap();
    let space = ProgramSpace::new(LanguageId::GeneralRam, es.signature().clone(), 1).unwrap();
    let out = synthesize(&es, &space, &SynthesisConfig::default().with_max_lines(2)).unwrap();
    assert_eq!(out.status, SynthesisStatus::Exhausted);
    assert!(out.program.is_none());
}

#[test]
fn escalation_doubles_the_line_budget() {
    let es = pancake_examples();
    let out = synthesize(&es, &pancake_space(), &SynthesisConfig::default()).unwrap();
    assert_eq!((out.n_max, out.n_sol()), (2, Some(2)));
    let es = gen_pancake_traces(6, 12, 5).unwrap();
    let space = ProgramSpace::new(LanguageId::GeneralRam, es.signature().clone(), 1).unwrap();
    let out = synthesize(&es, &space, &SynthesisConfig::default()).unwrap();
    assert!(out.is_solved());
    assert_eq!(out.n_max, 8);
    assert!(out.stats.searches >= 3);
    assert_eq!(f_gc(out.program.as_ref().unwrap(), &es, 4).unwrap(), 0);
}

#[test]
fn incremental_adds_counter_examples() {
    let es = gen_pancake_traces(5, 12, 7).unwrap();
    let space = ProgramSpace::new(LanguageId::GeneralRam, es.signature().clone(), 1).unwrap();
    let cfg = SynthesisConfig { incremental: true, initial_batch: 1, ..SynthesisConfig::default().with_max_lines(8) };
    let out = synthesize_incremental(&es, &space, &cfg).unwrap();
    assert!(out.is_solved());
    assert_eq!(f_gc(out.program.as_ref().unwrap(), &es, 4).unwrap(), 0);
    assert_eq!(first_mismatch(out.program.as_ref().unwrap(), &es, 4).unwrap(), None);
    // a batch at least as large as the set is a plain search
    let big = SynthesisConfig { initial_batch: 50, ..cfg.clone() };
    let plain = synthesize(&es, &space, &SynthesisConfig::default().with_max_lines(8)).unwrap();
    assert_eq!(synthesize_incremental(&es, &space, &big).unwrap(), plain);
}

#[test]
fn search_is_deterministic() {
    let es = pancake_examples();
    let cfg = SynthesisConfig::default().with_max_lines(8);
    let a = synthesize(&es, &pancake_space(), &cfg).unwrap();
    let b = synthesize(&es, &pancake_space(), &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn r1_keeps_the_solution_length() {
    let es = gen_pancake_traces(3, 6, 2).unwrap();
    let space = ProgramSpace::new(LanguageId::GeneralRam, es.signature().clone(), 1).unwrap();
    let on = synthesize(&es, &space, &SynthesisConfig::default()).unwrap();
    let off = synthesize(&es, &space, &SynthesisConfig { r1: false, ..SynthesisConfig::default() }).unwrap();
    assert!(on.is_solved() && off.is_solved());
    assert_eq!(on.n_sol(), off.n_sol());
    assert!(on.stats.evaluated <= off.stats.evaluated);
}

#[test]
fn labels_are_synthesized_separately() {
    let d = crate::domains::gripper(2).unwrap();
    let es = d.random_walk(40, 1).unwrap();
    let out = synthesize_all(&es, &SynthesisConfig::default()).unwrap();
    assert_eq!(out.keys().map(String::as_str).collect::<Vec<_>>(), ["drop", "move", "pick"]);
    for (label, o) in &out {
        let (group, _) = label_space(&es.partition_by_label()[label], label, &SynthesisConfig::default()).unwrap();
        assert_eq!(f_gc(o.program.as_ref().unwrap(), &group, 4).unwrap(), 0, "{label}");
    }
}

#[test]
fn invalid_configurations() {
    let es = pancake_examples();
    let cfg = SynthesisConfig { node_budget: 0, ..SynthesisConfig::default() };
    assert!(matches!(synthesize(&es, &pancake_space(), &cfg), Err(Error::InvalidParameters(_))));
    let cfg = SynthesisConfig::default().with_max_lines(0);
    assert!(matches!(synthesize(&es, &pancake_space(), &cfg), Err(Error::InvalidParameters(_))));
}
