use procmod_core::domains::{gen_ca_traces, gen_pancake_traces, hanoi};
use procmod_core::language::ProgramSpace;
use procmod_core::machine::{run, MachineState, RunStatus};
use procmod_core::synth::{f_gc, synthesize, synthesize_all};
use procmod_core::validate::validate;
use procmod_core::{ExampleSet, Program, SynthesisConfig};
use proptest::prelude::*;

fn check_solution(p: &Program, es: &ExampleSet) {
    assert!(p.is_closed());
    assert!(p.is_well_structured());
    assert!(p.is_terminating());
    assert_eq!(f_gc(p, es, 4).unwrap(), 0);
    assert!(validate(p, es, 4).unwrap().is_perfect());
    let sig = es.signature();
    for e in es {
        let mut m = MachineState::init(&e.pre, &e.label.args, sig).unwrap();
        assert_ne!(run(p.lines(), &mut m, sig, p.step_bound(sig.num_objects())).unwrap(), RunStatus::Truncated);
    }
}

fn cfg(budget: u64) -> SynthesisConfig {
    SynthesisConfig { node_budget: budget, ..SynthesisConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn automaton_solutions_are_sound(rule in 0u32..256, cells in 5usize..9, steps in 1usize..6, bits in proptest::collection::vec(0i32..2, 9)) {
        let es = gen_ca_traces(rule, cells, steps, Some(&bits[..cells])).unwrap();
        let space = ProgramSpace::new(es.signature().language(), es.signature().clone(), 0).unwrap();
        let out = synthesize(&es, &space, &cfg(5_000)).unwrap();
        if let Some(p) = &out.program {
            check_solution(p, &es);
        }
    }

    #[test]
    fn pancake_solutions_are_sound(n in 2usize..6, count in 1usize..8, seed in 0u64..1000) {
        let es = gen_pancake_traces(n, count, seed).unwrap();
        let space = ProgramSpace::new(es.signature().language(), es.signature().clone(), 1).unwrap();
        let out = synthesize(&es, &space, &cfg(5_000)).unwrap();
        if let Some(p) = &out.program {
            check_solution(p, &es);
        }
    }

    #[test]
    fn hanoi_solutions_are_sound(count in 1usize..30, seed in 0u64..1000) {
        let es = hanoi(3).unwrap().random_walk(count, seed).unwrap();
        for (label, out) in synthesize_all(&es, &cfg(5_000)).unwrap() {
            if let Some(p) = &out.program {
                let group = es.partition_by_label().remove(&label).unwrap();
                check_solution(p, &group);
            }
        }
    }
}
