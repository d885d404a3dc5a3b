use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::examples::{Example, ExampleSet, Label};
use crate::language::{Literal, StripsSchema};
use crate::machine::{LanguageId, ModelSignature, StateVar, Value};
use crate::rng::Lcg;

/// A grounded STRIPS domain: signature, operators and an initial state.
#[derive(Clone, Debug)]
pub struct StripsDomain {
    pub signature: ModelSignature,
    pub schemas: Vec<StripsSchema>,
    pub init: Vec<Value>,
    /// Object names, index order.
    pub objects: Vec<String>,
}

impl StripsDomain {
    fn build(
        objects: Vec<String>,
        preds: &[(&str, u8)],
        schemas: Vec<StripsSchema>,
        init: &[(&str, &[usize])],
    ) -> Result<Self, Error> {
        let vars = preds.iter().map(|&(n, k)| StateVar::boolean(n, k)).collect();
        let latent = schemas.iter().map(|s| s.params.len()).max().unwrap_or(0);
        let signature = ModelSignature::new(objects.len(), vars, latent, LanguageId::Strips)?;
        let mut state = vec![0; signature.state_size()];
        for (name, args) in init {
            state[Self::index(&signature, name, args)?] = 1;
        }
        for s in &schemas {
            s.validate()?;
        }
        Ok(StripsDomain { signature, schemas, init: state, objects })
    }

    fn index(sig: &ModelSignature, name: &str, args: &[usize]) -> Result<usize, Error> {
        let p = sig.pred_index(name).ok_or_else(|| Error::InvalidSignature(format!("no predicate `{name}`")))?;
        let args: Vec<i64> = args.iter().map(|&a| a as i64).collect();
        sig.ground_index(p, &args).ok_or_else(|| Error::InvalidSignature(format!("bad atom `{name}`")))
    }

    /// Truth of a ground atom in `state`.
    pub fn holds(&self, state: &[Value], name: &str, args: &[usize]) -> bool {
        Self::index(&self.signature, name, args).is_ok_and(|i| state[i] != 0)
    }

    pub fn schema(&self, name: &str) -> Option<&StripsSchema> {
        self.schemas.iter().find(|s| s.name == name)
    }

    /// Applicable ground actions with pairwise distinct arguments, in
    /// schema order then lexicographic argument order.
    pub fn applicable(&self, state: &[Value]) -> Vec<(usize, Vec<usize>)> {
        let n = self.signature.num_objects();
        let mut out = Vec::new();
        for (si, s) in self.schemas.iter().enumerate() {
            let k = s.params.len();
            for code in 0..n.pow(k as u32) {
                // row-major decoding, first argument most significant
                let mut args = vec![0usize; k];
                let mut c = code;
                for a in args.iter_mut().rev() {
                    *a = c % n;
                    c /= n;
                }
                let distinct = (0..k).all(|i| (0..i).all(|j| args[i] != args[j]));
                if distinct && s.applicable(state, &args, &self.signature).unwrap_or(false) {
                    out.push((si, args));
                }
            }
        }
        out
    }

    fn example(&self, state: &[Value], action: &(usize, Vec<usize>)) -> Example {
        let s = &self.schemas[action.0];
        let post = s.apply(state, &action.1, &self.signature).expect("grounded action is well formed");
        Example::new(state.to_vec(), Label::new(s.name.clone(), &action.1), post)
    }

    /// A random walk of `count` transitions from the initial state, each
    /// drawn uniformly among the applicable ground actions.
    pub fn random_walk(&self, count: usize, seed: u64) -> Result<ExampleSet, Error> {
        let mut rng = Lcg::new(seed);
        let mut state = self.init.clone();
        let mut examples = Vec::with_capacity(count);
        for _ in 0..count {
            let actions = self.applicable(&state);
            if actions.is_empty() {
                break;
            }
            let e = self.example(&state, &actions[rng.below(actions.len())]);
            state = e.post.clone();
            examples.push(e);
        }
        ExampleSet::new(self.signature.clone(), examples)
    }

    /// Every transition between states reachable from the initial state,
    /// breadth first; `None` if more than `max_states` states are reachable.
    pub fn reachable_transitions(&self, max_states: usize) -> Option<ExampleSet> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        let mut examples = Vec::new();
        seen.insert(self.init.clone());
        queue.push_back(self.init.clone());
        while let Some(state) = queue.pop_front() {
            for a in self.applicable(&state) {
                let e = self.example(&state, &a);
                if seen.insert(e.post.clone()) {
                    if seen.len() > max_states {
                        return None;
                    }
                    queue.push_back(e.post.clone());
                }
                examples.push(e);
            }
        }
        ExampleSet::new(self.signature.clone(), examples).ok()
    }

    /// Every state reachable from the initial state.
    pub fn reachable_states(&self, max_states: usize) -> Option<Vec<Vec<Value>>> {
        let es = self.reachable_transitions(max_states)?;
        let mut states: BTreeSet<Vec<Value>> = es.iter().map(|e| e.pre.clone()).collect();
        states.insert(self.init.clone());
        Some(states.into_iter().collect())
    }
}

fn lit(pred: &str, args: &[usize]) -> Literal {
    Literal::new(pred, args, true)
}

fn schema(name: &str, params: &[&str], pre: Vec<Literal>, add: Vec<Literal>, del: Vec<Literal>) -> StripsSchema {
    StripsSchema {
        name: name.into(),
        params: params.iter().map(|p| String::from(*p)).collect(),
        pre,
        add,
        del,
    }
}

/// The Tower of Hanoi move operator over `on/2`, `clear/1`, `smaller/2`,
/// where `smaller(x, y)` says `y` may rest on `x`.
pub fn hanoi_move() -> StripsSchema {
    let (disc, from, to) = (0, 1, 2);
    schema(
        "move",
        &["disc", "from", "to"],
        vec![lit("smaller", &[to, disc]), lit("on", &[disc, from]), lit("clear", &[disc]), lit("clear", &[to])],
        vec![lit("clear", &[from]), lit("on", &[disc, to])],
        vec![lit("on", &[disc, from]), lit("clear", &[to])],
    )
}

/// `discs` discs `d0` (smallest) .. then pegs `p0..p2`, all discs stacked
/// on `p0`.
pub fn hanoi(discs: usize) -> Result<StripsDomain, Error> {
    if discs == 0 {
        return Err(Error::InvalidParameters("at least one disc".into()));
    }
    let mut objects: Vec<String> = (0..discs).map(|i| format!("d{i}")).collect();
    objects.extend((0..3).map(|i| format!("p{i}")));
    let peg = |i: usize| discs + i;
    let mut init: Vec<(&str, Vec<usize>)> = Vec::new();
    for d in 0..discs {
        let below = if d + 1 < discs { d + 1 } else { peg(0) };
        init.push(("on", vec![d, below]));
        for x in d + 1..discs + 3 {
            init.push(("smaller", vec![x, d]));
        }
    }
    init.push(("clear", vec![0]));
    init.push(("clear", vec![peg(1)]));
    init.push(("clear", vec![peg(2)]));
    let init: Vec<(&str, &[usize])> = init.iter().map(|(n, a)| (*n, a.as_slice())).collect();
    StripsDomain::build(objects, &[("on", 2), ("clear", 1), ("smaller", 2)], vec![hanoi_move()], &init)
}

/// The four-operator blocksworld; all blocks start on the table.
pub fn blocks(n: usize) -> Result<StripsDomain, Error> {
    if n == 0 {
        return Err(Error::InvalidParameters("at least one block".into()));
    }
    let objects = (0..n).map(|i| format!("b{i}")).collect();
    let (x, y) = (0, 1);
    let schemas = vec![
        schema(
            "pick-up",
            &["x"],
            vec![lit("ontable", &[x]), lit("clear", &[x]), lit("handempty", &[])],
            vec![lit("holding", &[x])],
            vec![lit("ontable", &[x]), lit("clear", &[x]), lit("handempty", &[])],
        ),
        schema(
            "put-down",
            &["x"],
            vec![lit("holding", &[x])],
            vec![lit("ontable", &[x]), lit("clear", &[x]), lit("handempty", &[])],
            vec![lit("holding", &[x])],
        ),
        schema(
            "stack",
            &["x", "y"],
            vec![lit("clear", &[y]), lit("holding", &[x])],
            vec![lit("on", &[x, y]), lit("clear", &[x]), lit("handempty", &[])],
            vec![lit("clear", &[y]), lit("holding", &[x])],
        ),
        schema(
            "unstack",
            &["x", "y"],
            vec![lit("on", &[x, y]), lit("clear", &[x]), lit("handempty", &[])],
            vec![lit("clear", &[y]), lit("holding", &[x])],
            vec![lit("on", &[x, y]), lit("clear", &[x]), lit("handempty", &[])],
        ),
    ];
    let mut init: Vec<(&str, Vec<usize>)> = vec![("handempty", vec![])];
    for b in 0..n {
        init.push(("ontable", vec![b]));
        init.push(("clear", vec![b]));
    }
    let init: Vec<(&str, &[usize])> = init.iter().map(|(n, a)| (*n, a.as_slice())).collect();
    StripsDomain::build(
        objects,
        &[("on", 2), ("ontable", 1), ("clear", 1), ("handempty", 0), ("holding", 1)],
        schemas,
        &init,
    )
}

/// Gripper with two rooms, two grippers and `balls` balls in the first
/// room; object types are static unary predicates.
pub fn gripper(balls: usize) -> Result<StripsDomain, Error> {
    let mut objects: Vec<String> = vec!["rooma".into(), "roomb".into()];
    objects.extend((0..balls).map(|i| format!("ball{i}")));
    objects.extend(["left".into(), "right".into()]);
    let ball = |i: usize| 2 + i;
    let (left, right) = (2 + balls, 3 + balls);
    let (b, r, g) = (0, 1, 2);
    let schemas = vec![
        schema(
            "move",
            &["from", "to"],
            vec![lit("room", &[0]), lit("room", &[1]), lit("at-robby", &[0])],
            vec![lit("at-robby", &[1])],
            vec![lit("at-robby", &[0])],
        ),
        schema(
            "pick",
            &["obj", "room", "gripper"],
            vec![
                lit("ball", &[b]),
                lit("room", &[r]),
                lit("gripper", &[g]),
                lit("at", &[b, r]),
                lit("at-robby", &[r]),
                lit("free", &[g]),
            ],
            vec![lit("carry", &[b, g])],
            vec![lit("at", &[b, r]), lit("free", &[g])],
        ),
        schema(
            "drop",
            &["obj", "room", "gripper"],
            vec![
                lit("ball", &[b]),
                lit("room", &[r]),
                lit("gripper", &[g]),
                lit("carry", &[b, g]),
                lit("at-robby", &[r]),
            ],
            vec![lit("at", &[b, r]), lit("free", &[g])],
            vec![lit("carry", &[b, g])],
        ),
    ];
    let mut init: Vec<(&str, Vec<usize>)> = vec![
        ("room", vec![0]),
        ("room", vec![1]),
        ("at-robby", vec![0]),
        ("gripper", vec![left]),
        ("gripper", vec![right]),
        ("free", vec![left]),
        ("free", vec![right]),
    ];
    for i in 0..balls {
        init.push(("ball", vec![ball(i)]));
        init.push(("at", vec![ball(i), 0]));
    }
    let init: Vec<(&str, &[usize])> = init.iter().map(|(n, a)| (*n, a.as_slice())).collect();
    StripsDomain::build(
        objects,
        &[
            ("room", 1),
            ("ball", 1),
            ("gripper", 1),
            ("at-robby", 1),
            ("at", 2),
            ("free", 1),
            ("carry", 2),
        ],
        schemas,
        &init,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hanoi_register_count() {
        let d = hanoi(1).unwrap();
        // |Ω| = 4: on 16 + clear 4 + smaller 16
        assert_eq!(d.signature.state_size(), 36);
        assert_eq!(d.signature.num_latent(), 3);
    }

    #[test]
    fn first_hanoi_moves_are_those_of_the_smallest_disc() {
        let d = hanoi(3).unwrap();
        let moves = d.applicable(&d.init);
        assert_eq!(moves, vec![(0, vec![0, 1, 4]), (0, vec![0, 1, 5])]);
        let e = d.example(&d.init, &moves[1]);
        assert!(d.holds(&e.post, "on", &[0, 5]));
        assert!(d.holds(&e.post, "clear", &[1]));
        assert!(!d.holds(&e.post, "clear", &[5]));
        assert!(!d.holds(&e.post, "on", &[0, 1]));
    }

    #[test]
    fn hanoi_reaches_all_tower_states() {
        // 3^n configurations of n discs over three pegs
        for n in 1..=3 {
            let d = hanoi(n).unwrap();
            assert_eq!(d.reachable_states(1000).unwrap().len(), 3usize.pow(n as u32));
        }
    }

    #[test]
    fn walks_respect_preconditions_and_replay() {
        for d in [hanoi(3).unwrap(), blocks(3).unwrap(), gripper(2).unwrap()] {
            let es = d.random_walk(40, 5).unwrap();
            assert_eq!(es, d.random_walk(40, 5).unwrap());
            for e in es.examples() {
                let s = d.schema(&e.label.name).unwrap();
                assert!(s.applicable(&e.pre, &e.label.args, &d.signature).unwrap());
                assert_ne!(e.pre, e.post);
            }
        }
    }

    #[test]
    fn gripper_trace_uses_all_three_actions() {
        let d = gripper(2).unwrap();
        let es = d.random_walk(60, 1).unwrap();
        let groups = es.partition_by_label();
        assert_eq!(groups.keys().map(|k| k.as_str()).collect::<Vec<_>>(), ["drop", "move", "pick"]);
        assert_eq!(groups.values().map(ExampleSet::len).sum::<usize>(), 60);
    }

    #[test]
    fn blocks_reachable_states_of_three() {
        // 13 towers configurations, each with an empty hand, plus states
        // holding one of 3 blocks over towers of the other 2 (3 * 3)
        let d = blocks(3).unwrap();
        assert_eq!(d.reachable_states(10_000).unwrap().len(), 22);
    }
}
