use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::Error;
use crate::machine::{Address, Atom, Instruction, LatentId, ModelSignature, Reg, Value};
use crate::program::{Condition, Production, Program};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PredicateSignature {
    pub name: String,
    pub arity: u8,
}

impl PredicateSignature {
    pub fn new(name: impl Into<String>, arity: u8) -> Self {
        PredicateSignature { name: name.into(), arity }
    }

    /// The predicates of a STRIPS signature, in declaration order.
    pub fn all(sig: &ModelSignature) -> Vec<PredicateSignature> {
        sig.state_vars().iter().map(|v| PredicateSignature::new(v.name.clone(), v.arity)).collect()
    }
}

/// An atom over the schema parameters; `args` are parameter positions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub pred: String,
    pub args: Vec<usize>,
    /// False for negated preconditions.
    pub positive: bool,
}

impl Literal {
    pub fn new(pred: impl Into<String>, args: &[usize], positive: bool) -> Self {
        Literal { pred: pred.into(), args: args.to_vec(), positive }
    }

    fn same_atom(&self, other: &Literal) -> bool {
        self.pred == other.pred && self.args == other.args
    }
}

/// A lifted STRIPS operator `<par, pre, eff+, eff->`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StripsSchema {
    pub name: String,
    pub params: Vec<String>,
    pub pre: Vec<Literal>,
    pub add: Vec<Literal>,
    pub del: Vec<Literal>,
}

impl StripsSchema {
    /// Rename the parameters, keeping their order.
    pub fn with_param_names(mut self, names: &[&str]) -> Result<Self, Error> {
        if names.len() != self.params.len() {
            return Err(Error::InvalidSchema(format!(
                "{} names for {} parameters",
                names.len(),
                self.params.len()
            )));
        }
        self.params = names.iter().map(|n| n.trim_start_matches('?').to_string()).collect();
        Ok(self)
    }

    /// Checks `eff- ⊆ pre`, `eff+ ∩ eff- = ∅` and that there is an effect.
    pub fn validate(&self) -> Result<(), Error> {
        if self.add.is_empty() && self.del.is_empty() {
            return Err(Error::InvalidSchema(format!("`{}` has no effects", self.name)));
        }
        for d in &self.del {
            if self.add.iter().any(|a| a.same_atom(d)) {
                return Err(Error::InvalidSchema(format!("`{}` both adds and deletes {}", self.name, d.pred)));
            }
            if !self.pre.iter().any(|p| p.positive && p.same_atom(d)) {
                return Err(Error::InvalidSchema(format!(
                    "`{}` deletes {} without requiring it",
                    self.name, d.pred
                )));
            }
        }
        for l in self.pre.iter().chain(&self.add).chain(&self.del) {
            if let Some(&a) = l.args.iter().find(|&&a| a >= self.params.len()) {
                return Err(Error::InvalidSchema(format!("{} uses parameter {a} out of range", l.pred)));
            }
        }
        Ok(())
    }

    fn ground(&self, l: &Literal, args: &[usize], sig: &ModelSignature) -> Result<usize, Error> {
        let pred = sig
            .pred_index(&l.pred)
            .ok_or_else(|| Error::SignatureMismatch(format!("unknown predicate `{}`", l.pred)))?;
        let objects: Vec<i64> = l.args.iter().map(|&a| args[a] as i64).collect();
        sig.ground_index(pred, &objects)
            .ok_or_else(|| Error::SignatureMismatch(format!("`{}` grounded out of range", l.pred)))
    }

    /// Whether every precondition holds in `state` for `args`.
    pub fn applicable(&self, state: &[Value], args: &[usize], sig: &ModelSignature) -> Result<bool, Error> {
        self.check_call(state, args, sig)?;
        for l in &self.pre {
            let v = state[self.ground(l, args, sig)?];
            if (v != 0) != l.positive {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// STRIPS successor: deletes then adds when applicable, otherwise the
    /// state unchanged (the behaviour of the equivalent RAM program).
    pub fn apply(&self, state: &[Value], args: &[usize], sig: &ModelSignature) -> Result<Vec<Value>, Error> {
        let mut next = state.to_vec();
        if self.applicable(state, args, sig)? {
            for l in &self.del {
                next[self.ground(l, args, sig)?] = 0;
            }
            for l in &self.add {
                next[self.ground(l, args, sig)?] = 1;
            }
        }
        Ok(next)
    }

    fn check_call(&self, state: &[Value], args: &[usize], sig: &ModelSignature) -> Result<(), Error> {
        if state.len() != sig.state_size() {
            return Err(Error::DimensionMismatch { expected: sig.state_size(), found: state.len() });
        }
        if args.len() != self.params.len() {
            return Err(Error::InvalidSchema(format!(
                "`{}` takes {} arguments, got {}",
                self.name,
                self.params.len(),
                args.len()
            )));
        }
        if let Some(&arg) = args.iter().find(|&&a| a >= sig.num_objects()) {
            return Err(Error::ArgumentOutOfRange { arg, objects: sig.num_objects() });
        }
        Ok(())
    }

    /// PDDL rendering of the operator.
    pub fn to_pddl_text(&self) -> Result<String, Error> {
        self.validate()?;
        let atom = |l: &Literal| {
            let mut s = format!("({}", l.pred);
            for &a in &l.args {
                s.push_str(" ?");
                s.push_str(&self.params[a]);
            }
            s.push(')');
            if l.positive {
                s
            } else {
                format!("(not {s})")
            }
        };
        let mut out = String::new();
        let _ = writeln!(out, "(:action {}", self.name);
        let params: Vec<String> = self.params.iter().map(|p| format!("?{p}")).collect();
        let _ = writeln!(out, " :parameters ({})", params.join(" "));
        let pre: Vec<String> = self.pre.iter().map(atom).collect();
        let _ = writeln!(out, " :precondition (and {})", pre.join(" "));
        let eff: Vec<String> = self
            .add
            .iter()
            .map(atom)
            .chain(self.del.iter().map(|l| atom(&Literal { positive: false, ..l.clone() })))
            .collect();
        let _ = writeln!(out, " :effect (and {}))", eff.join(" "));
        Ok(out)
    }
}

/// Alias of [`StripsSchema::to_pddl_text`].
pub fn schema_to_pddl_text(s: &StripsSchema) -> Result<String, Error> {
    s.to_pddl_text()
}

/// Reads a program of the STRIPS grammar as an operator: the tests of the
/// if-nest are the preconditions, assignments of 1 and 0 the effects.
/// Parameters are the latent registers bound to action arguments.
pub fn strips_schema_from_program(
    name: &str,
    p: &Program,
    sig: &ModelSignature,
    arity: usize,
) -> Result<StripsSchema, Error> {
    let closed = p.close_all()?;
    let num_latent = sig.num_latent();
    if arity > num_latent {
        return Err(Error::TooManyArguments { args: arity, latent: num_latent });
    }
    let first_param = num_latent - arity;
    let literal = |a: &Atom, positive: bool| -> Result<Literal, Error> {
        let var = sig
            .state_vars()
            .get(a.pred as usize)
            .ok_or_else(|| Error::NotStrips(format!("predicate {} not in signature", a.pred)))?;
        let mut args = Vec::with_capacity(a.arity());
        for z in a.args() {
            if z.index() < first_param {
                return Err(Error::NotStrips(format!("{z} is not an action parameter")));
            }
            args.push(z.index() - first_param);
        }
        Ok(Literal { pred: var.name.clone(), args, positive })
    };

    let mut pre = Vec::new();
    let mut add = Vec::new();
    let mut del = Vec::new();
    let mut in_effects = false;
    let mut depth = 0usize;
    let lines = closed.lines();
    let mut i = 0;
    while i < lines.len() {
        match (lines[i], lines.get(i + 1)) {
            (Instruction::Test(Reg::Pre(Address::Indirect(a))), Some(Instruction::Jmp(j)))
                if !in_effects && j.target > i + 1 =>
            {
                let cond = Condition::recover(&lines[i], j.guard)
                    .ok_or_else(|| Error::NotStrips(format!("line {i}: unsupported test")))?;
                pre.push(literal(&a, matches!(cond, Condition::IsPositive(_)))?);
                depth += 1;
                i += 2;
            }
            (Instruction::SetConst(Reg::Post(Address::Indirect(a)), bit), _) => {
                in_effects = true;
                let l = literal(&a, true)?;
                if add.iter().chain(del.iter()).any(|o: &Literal| o.same_atom(&l)) {
                    return Err(Error::NotStrips(format!("line {i}: atom assigned twice")));
                }
                if bit {
                    add.push(l);
                } else {
                    del.push(l);
                }
                i += 1;
            }
            (Instruction::Halt, _) if i + 1 == lines.len() => i += 1,
            (instr, _) => {
                return Err(Error::NotStrips(format!("line {i}: {instr:?} outside the STRIPS grammar")));
            }
        }
    }
    // every jump of the nest must skip to the end of the effect block
    let end = lines.len() - usize::from(matches!(lines.last(), Some(Instruction::Halt)));
    let nest_ok = lines.iter().filter_map(Instruction::jump).all(|j| j.target == end);
    if !nest_ok || depth != lines.iter().filter(|l| l.jump().is_some()).count() {
        return Err(Error::NotStrips("conditions are not a single nest around the effects".into()));
    }
    let params = (first_param..num_latent).map(|z| format!("v{}", z + 1)).collect();
    Ok(StripsSchema { name: name.to_string(), params, pre, add, del })
}

/// The STRIPS-grammar program of a schema: conditions and effects in
/// canonical atom order.
pub fn schema_to_program(s: &StripsSchema, sig: &ModelSignature) -> Result<Program, Error> {
    let num_latent = sig.num_latent();
    if s.params.len() > num_latent {
        return Err(Error::TooManyArguments { args: s.params.len(), latent: num_latent });
    }
    let first_param = num_latent - s.params.len();
    let atom = |l: &Literal| -> Result<Atom, Error> {
        let pred = sig
            .pred_index(&l.pred)
            .ok_or_else(|| Error::SignatureMismatch(format!("unknown predicate `{}`", l.pred)))?;
        if sig.state_vars()[pred as usize].arity as usize != l.args.len() {
            return Err(Error::InvalidSchema(format!("`{}` has the wrong arity", l.pred)));
        }
        let args: Vec<LatentId> = l.args.iter().map(|&a| LatentId((first_param + a) as u8)).collect();
        Ok(Atom::new(pred, &args))
    };
    let mut conds = Vec::new();
    for l in &s.pre {
        conds.push((atom(l)?, l.positive));
    }
    conds.sort();
    let mut effects = Vec::new();
    for l in &s.add {
        effects.push((atom(l)?, true));
    }
    for l in &s.del {
        effects.push((atom(l)?, false));
    }
    effects.sort();

    let mut p = Program::new(conds.len() * 2 + effects.len());
    for (a, positive) in conds {
        let c = if positive { Condition::IsPositive(Reg::pre(a)) } else { Condition::IsZero(Reg::pre(a)) };
        p.apply_mut(&Production::OpenIf(c))?;
    }
    for (a, bit) in effects {
        p.apply_mut(&Production::Emit(Instruction::SetConst(Reg::post(a), bit)))?;
    }
    p.close_all()
}
