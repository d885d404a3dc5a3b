//! Transition examples `(s, a, s')` and their grouping by action label.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::machine::{ModelSignature, Value};

/// An action name with its object arguments.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub name: String,
    pub args: Vec<usize>,
}

impl Label {
    pub fn new(name: impl Into<String>, args: &[usize]) -> Self {
        Label { name: name.into(), args: args.to_vec() }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Example {
    pub pre: Vec<Value>,
    pub label: Label,
    pub post: Vec<Value>,
}

impl Example {
    pub fn new(pre: Vec<Value>, label: Label, post: Vec<Value>) -> Self {
        Example { pre, label, post }
    }

    /// Dimension, domain and argument checks against `sig`.
    pub fn check(&self, sig: &ModelSignature) -> Result<(), Error> {
        let n = sig.state_size();
        for s in [&self.pre, &self.post] {
            if s.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: s.len() });
            }
            for (i, &v) in s.iter().enumerate() {
                let (lo, hi) = sig.domain_of_index(i).expect("index below state size");
                if v < lo || v > hi {
                    return Err(Error::SignatureMismatch(format!(
                        "register {i} holds {v}, outside [{lo}, {hi}]"
                    )));
                }
            }
        }
        if let Some(&arg) = self.label.args.iter().find(|&&a| a >= sig.num_objects()) {
            return Err(Error::ArgumentOutOfRange { arg, objects: sig.num_objects() });
        }
        if self.label.args.len() > sig.num_latent() {
            return Err(Error::TooManyArguments { args: self.label.args.len(), latent: sig.num_latent() });
        }
        Ok(())
    }
}

/// Examples over one signature, in trace order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExampleSet {
    signature: ModelSignature,
    examples: Vec<Example>,
}

impl ExampleSet {
    /// Checks every example against `signature`.
    pub fn new(signature: ModelSignature, examples: Vec<Example>) -> Result<Self, Error> {
        for e in &examples {
            e.check(&signature)?;
        }
        Ok(ExampleSet { signature, examples })
    }

    pub fn signature(&self) -> &ModelSignature {
        &self.signature
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Example> {
        self.examples.iter()
    }

    /// The same examples under another signature with the same state
    /// layout (e.g. a different language or latent count).
    pub fn with_signature(&self, signature: ModelSignature) -> Result<Self, Error> {
        ExampleSet::new(signature, self.examples.clone())
    }

    /// A subset by indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        ExampleSet {
            signature: self.signature.clone(),
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
        }
    }

    pub fn push(&mut self, e: Example) -> Result<(), Error> {
        e.check(&self.signature)?;
        self.examples.push(e);
        Ok(())
    }

    /// Argument count of the label, which must be the same for all its
    /// examples.
    pub fn arity_of(&self, name: &str) -> Result<Option<usize>, Error> {
        let mut arity = None;
        for e in self.examples.iter().filter(|e| e.label.name == name) {
            match arity {
                None => arity = Some(e.label.args.len()),
                Some(k) if k != e.label.args.len() => {
                    return Err(Error::SignatureMismatch(format!(
                        "action `{name}` used with {k} and {} arguments",
                        e.label.args.len()
                    )))
                }
                _ => {}
            }
        }
        Ok(arity)
    }

    /// `E_a` for every label `a`, keeping trace order inside each group.
    pub fn partition_by_label(&self) -> BTreeMap<String, ExampleSet> {
        let mut groups: BTreeMap<String, ExampleSet> = BTreeMap::new();
        for e in &self.examples {
            groups
                .entry(e.label.name.clone())
                .or_insert_with(|| ExampleSet { signature: self.signature.clone(), examples: Vec::new() })
                .examples
                .push(e.clone());
        }
        groups
    }
}

impl<'a> IntoIterator for &'a ExampleSet {
    type Item = &'a Example;
    type IntoIter = core::slice::Iter<'a, Example>;

    fn into_iter(self) -> Self::IntoIter {
        self.examples.iter()
    }
}

/// Free-function form of [`ExampleSet::partition_by_label`].
pub fn partition_by_label(es: &ExampleSet) -> BTreeMap<String, ExampleSet> {
    es.partition_by_label()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{LanguageId, StateVar};

    fn pancake_sig() -> ModelSignature {
        ModelSignature::new(4, alloc::vec![StateVar::new("f", 1, (1, 4))], 2, LanguageId::GeneralRam).unwrap()
    }

    fn flip(pre: [Value; 4], k: usize, post: [Value; 4]) -> Example {
        Example::new(pre.to_vec(), Label::new("flip", &[k]), post.to_vec())
    }

    #[test]
    fn flip_examples_form_one_group() {
        let es = ExampleSet::new(
            pancake_sig(),
            alloc::vec![
                flip([3, 2, 1, 4], 2, [1, 2, 3, 4]),
                flip([2, 1, 3, 4], 1, [1, 2, 3, 4]),
                flip([1, 3, 2, 4], 2, [2, 3, 1, 4]),
            ],
        )
        .unwrap();
        let groups = es.partition_by_label();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups["flip"].len(), 3);
        assert_eq!(es.arity_of("flip").unwrap(), Some(1));
    }

    #[test]
    fn empty_set_has_no_groups() {
        let es = ExampleSet::new(pancake_sig(), Vec::new()).unwrap();
        assert!(es.partition_by_label().is_empty());
    }

    #[test]
    fn short_state_is_rejected() {
        let e = Example::new(alloc::vec![3, 2, 1], Label::new("flip", &[2]), alloc::vec![1, 2, 3]);
        assert_eq!(
            ExampleSet::new(pancake_sig(), alloc::vec![e]),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        );
    }

    #[test]
    fn out_of_domain_value_is_rejected() {
        let e = flip([0, 2, 1, 4], 2, [1, 2, 0, 4]);
        assert!(matches!(ExampleSet::new(pancake_sig(), alloc::vec![e]), Err(Error::SignatureMismatch(_))));
    }

    #[test]
    fn mixed_arities_are_rejected() {
        let mut es = ExampleSet::new(pancake_sig(), alloc::vec![flip([1, 2, 3, 4], 0, [1, 2, 3, 4])]).unwrap();
        es.push(Example::new(alloc::vec![1, 2, 3, 4], Label::new("flip", &[]), alloc::vec![1, 2, 3, 4])).unwrap();
        assert!(es.arity_of("flip").is_err());
    }
}
