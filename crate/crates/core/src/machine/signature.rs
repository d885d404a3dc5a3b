use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::instr::{Atom, Value};
use crate::error::Error;

/// Target language a signature is meant to be synthesized in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LanguageId {
    GeneralRam,
    Strips,
    StripsQuantified,
    Ca1D,
}

impl LanguageId {
    pub const ALL: [LanguageId; 4] = [
        LanguageId::GeneralRam,
        LanguageId::Strips,
        LanguageId::StripsQuantified,
        LanguageId::Ca1D,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LanguageId::GeneralRam => "ram",
            LanguageId::Strips => "strips",
            LanguageId::StripsQuantified => "strips-quantified",
            LanguageId::Ca1D => "ca1d",
        }
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LanguageId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        LanguageId::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::UnknownLanguage(s.into()))
    }
}

/// A family of state variables `name(o_1, ..., o_arity)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateVar {
    pub name: String,
    pub arity: u8,
    /// Inclusive value range.
    pub domain: (Value, Value),
}

impl StateVar {
    pub fn new(name: impl Into<String>, arity: u8, domain: (Value, Value)) -> Self {
        StateVar { name: name.into(), arity, domain }
    }

    pub fn boolean(name: impl Into<String>, arity: u8) -> Self {
        Self::new(name, arity, (0, 1))
    }

    pub fn is_boolean(&self) -> bool {
        self.domain == (0, 1)
    }
}

/// Dimensions of a RAM model: objects, grounded state variables, latent
/// registers, and the language the model is written in.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModelSignature {
    num_objects: usize,
    state_vars: Vec<StateVar>,
    num_latent: usize,
    language: LanguageId,
    offsets: Vec<usize>,
    state_size: usize,
}

impl ModelSignature {
    pub fn new(
        num_objects: usize,
        state_vars: Vec<StateVar>,
        num_latent: usize,
        language: LanguageId,
    ) -> Result<Self, Error> {
        if num_objects == 0 {
            return Err(Error::InvalidSignature("at least one object is required".into()));
        }
        if state_vars.is_empty() {
            return Err(Error::InvalidSignature("no state variables".into()));
        }
        for (i, v) in state_vars.iter().enumerate() {
            if v.domain.0 > v.domain.1 {
                return Err(Error::InvalidSignature(alloc::format!(
                    "empty domain for `{}`",
                    v.name
                )));
            }
            if v.arity as usize > super::MAX_ARITY {
                return Err(Error::InvalidSignature(alloc::format!(
                    "arity of `{}` exceeds {}",
                    v.name,
                    super::MAX_ARITY
                )));
            }
            if state_vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::InvalidSignature(alloc::format!(
                    "duplicate state variable `{}`",
                    v.name
                )));
            }
            if language == LanguageId::Strips && !v.is_boolean() {
                return Err(Error::InvalidSignature(alloc::format!(
                    "STRIPS state variable `{}` must be Boolean",
                    v.name
                )));
            }
        }
        let mut offsets = Vec::with_capacity(state_vars.len());
        let mut size = 0usize;
        for v in &state_vars {
            offsets.push(size);
            let width = num_objects
                .checked_pow(v.arity as u32)
                .ok_or_else(|| Error::InvalidSignature("state too large".into()))?;
            size = size
                .checked_add(width)
                .ok_or_else(|| Error::InvalidSignature("state too large".into()))?;
        }
        Ok(ModelSignature {
            num_objects,
            state_vars,
            num_latent,
            language,
            offsets,
            state_size: size,
        })
    }

    pub fn num_objects(&self) -> usize {
        self.num_objects
    }

    pub fn state_vars(&self) -> &[StateVar] {
        &self.state_vars
    }

    pub fn num_latent(&self) -> usize {
        self.num_latent
    }

    pub fn language(&self) -> LanguageId {
        self.language
    }

    /// Number of registers in each of the pre- and post-state banks.
    pub fn state_size(&self) -> usize {
        self.state_size
    }

    pub fn pred_index(&self, name: &str) -> Option<u16> {
        self.state_vars.iter().position(|v| v.name == name).map(|i| i as u16)
    }

    /// Same model over a different number of objects.
    pub fn with_objects(&self, num_objects: usize) -> Result<Self, Error> {
        Self::new(num_objects, self.state_vars.clone(), self.num_latent, self.language)
    }

    pub fn with_latent(&self, num_latent: usize) -> Self {
        ModelSignature { num_latent, ..self.clone() }
    }

    pub fn with_language(&self, language: LanguageId) -> Self {
        ModelSignature { language, ..self.clone() }
    }

    /// Register index of the ground atom `pred(objects...)`: predicates in
    /// declaration order, object tuples in row-major order. `None` when an
    /// object is outside `[0, |Ω|)` or the arity does not match.
    pub fn ground_index(&self, pred: u16, objects: &[i64]) -> Option<usize> {
        let var = self.state_vars.get(pred as usize)?;
        if objects.len() != var.arity as usize {
            return None;
        }
        let n = self.num_objects as i64;
        let mut idx = 0usize;
        for &o in objects {
            if o < 0 || o >= n {
                return None;
            }
            idx = idx * self.num_objects + o as usize;
        }
        Some(self.offsets[pred as usize] + idx)
    }

    /// Inverse of [`ground_index`](Self::ground_index).
    pub fn atom_of_index(&self, index: usize) -> Option<(u16, Vec<usize>)> {
        if index >= self.state_size {
            return None;
        }
        let pred = self.offsets.iter().rposition(|&o| o <= index)?;
        let arity = self.state_vars[pred].arity as usize;
        let mut rest = index - self.offsets[pred];
        let mut objects = alloc::vec![0; arity];
        for slot in objects.iter_mut().rev() {
            *slot = rest % self.num_objects;
            rest /= self.num_objects;
        }
        Some((pred as u16, objects))
    }

    pub fn domain_of_index(&self, index: usize) -> Option<(Value, Value)> {
        self.atom_of_index(index).map(|(p, _)| self.state_vars[p as usize].domain)
    }

    /// True when every register reachable through `atom` is Boolean.
    pub fn is_boolean_atom(&self, atom: &Atom) -> bool {
        self.state_vars
            .get(atom.pred as usize)
            .is_some_and(StateVar::is_boolean)
    }
}
