//! `.prog` files: a program in structured text, preceded by a comment line
//! naming the action, its arity and the latent register count it was
//! synthesized with.
//!
//! ```text
//! // action flip 1 2
//! post_state=pre_state;
//! ...
//! return post_state;
//! ```

use std::fs;
use std::path::Path;

use procmod_core::text::{parse_structured_text, parse_with_inferred_signature, to_structured_text};
use procmod_core::validate::latent_needed;
use procmod_core::{ModelSignature, Program};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgFile {
    pub action: Option<String>,
    pub arity: Option<usize>,
    pub latent: Option<usize>,
    pub program: Program,
}

impl ProgFile {
    /// Action arity: the header's, or every latent register the program
    /// mentions.
    pub fn arity(&self) -> usize {
        self.arity.unwrap_or_else(|| latent_needed(&self.program))
    }
}

/// `sig` supplies predicate names and the latent count.
pub fn render_prog(action: &str, arity: usize, p: &Program, sig: &ModelSignature) -> Result<String, CliError> {
    let latent = sig.num_latent();
    Ok(format!("// action {action} {arity} {latent}\n{}", to_structured_text(p, sig)?))
}

fn header(text: &str) -> (Option<String>, Option<usize>, Option<usize>) {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let mut words = first.trim().strip_prefix("//").unwrap_or("").split_whitespace();
    if words.next() != Some("action") {
        return (None, None, None);
    }
    let name = words.next().map(str::to_string);
    let arity = words.next().and_then(|w| w.parse().ok());
    let latent = words.next().and_then(|w| w.parse().ok());
    (name, arity, latent)
}

/// Parses against `sig`, or against a signature inferred from the text.
pub fn parse_prog(text: &str, sig: Option<&ModelSignature>) -> Result<(ProgFile, ModelSignature), CliError> {
    let (action, arity, latent) = header(text);
    let (program, sig) = match sig {
        Some(sig) => (parse_structured_text(text, sig)?, sig.clone()),
        None => parse_with_inferred_signature(text)?,
    };
    Ok((ProgFile { action, arity, latent, program }, sig))
}

pub fn load_prog(path: &Path, sig: Option<&ModelSignature>) -> Result<(ProgFile, ModelSignature), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let (mut file, sig) = parse_prog(&text, sig)?;
    if file.action.is_none() {
        file.action = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    Ok((file, sig))
}
