//! JSON Lines trace files.
//!
//! The first line is a header carrying the signature; every further line is
//! one transition:
//!
//! ```text
//! {"format_version":1,"signature":{"objects":4,"state_vars":[{"name":"f","arity":1,"domain":[1,4]}],"language":"ram","latent":2}}
//! {"label":"flip","args":[2],"pre":[3,2,1,4],"post":[1,2,3,4]}
//! ```

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use procmod_core::{Example, ExampleSet, Label, LanguageId, ModelSignature, StateVar, Value};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format_version: u32,
    signature: SignatureRecord,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignatureRecord {
    objects: usize,
    state_vars: Vec<VarRecord>,
    language: String,
    latent: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VarRecord {
    name: String,
    arity: u8,
    domain: (Value, Value),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    label: String,
    args: Vec<usize>,
    pre: Vec<Value>,
    post: Vec<Value>,
}

fn header_of(sig: &ModelSignature) -> Header {
    let state_vars = sig
        .state_vars()
        .iter()
        .map(|v| VarRecord { name: v.name.clone(), arity: v.arity, domain: v.domain })
        .collect();
    Header {
        format_version: FORMAT_VERSION,
        signature: SignatureRecord {
            objects: sig.num_objects(),
            state_vars,
            language: sig.language().as_str().to_string(),
            latent: sig.num_latent(),
        },
    }
}

/// Writes `es` in canonical form: compact JSON, one object per line.
pub fn write_traces(mut w: impl Write, es: &ExampleSet) -> std::io::Result<()> {
    serde_json::to_writer(&mut w, &header_of(es.signature()))?;
    writeln!(w)?;
    for e in es {
        let r = Record { label: e.label.name.clone(), args: e.label.args.clone(), pre: e.pre.clone(), post: e.post.clone() };
        serde_json::to_writer(&mut w, &r)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn save_traces(path: &Path, es: &ExampleSet) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_traces(&mut buf, es).expect("writing to memory");
    fs::write(path, buf).map_err(|e| CliError::io(path, e))
}

/// Reads a trace file. `path` is only used in error messages.
pub fn read_traces(r: impl Read, path: &Path) -> Result<ExampleSet, CliError> {
    let err = |line: usize, msg: String| CliError::Trace { path: path.to_path_buf(), line, msg };
    let mut lines = BufReader::new(r).lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = || -> Result<Option<(usize, String)>, CliError> {
        for (n, l) in lines.by_ref() {
            let l = l.map_err(|e| CliError::io(path, e))?;
            if !l.trim().is_empty() {
                return Ok(Some((n, l)));
            }
        }
        Ok(None)
    };

    let Some((n, first)) = next()? else {
        return Err(err(1, "missing header".into()));
    };
    let header: Header = serde_json::from_str(&first).map_err(|e| err(n, format!("bad header: {e}")))?;
    if header.format_version != FORMAT_VERSION {
        return Err(err(n, format!("unsupported format_version {}", header.format_version)));
    }
    let s = header.signature;
    let language: LanguageId = s.language.parse().map_err(|e: procmod_core::Error| err(n, e.to_string()))?;
    let vars = s.state_vars.into_iter().map(|v| StateVar::new(v.name, v.arity, v.domain)).collect();
    let sig = ModelSignature::new(s.objects, vars, s.latent, language).map_err(|e| err(n, e.to_string()))?;

    let mut es = ExampleSet::new(sig, Vec::new())?;
    while let Some((n, line)) = next()? {
        let r: Record = serde_json::from_str(&line).map_err(|e| err(n, format!("bad record: {e}")))?;
        let e = Example::new(r.pre, Label::new(r.label, &r.args), r.post);
        es.push(e).map_err(|e| err(n, e.to_string()))?;
    }
    if es.is_empty() {
        return Err(err(n, "no examples".into()));
    }
    Ok(es)
}

pub fn load_traces(path: &Path) -> Result<ExampleSet, CliError> {
    let f = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_traces(f, path)
}
