//! The `procmod` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use procmod_core::domains::{blocks, gen_ca_traces, gen_hanoi_traces, gen_pancake_traces, gripper, hanoi, StripsDomain};
use procmod_core::language::strips_schema_from_program;
use procmod_core::synth::{label_space, synthesize_label, SynthesisOutcome};
use procmod_core::text::to_structured_text;
use procmod_core::validate::validate;
use procmod_core::{Error, ExampleSet, LanguageId, SynthesisConfig};
use serde_json::json;

use crate::error::CliError;
use crate::manifest::{manifest_path_for, RunManifest};
use crate::progfile::{load_prog, render_prog};
use crate::report::{synth_table, validation_table, SynthRow, ValidationRow};
use crate::traces::{load_traces, save_traces};

/// Reachable-state cap for `gen ... --all`.
const MAX_REACHABLE_STATES: usize = 1_000_000;

#[derive(Parser, Debug)]
#[command(name = "procmod", version, about = "Synthesize structured RAM programs that model state transitions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a trace file for a built-in domain.
    Gen {
        #[command(subcommand)]
        domain: GenDomain,
    },
    /// Synthesize one program per action label.
    Synth(SynthArgs),
    /// Replay a program on a trace file.
    Validate(ValidateArgs),
    /// Render a program file.
    Print(PrintArgs),
}

#[derive(Args, Debug)]
pub struct OutArg {
    /// Output trace file (.jsonl); a manifest is written next to it.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct WalkArgs {
    /// Number of transitions in the random walk.
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit every reachable transition instead of a random walk.
    #[arg(long)]
    pub all: bool,
}

#[derive(Subcommand, Debug)]
pub enum GenDomain {
    /// Elementary cellular automaton.
    Ca1d {
        /// Wolfram code.
        #[arg(long)]
        rule: u32,
        #[arg(long, default_value_t = 19)]
        cells: usize,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Initial tape as a string of 0s and 1s; default three central ones.
        #[arg(long)]
        init: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Pancake flips.
    Pancakes {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Tower of Hanoi.
    Hanoi {
        #[arg(long, default_value_t = 3)]
        discs: usize,
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Blocksworld.
    Blocks {
        #[arg(long, default_value_t = 4)]
        blocks: usize,
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Gripper.
    Gripper {
        #[arg(long, default_value_t = 4)]
        balls: usize,
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        out: OutArg,
    },
}

fn parse_language(s: &str) -> Result<LanguageId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Trace file (.jsonl).
    pub traces: PathBuf,
    /// Target language: ram, strips, strips-quantified or ca1d. Defaults to
    /// the trace header's.
    #[arg(long, value_parser = parse_language)]
    pub language: Option<LanguageId>,
    /// Line budget; without it the language's bound is used, or the budget
    /// is doubled from 2 until a program is found.
    #[arg(long)]
    pub max_lines: Option<usize>,
    /// Latent registers.
    #[arg(long)]
    pub latent: Option<usize>,
    /// Expanded-node budget per search.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Grow the synthesis set from a small batch with counter-examples.
    #[arg(long)]
    pub incremental: bool,
    #[arg(long)]
    pub initial_batch: Option<usize>,
    #[arg(long)]
    pub step_multiplier: Option<u64>,
    /// Disable pruning of contradicting post-state writes.
    #[arg(long)]
    pub no_r1: bool,
    /// Only synthesize these labels.
    #[arg(long)]
    pub label: Vec<String>,
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Include wall-clock times in the report.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    pub program: PathBuf,
    pub traces: PathBuf,
    /// Exit with status 4 when any example fails.
    #[arg(long)]
    pub strict: bool,
    /// Label whose examples to replay; defaults to the program's action.
    #[arg(long)]
    pub label: Option<String>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Also write the JSON report (and its manifest) here.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PrintFormat {
    Text,
    Pddl,
}

#[derive(Args, Debug)]
pub struct PrintArgs {
    pub program: PathBuf,
    #[arg(long, value_enum, default_value_t = PrintFormat::Text)]
    pub format: PrintFormat,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("procmod: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen { domain } => cmd_gen(domain),
        Command::Synth(a) => cmd_synth(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::Print(a) => cmd_print(&a),
    }
}

/// Generator parameter errors are usage errors.
fn usage_on_params(e: Error) -> CliError {
    match e {
        Error::RuleOutOfRange(_) | Error::InvalidParameters(_) => CliError::Usage(e.to_string()),
        e => CliError::Core(e),
    }
}

fn parse_tape(s: &str) -> Result<Vec<i32>, CliError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(CliError::Usage(format!("--init: `{c}` is not 0 or 1"))),
        })
        .collect()
}

fn strips_traces(d: &StripsDomain, walk: &WalkArgs) -> Result<ExampleSet, CliError> {
    if walk.all {
        d.reachable_transitions(MAX_REACHABLE_STATES)
            .ok_or_else(|| CliError::Usage(format!("more than {MAX_REACHABLE_STATES} reachable states")))
    } else {
        d.random_walk(walk.count, walk.seed).map_err(usage_on_params)
    }
}

fn walk_config(name: &str, size: usize, walk: &WalkArgs) -> serde_json::Value {
    json!({ "domain": name, "size": size, "count": walk.count, "all": walk.all })
}

pub fn cmd_gen(domain: GenDomain) -> Result<(), CliError> {
    let (es, config, seed, out) = match &domain {
        GenDomain::Ca1d { rule, cells, steps, init, out } => {
            let tape = init.as_deref().map(parse_tape).transpose()?;
            let es = gen_ca_traces(*rule, *cells, *steps, tape.as_deref()).map_err(usage_on_params)?;
            let config = json!({ "domain": "ca1d", "rule": rule, "cells": cells, "steps": steps, "init": init });
            (es, config, None, out)
        }
        GenDomain::Pancakes { n, count, seed, out } => {
            let es = gen_pancake_traces(*n, *count, *seed).map_err(usage_on_params)?;
            (es, json!({ "domain": "pancakes", "n": n, "count": count }), Some(*seed), out)
        }
        GenDomain::Hanoi { discs, walk, out } => {
            let es = if walk.all {
                strips_traces(&hanoi(*discs).map_err(usage_on_params)?, walk)?
            } else {
                gen_hanoi_traces(*discs, walk.count, walk.seed).map_err(usage_on_params)?
            };
            (es, walk_config("hanoi", *discs, walk), (!walk.all).then_some(walk.seed), out)
        }
        GenDomain::Blocks { blocks: n, walk, out } => {
            let es = strips_traces(&blocks(*n).map_err(usage_on_params)?, walk)?;
            (es, walk_config("blocks", *n, walk), (!walk.all).then_some(walk.seed), out)
        }
        GenDomain::Gripper { balls, walk, out } => {
            let es = strips_traces(&gripper(*balls).map_err(usage_on_params)?, walk)?;
            (es, walk_config("gripper", *balls, walk), (!walk.all).then_some(walk.seed), out)
        }
    };
    save_traces(&out.out, &es)?;
    let mut m = RunManifest::new("gen", config, seed);
    m.output(&out.out);
    m.write(&manifest_path_for(&out.out))
}

impl SynthArgs {
    pub fn config(&self) -> SynthesisConfig {
        let d = SynthesisConfig::default();
        SynthesisConfig {
            max_lines: self.max_lines,
            num_latent: self.latent,
            step_multiplier: self.step_multiplier.unwrap_or(d.step_multiplier),
            node_budget: self.budget.unwrap_or(d.node_budget),
            incremental: self.incremental,
            initial_batch: self.initial_batch.unwrap_or(d.initial_batch),
            r1: !self.no_r1,
        }
    }

    fn manifest_config(&self, language: LanguageId) -> serde_json::Value {
        let c = self.config();
        json!({
            "language": language.as_str(),
            "max_lines": c.max_lines,
            "latent": c.num_latent,
            "step_multiplier": c.step_multiplier,
            "node_budget": c.node_budget,
            "incremental": c.incremental,
            "initial_batch": c.initial_batch,
            "r1": c.r1,
            "labels": self.label,
        })
    }
}

/// Worker count: `PROCMOD_THREADS` if set, else the available parallelism.
pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    std::env::var("PROCMOD_THREADS").ok().and_then(|v| v.trim().parse().ok()).filter(|&n: &usize| n > 0).unwrap_or(available)
}

type LabelResult = Result<(SynthesisOutcome, u64), Error>;

/// Runs one job per label on at most `workers` threads; results come back
/// in label order whatever the scheduling.
fn synth_labels(es: &ExampleSet, labels: &[String], cfg: &SynthesisConfig, workers: usize) -> Vec<LabelResult> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<LabelResult>>> = Mutex::new(vec![None; labels.len()]);
    let job = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some(label) = labels.get(i) else { break };
        let start = Instant::now();
        let r = synthesize_label(es, label, cfg).map(|o| (o, start.elapsed().as_millis() as u64));
        results.lock().expect("no worker panicked")[i] = Some(r);
    };
    std::thread::scope(|s| {
        for _ in 1..workers.clamp(1, labels.len().max(1)) {
            s.spawn(job);
        }
        job();
    });
    results.into_inner().expect("no worker panicked").into_iter().map(|r| r.expect("every label ran")).collect()
}

fn file_stem_for(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn cmd_synth(a: &SynthArgs) -> Result<(), CliError> {
    let cfg = a.config();
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let mut es = load_traces(&a.traces)?;
    if let Some(l) = a.language {
        es = es.with_signature(es.signature().with_language(l))?;
    }
    let language = es.signature().language();
    let partition = es.partition_by_label();
    let labels: Vec<String> = if a.label.is_empty() {
        partition.keys().cloned().collect()
    } else {
        for l in &a.label {
            if !partition.contains_key(l) {
                return Err(CliError::Usage(format!("no examples labelled `{l}`")));
            }
        }
        let mut l = a.label.clone();
        l.sort();
        l.dedup();
        l
    };
    for l in &labels {
        // reject a language that does not fit the signature before searching
        label_space(&partition[l], l, &cfg).map_err(|e| match e {
            Error::InvalidSignature(_) | Error::TooManyArguments { .. } => CliError::Usage(e.to_string()),
            e => CliError::Core(e),
        })?;
    }

    fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    let mut manifest = RunManifest::new("synth", a.manifest_config(language), None);
    manifest.input(&a.traces)?;
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for (label, result) in labels.iter().zip(synth_labels(&es, &labels, &cfg, worker_count())) {
        let (outcome, ms) = result?;
        let (group, space) = label_space(&partition[label], label, &cfg)?;
        rows.push(SynthRow::new(label, group.len(), &outcome, a.timings.then_some(ms)));
        let Some(p) = &outcome.program else {
            failed.push(format!("{label} ({})", outcome.status.as_str()));
            continue;
        };
        let arity = space.parameters().count();
        let sig = space.signature();
        let prog = a.out.join(format!("{}.prog", file_stem_for(label)));
        write_file(&prog, &render_prog(label, arity, p, sig)?)?;
        manifest.output(&prog);
        if language == LanguageId::Strips {
            let pddl = a.out.join(format!("{}.pddl", file_stem_for(label)));
            write_file(&pddl, &strips_schema_from_program(label, p, sig, arity)?.to_pddl_text()?)?;
            manifest.output(&pddl);
        }
    }
    let json_path = a.out.join("report.json");
    write_file(&json_path, &(serde_json::to_string_pretty(&rows).expect("report serializes") + "\n"))?;
    let table = synth_table(&rows);
    let txt_path = a.out.join("report.txt");
    write_file(&txt_path, &table)?;
    manifest.output(&json_path);
    manifest.output(&txt_path);
    manifest.write(&a.out.join("manifest.json"))?;
    print!("{table}");
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::SynthesisFailed(failed.join(", ")))
    }
}

pub fn cmd_validate(a: &ValidateArgs) -> Result<(), CliError> {
    let es = load_traces(&a.traces)?;
    let (file, _) = load_prog(&a.program, Some(es.signature()))?;
    let label = a.label.clone().or(file.action.clone()).unwrap_or_default();
    let group = es.partition_by_label().remove(&label).ok_or_else(|| CliError::Usage(format!("no examples labelled `{label}`")))?;
    let group = match file.latent {
        Some(l) => group.with_signature(group.signature().with_latent(l))?,
        None => group,
    };
    let start = Instant::now();
    let report = validate(&file.program, &group, SynthesisConfig::default().step_multiplier)?;
    let ms = start.elapsed().as_millis() as u64;
    let row = ValidationRow::new(&label, &report, a.timings.then_some(ms));
    let json = serde_json::to_string_pretty(&[&row]).expect("report serializes") + "\n";
    if a.json {
        print!("{json}");
    } else {
        print!("{}", validation_table(std::slice::from_ref(&row)));
    }
    if let Some(out) = &a.out {
        write_file(out, &json)?;
        let mut m = RunManifest::new("validate", json!({ "label": label, "strict": a.strict }), None);
        m.input(&a.program)?;
        m.input(&a.traces)?;
        m.output(out);
        m.write(&manifest_path_for(out))?;
    }
    if !report.is_perfect() {
        if a.strict {
            return Err(CliError::ValidationFailed(report.rate()));
        }
        eprintln!("procmod: warning: {} of {} examples failed", report.total - report.passed, report.total);
    }
    Ok(())
}

pub fn cmd_print(a: &PrintArgs) -> Result<(), CliError> {
    let (file, sig) = load_prog(&a.program, None)?;
    let arity = file.arity();
    let sig = sig.with_latent(file.latent.unwrap_or(0).max(sig.num_latent()).max(arity));
    let text = match a.format {
        PrintFormat::Text => to_structured_text(&file.program, &sig)?,
        PrintFormat::Pddl => {
            let name = file.action.as_deref().unwrap_or("action");
            strips_schema_from_program(name, &file.program, &sig, arity)?.to_pddl_text()?
        }
    };
    print!("{text}");
    Ok(())
}
