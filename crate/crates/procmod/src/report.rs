//! Synthesis and validation reports, as JSON and as aligned text tables.

use procmod_core::synth::SynthesisOutcome;
use procmod_core::ValidationReport;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SynthRow {
    pub label: String,
    pub status: &'static str,
    pub examples: usize,
    pub n_sol: Option<usize>,
    pub n_max: usize,
    pub expanded: u64,
    pub evaluated: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl SynthRow {
    pub fn new(label: &str, examples: usize, out: &SynthesisOutcome, wall_time_ms: Option<u64>) -> Self {
        SynthRow {
            label: label.to_string(),
            status: out.status.as_str(),
            examples,
            n_sol: out.n_sol(),
            n_max: out.n_max,
            expanded: out.stats.expanded,
            evaluated: out.stats.evaluated,
            wall_time_ms,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureRecord {
    pub example: usize,
    pub variable: usize,
    pub expected: i32,
    pub got: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationRow {
    pub label: String,
    pub total: usize,
    pub passed: usize,
    pub rate: f64,
    pub failures: Vec<FailureRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl ValidationRow {
    pub fn new(label: &str, r: &ValidationReport, wall_time_ms: Option<u64>) -> Self {
        ValidationRow {
            label: label.to_string(),
            total: r.total,
            passed: r.passed,
            rate: r.rate(),
            failures: r
                .failures
                .iter()
                .map(|m| FailureRecord { example: m.example, variable: m.variable, expected: m.expected, got: m.got })
                .collect(),
            wall_time_ms,
        }
    }
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells.zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut header.iter().copied());
    for r in rows {
        line(&mut r.iter().map(String::as_str));
    }
    out
}

fn ms(t: Option<u64>) -> String {
    t.map_or_else(|| "-".into(), |t| format!("{:.2}", t as f64 / 1000.0))
}

pub fn synth_table(rows: &[SynthRow]) -> String {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                r.examples.to_string(),
                format!("{}/{}", r.n_sol.map_or_else(|| "-".into(), |n| n.to_string()), r.n_max),
                ms(r.wall_time_ms),
                format!("{}/{}", r.expanded, r.evaluated),
                r.status.to_string(),
            ]
        })
        .collect();
    table(&["action", "|E_synth|", "n_sol/n_max", "T_synth", "Exp./Eval.", "status"], &rows)
}

pub fn validation_table(rows: &[ValidationRow]) -> String {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.label.clone(), r.total.to_string(), ms(r.wall_time_ms), format!("{:.2}%", 100.0 * r.rate)])
        .collect();
    table(&["action", "|E_test|", "T_test", "%ok"], &rows)
}
