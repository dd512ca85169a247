//! Gating a four-part response into a bundle.

use serde::{Deserialize, Serialize};

use crate::color::ColorTable;
use crate::diag::Diagnostic;
use crate::dsl::Registry;
use crate::refactor::{
    check_call_graph, check_equivalence, check_variable_consistency, parse_chunked_with, CallGraphConfig,
    ChunkedProgram,
};
use crate::script::{interpret, SolverScript};
use crate::task::TaskRecord;

use super::commented::{check_code_drift, parse_commented_solver, CommentedSolver};
use super::cross::cross_index;
use super::parts::{split_parts, strip_fences, SplitConfig};
use super::records::{parse_steps, parse_tactics, StepsRecord, TacticRecord};

/// A parse result as stored in the dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parsed<T> {
    Ok(T),
    Error(String),
}

impl<T> Parsed<T> {
    pub fn ok(&self) -> Option<&T> {
        match self {
            Parsed::Ok(t) => Some(t),
            Parsed::Error(_) => None,
        }
    }
}

impl<T, E: std::fmt::Display> From<Result<T, E>> for Parsed<T> {
    fn from(r: Result<T, E>) -> Self {
        match r {
            Ok(t) => Parsed::Ok(t),
            Err(e) => Parsed::Error(e.to_string()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedParts {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commented: Option<Parsed<CommentedSolver>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunked: Option<Parsed<ChunkedProgram>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tactics: Option<Parsed<Vec<TacticRecord>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Parsed<StepsRecord>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reasons: Vec<String>,
}

/// Every check an accepted four-part bundle must pass, in evaluation order.
pub const GATE_CHECKS: [&str; 9] = [
    "parts",
    "part1",
    "part2",
    "call-graph",
    "main-variables",
    "equivalence",
    "part3",
    "part4",
    "cross-index",
];

/// The checks that apply when only the first `parts` parts are requested.
pub fn required_checks(parts: usize) -> &'static [&'static str] {
    let n = match parts {
        0 => 1,
        1 => 2,
        2 => 6,
        3 => 7,
        _ => GATE_CHECKS.len(),
    };
    &GATE_CHECKS[..n]
}

fn four() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartBundle {
    pub task_id: String,
    #[serde(default = "four")]
    pub parts_expected: usize,
    pub raw_parts: Vec<String>,
    pub parsed: ParsedParts,
    pub verdicts: Vec<Verdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Diagnostic>,
    pub accepted: bool,
}

impl PartBundle {
    pub fn commented(&self) -> Option<&CommentedSolver> {
        self.parsed.commented.as_ref().and_then(Parsed::ok)
    }

    pub fn chunked(&self) -> Option<&ChunkedProgram> {
        self.parsed.chunked.as_ref().and_then(Parsed::ok)
    }

    pub fn tactics(&self) -> Option<&[TacticRecord]> {
        self.parsed.tactics.as_ref().and_then(Parsed::ok).map(Vec::as_slice)
    }

    pub fn steps(&self) -> Option<&StepsRecord> {
        self.parsed.steps.as_ref().and_then(Parsed::ok)
    }

    /// Checks that failed or never ran.
    pub fn failed_checks(&self) -> Vec<&'static str> {
        required_checks(self.parts_expected)
            .iter()
            .copied()
            .filter(|c| !self.verdicts.iter().any(|v| v.check == *c && v.passed))
            .collect()
    }

    /// `check: reason` for every failed verdict.
    pub fn rejection_reasons(&self) -> Vec<String> {
        self.verdicts
            .iter()
            .filter(|v| !v.passed)
            .flat_map(|v| v.reasons.iter().map(move |r| format!("{}: {r}", v.check)))
            .collect()
    }
}

/// What a response is judged against.
pub struct GateContext<'a> {
    pub original: &'a SolverScript,
    pub task: &'a TaskRecord,
    pub registry: &'a Registry,
    pub table: &'a ColorTable,
    pub split: &'a SplitConfig,
    pub call_graph: CallGraphConfig,
}

impl<'a> GateContext<'a> {
    pub fn new(original: &'a SolverScript, task: &'a TaskRecord, registry: &'a Registry, split: &'a SplitConfig) -> Self {
        GateContext {
            original,
            task,
            registry,
            table: ColorTable::standard(),
            split,
            call_graph: CallGraphConfig::default(),
        }
    }
}

fn verdict(check: &str, reasons: Vec<String>) -> Verdict {
    Verdict {
        check: check.to_string(),
        passed: reasons.is_empty(),
        reasons,
    }
}

fn error_messages(diags: &[Diagnostic]) -> Vec<String> {
    diags.iter().filter(|d| d.is_error()).map(|d| d.to_string()).collect()
}

/// Split, parse and check a response. Rejection is recorded, never raised.
pub fn evaluate_response(task_id: &str, response: &str, ctx: &GateContext) -> PartBundle {
    let mut bundle = PartBundle {
        task_id: task_id.to_string(),
        parts_expected: ctx.split.expected,
        raw_parts: Vec::new(),
        parsed: ParsedParts::default(),
        verdicts: Vec::new(),
        warnings: Vec::new(),
        accepted: false,
    };
    match split_parts(response, ctx.split) {
        Ok(parts) => {
            bundle.raw_parts = parts;
            bundle.verdicts.push(verdict("parts", vec![]));
        }
        Err(e) => {
            bundle.verdicts.push(verdict("parts", vec![e.to_string()]));
            return bundle;
        }
    }
    let part = |k: usize| bundle.raw_parts.get(k - 1).map(String::as_str);

    if let Some(text) = part(1) {
        let parsed = parse_commented_solver(&strip_fences(text), ctx.table);
        let reasons = match &parsed {
            Ok(c) => {
                bundle.warnings.extend(c.warnings());
                let mut r = error_messages(&check_code_drift(&c.script, ctx.original, ctx.table));
                if c.blocks.is_empty() {
                    r.push("no comment blocks".into());
                }
                r
            }
            Err(e) => vec![e.to_string()],
        };
        bundle.verdicts.push(verdict("part1", reasons));
        bundle.parsed.commented = Some(parsed.into());
    }

    if let Some(text) = part(2) {
        let parsed = parse_chunked_with(&strip_fences(text), ctx.table);
        match &parsed {
            Ok(p) => {
                bundle.verdicts.push(verdict("part2", vec![]));
                let graph = check_call_graph(p, ctx.registry, &ctx.call_graph);
                bundle.warnings.extend(graph.iter().filter(|d| !d.is_error()).cloned());
                bundle.verdicts.push(verdict("call-graph", error_messages(&graph)));
                let vars = check_variable_consistency(p, ctx.original);
                bundle.verdicts.push(verdict("main-variables", error_messages(&vars)));
                let eq = check_equivalence(p, ctx.original, ctx.task, ctx.registry, ctx.table);
                bundle.warnings.extend(eq.diagnostics.iter().filter(|d| !d.is_error()).cloned());
                let mut reasons = error_messages(&eq.diagnostics);
                if !eq.equivalent && reasons.is_empty() {
                    reasons.push("not equivalent".into());
                }
                bundle.verdicts.push(verdict("equivalence", reasons));
            }
            Err(e) => bundle.verdicts.push(verdict("part2", vec![e.to_string()])),
        }
        bundle.parsed.chunked = Some(parsed.map_err(|e| e.to_string()).into());
    }

    if let Some(text) = part(3) {
        let parsed = parse_tactics(text, ctx.registry).map(|(t, w)| {
            bundle.warnings.extend(w);
            t
        });
        bundle
            .verdicts
            .push(verdict("part3", parsed.as_ref().err().map(|e| vec![e.to_string()]).unwrap_or_default()));
        bundle.parsed.tactics = Some(parsed.into());
    }

    if let Some(text) = part(4) {
        let parsed = parse_steps(text).map(|(s, w)| {
            bundle.warnings.extend(w);
            s
        });
        bundle
            .verdicts
            .push(verdict("part4", parsed.as_ref().err().map(|e| vec![e.to_string()]).unwrap_or_default()));
        bundle.parsed.steps = Some(parsed.into());
    }

    if let (Some(steps), Some(tactics)) = (bundle.steps(), bundle.tactics()) {
        let reasons = match ctx.task.train.first().or(ctx.task.test.first()) {
            Some(pair) => match interpret(ctx.original, &pair.input, ctx.registry, ctx.table) {
                Ok(trace) => error_messages(&cross_index(steps, tactics, &trace)),
                Err(e) => vec![format!("original script failed: {e}")],
            },
            None => vec!["task has no pairs".into()],
        };
        bundle.verdicts.push(verdict("cross-index", reasons));
    }

    bundle.accepted = bundle.failed_checks().is_empty();
    bundle
}
