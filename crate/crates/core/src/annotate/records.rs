//! Parts 3 and 4: tactics and solution steps as YAML documents.

use serde::{Deserialize, Serialize};

use crate::comments::core_knowledge_warnings;
use crate::diag::Diagnostic;
use crate::dsl::Registry;
use crate::script::check::unknown_function;
use crate::script::join_continuations;

use super::parts::strip_fences;
use super::AnnotationError;

pub const MIN_TACTICS: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TacticRecord {
    pub heading: String,
    pub description: String,
    #[serde(default)]
    pub dsl_functions: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TacticsDoc {
    tactics: Vec<TacticRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub text: String,
    pub tactic_used: String,
    pub core_knowledge: Vec<String>,
    pub variables_input: Vec<String>,
    pub variables_output: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepsRecord {
    #[serde(rename = "input")]
    pub input_description: String,
    pub steps: Vec<Step>,
    #[serde(rename = "output")]
    pub output_description: String,
}

/// Fences and backslash-wrapped lines are undone before YAML parsing.
fn document(text: &str) -> String {
    join_continuations(&strip_fences(text))
}

fn yaml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, AnnotationError> {
    serde_yaml::from_str(&document(text)).map_err(|e| AnnotationError::Document(e.to_string()))
}

/// Parse a tactics document. Unknown DSL function names are warnings.
pub fn parse_tactics(text: &str, registry: &Registry) -> Result<(Vec<TacticRecord>, Vec<Diagnostic>), AnnotationError> {
    let doc: TacticsDoc = yaml(text)?;
    if doc.tactics.len() < MIN_TACTICS {
        return Err(AnnotationError::TooFewTactics(doc.tactics.len()));
    }
    if let Some(i) = doc.tactics.iter().position(|t| t.heading.trim().is_empty()) {
        return Err(AnnotationError::Document(format!("tactic {} has an empty heading", i + 1)));
    }
    let warnings = doc
        .tactics
        .iter()
        .flat_map(|t| {
            t.dsl_functions
                .iter()
                .filter(|f| !registry.contains(f))
                .map(move |f| {
                    let base = unknown_function(registry, f, None);
                    Diagnostic::warning("unknown-dsl-function", format!("tactic `{}`: {}", t.heading, base.message), None)
                })
        })
        .collect();
    Ok((doc.tactics, warnings))
}

/// Parse a solution-steps document. Core Knowledge names outside the
/// vocabulary are warnings.
pub fn parse_steps(text: &str) -> Result<(StepsRecord, Vec<Diagnostic>), AnnotationError> {
    let record: StepsRecord = yaml(text)?;
    if record.steps.is_empty() {
        return Err(AnnotationError::Document("steps list is empty".into()));
    }
    let warnings = record
        .steps
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            core_knowledge_warnings(&s.core_knowledge, None).into_iter().map(move |mut d| {
                d.message = format!("step {}: {}", i + 1, d.message);
                d
            })
        })
        .collect();
    Ok((record, warnings))
}
