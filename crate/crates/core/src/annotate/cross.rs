//! Cross-referencing steps against tactics and the solver trace.

use crate::diag::Diagnostic;
use crate::script::Trace;

use super::records::{StepsRecord, TacticRecord};

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Every step variable must be bound in the trace and every `tactic_used`
/// must equal a tactic heading up to whitespace.
pub fn cross_index(steps: &StepsRecord, tactics: &[TacticRecord], trace: &Trace) -> Vec<Diagnostic> {
    let headings: Vec<String> = tactics.iter().map(|t| squash(&t.heading)).collect();
    let mut out = Vec::new();
    for (i, step) in steps.steps.iter().enumerate() {
        let n = i + 1;
        for v in step.variables_input.iter().chain(&step.variables_output) {
            if !trace.contains(v) {
                out.push(Diagnostic::error("unknown-variable", format!("step {n}: unknown variable {v}"), None));
            }
        }
        if !headings.contains(&squash(&step.tactic_used)) {
            out.push(Diagnostic::error(
                "unmatched-tactic",
                format!("step {n}: unmatched tactic `{}`", step.tactic_used),
                None,
            ));
        }
    }
    out
}
