//! Part 1: the original solver with comment blocks added.

use serde::{Deserialize, Serialize};

use crate::color::ColorTable;
use crate::comments::{core_knowledge_warnings, group_blocks, CommentBlock};
use crate::diag::Diagnostic;
use crate::script::solver::{render_line, Arg, ArgExpr, ScriptLine};
use crate::script::{parse_solver_with, SolverScript};

use super::AnnotationError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentedSolver {
    pub script: SolverScript,
    pub blocks: Vec<CommentBlock>,
}

impl CommentedSolver {
    /// The lines a block is attached to.
    pub fn block_lines(&self, index: usize) -> Vec<&ScriptLine> {
        let Some(block) = self.blocks.get(index) else {
            return Vec::new();
        };
        self.script
            .lines
            .iter()
            .filter(|l| block.attached_lines.contains(&l.target))
            .collect()
    }

    /// Warnings for Core Knowledge names outside the vocabulary.
    pub fn warnings(&self) -> Vec<Diagnostic> {
        self.blocks
            .iter()
            .flat_map(|b| {
                let line = self
                    .script
                    .lines
                    .iter()
                    .find(|l| b.attached_lines.first() == Some(&l.target))
                    .map(|l| l.line);
                core_knowledge_warnings(&b.core_knowledge, line)
            })
            .collect()
    }
}

pub fn parse_commented_solver(text: &str, table: &ColorTable) -> Result<CommentedSolver, AnnotationError> {
    let script = parse_solver_with(text, table)?;
    let blocks = group_blocks(&script.lines)?;
    Ok(CommentedSolver { script, blocks })
}

/// Differences between the code of `commented` and `original`, ignoring
/// comments, the return form, and how colour constants are spelled.
pub fn check_code_drift(commented: &SolverScript, original: &SolverScript, table: &ColorTable) -> Vec<Diagnostic> {
    let a: Vec<String> = original.lines.iter().map(|l| normalized(l, table)).collect();
    let b: Vec<String> = commented.lines.iter().map(|l| normalized(l, table)).collect();
    let mut out = Vec::new();
    for op in diff(&a, &b) {
        match op {
            Edit::Removed(i) => out.push(Diagnostic::error(
                "code-drift",
                format!("missing line `{}`", render_line(&original.lines[i])),
                None,
            )),
            Edit::Added(j) => out.push(Diagnostic::error(
                "code-drift",
                format!("unexpected line `{}`", render_line(&commented.lines[j])),
                Some(commented.lines[j].line),
            )),
        }
    }
    out
}

fn normalized(line: &ScriptLine, table: &ColorTable) -> String {
    let mut line = line.clone();
    line.args.iter_mut().for_each(|a| normalize_arg(a, table));
    render_line(&line)
}

fn normalize_arg(arg: &mut Arg, table: &ColorTable) {
    match &mut arg.value {
        ArgExpr::Color(token) => {
            if let Some(c) = table.canonical_constant(token) {
                *token = c;
            }
        }
        ArgExpr::Call(call) => call.args.iter_mut().for_each(|a| normalize_arg(a, table)),
        _ => {}
    }
}

enum Edit {
    Removed(usize),
    Added(usize),
}

/// Line edits turning `a` into `b`, from a longest common subsequence.
fn diff(a: &[String], b: &[String]) -> Vec<Edit> {
    let (n, m) = (a.len(), b.len());
    let mut lcs = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if a[i] == b[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < n || j < m {
        if i < n && j < m && a[i] == b[j] {
            i += 1;
            j += 1;
        } else if j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j]) {
            out.push(Edit::Added(j));
            j += 1;
        } else {
            out.push(Edit::Removed(i));
            i += 1;
        }
    }
    out
}
