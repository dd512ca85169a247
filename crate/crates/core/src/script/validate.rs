//! Running solver scripts against recorded task pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::ColorTable;
use crate::dsl::Registry;
use crate::grid::Grid;
use crate::task::{PairKind, TaskRecord};

use super::interp::{interpret, EvalError};
use super::solver::SolverScript;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub kind: PairKind,
    pub index: usize,
    pub passed: bool,
    /// Cells that differ from the expected output. When the shapes differ
    /// or the script fails, every expected cell counts as a mismatch.
    pub mismatches: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub task_id: String,
    pub pairs: Vec<PairVerdict>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }
}

/// Number of cells where `got` differs from `expected`.
pub fn mismatch_count(got: &Grid, expected: &Grid) -> usize {
    if got.height() != expected.height() || got.width() != expected.width() {
        return expected.height() * expected.width();
    }
    got.colors()
        .iter()
        .zip(expected.colors())
        .filter(|(a, b)| a != b)
        .count()
}

/// Output grid of the script for every pair input, in task order.
pub fn run_outputs(
    script: &SolverScript,
    task: &TaskRecord,
    registry: &Registry,
    table: &ColorTable,
) -> Vec<(PairKind, usize, Result<Grid, EvalError>)> {
    task.pairs()
        .map(|(kind, index, pair)| {
            let out = interpret(script, &pair.input, registry, table).and_then(|t| {
                t.output().cloned().ok_or_else(|| EvalError {
                    line: script.lines.last().map_or(0, |l| l.line),
                    function: script.lines.last().map_or_else(String::new, |l| l.function.clone()),
                    source: crate::dsl::DslError::Domain {
                        function: "O".into(),
                        message: "O is not a grid".into(),
                    },
                })
            });
            (kind, index, out)
        })
        .collect()
}

/// Validate with the standard colour table.
pub fn validate_task(script: &SolverScript, task: &TaskRecord, registry: &Registry) -> ValidationReport {
    validate_task_with(script, task, registry, ColorTable::standard())
}

/// Validate a task whose grids are expressed in `table`.
pub fn validate_task_with(
    script: &SolverScript,
    task: &TaskRecord,
    registry: &Registry,
    table: &ColorTable,
) -> ValidationReport {
    let pairs: Vec<PairVerdict> = run_outputs(script, task, registry, table)
        .into_iter()
        .map(|(kind, index, out)| {
            let expected = &task.pair(kind, index).expect("pair exists").output;
            match out {
                Ok(got) => {
                    let mismatches = mismatch_count(&got, expected);
                    PairVerdict {
                        kind,
                        index,
                        passed: mismatches == 0,
                        mismatches,
                        error: None,
                    }
                }
                Err(e) => PairVerdict {
                    kind,
                    index,
                    passed: false,
                    mismatches: expected.height() * expected.width(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    ValidationReport {
        task_id: task.task_id.clone(),
        passed: pairs.iter().all(|p| p.passed),
        pairs,
    }
}

/// Re-validate after shuffling the codes of the ten palette colours.
pub fn permute_colors_check(script: &SolverScript, task: &TaskRecord, registry: &Registry, seed: u64) -> bool {
    let standard = ColorTable::standard();
    permute_colors_check_with(script, task, registry, &standard.permuted(seed))
}

/// Re-validate with an explicit colour table. `task` is expressed in the
/// standard table and is translated first.
pub fn permute_colors_check_with(
    script: &SolverScript,
    task: &TaskRecord,
    registry: &Registry,
    table: &ColorTable,
) -> bool {
    let translated = task.translate(ColorTable::standard(), table);
    validate_task_with(script, &translated, registry, table).passed
}

/// Validate many (script, task) jobs in parallel. Reports come back in job order.
pub fn validate_all(jobs: &[(SolverScript, TaskRecord)], registry: &Registry) -> Vec<ValidationReport> {
    jobs.par_iter()
        .map(|(s, t)| validate_task(s, t, registry))
        .collect()
}
