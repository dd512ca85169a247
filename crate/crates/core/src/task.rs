//! ARC task files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::color::ColorTable;
use crate::error::DataError;
use crate::grid::Grid;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pair {
    pub input: Grid,
    pub output: Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Train,
    Test,
}

impl std::fmt::Display for PairKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PairKind::Train => "train",
            PairKind::Test => "test",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskRecord {
    pub task_id: String,
    pub train: Vec<Pair>,
    pub test: Vec<Pair>,
}

#[derive(Serialize, Deserialize)]
struct RawPair {
    input: Vec<Vec<i64>>,
    output: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct RawTask {
    train: Vec<RawPair>,
    test: Vec<RawPair>,
}

impl TaskRecord {
    /// Every pair, train first, tagged with its kind and index.
    pub fn pairs(&self) -> impl Iterator<Item = (PairKind, usize, &Pair)> {
        let train = self.train.iter().enumerate().map(|(i, p)| (PairKind::Train, i, p));
        let test = self.test.iter().enumerate().map(|(i, p)| (PairKind::Test, i, p));
        train.chain(test)
    }

    pub fn pair(&self, kind: PairKind, index: usize) -> Option<&Pair> {
        match kind {
            PairKind::Train => self.train.get(index),
            PairKind::Test => self.test.get(index),
        }
    }

    /// Serialise back to the digit-matrix JSON format.
    pub fn to_json(&self, table: &ColorTable) -> String {
        let conv = |pairs: &[Pair]| {
            pairs
                .iter()
                .map(|p| RawPair {
                    input: digits(&p.input, table),
                    output: digits(&p.output, table),
                })
                .collect()
        };
        let raw = RawTask {
            train: conv(&self.train),
            test: conv(&self.test),
        };
        serde_json::to_string(&raw).expect("task serialises")
    }

    /// Re-express every grid under another colour table.
    pub fn translate(&self, from: &ColorTable, to: &ColorTable) -> TaskRecord {
        let conv = |pairs: &[Pair]| {
            pairs
                .iter()
                .map(|p| Pair {
                    input: p.input.translate(from, to),
                    output: p.output.translate(from, to),
                })
                .collect()
        };
        TaskRecord {
            task_id: self.task_id.clone(),
            train: conv(&self.train),
            test: conv(&self.test),
        }
    }
}

fn digits(g: &Grid, table: &ColorTable) -> Vec<Vec<i64>> {
    g.to_digits(table)
        .into_iter()
        .map(|r| r.into_iter().map(i64::from).collect())
        .collect()
}

/// Parse an ARC task document.
pub fn parse_task(task_id: &str, json_text: &str, table: &ColorTable) -> Result<TaskRecord, DataError> {
    let raw: RawTask = serde_json::from_str(json_text)?;
    if raw.train.is_empty() {
        return Err(DataError::Malformed("no train pairs".into()));
    }
    if raw.test.is_empty() {
        return Err(DataError::Malformed("no test pairs".into()));
    }
    let conv = |pairs: Vec<RawPair>| -> Result<Vec<Pair>, DataError> {
        pairs
            .into_iter()
            .map(|p| {
                Ok(Pair {
                    input: Grid::from_digits(&p.input, table)?,
                    output: Grid::from_digits(&p.output, table)?,
                })
            })
            .collect()
    };
    Ok(TaskRecord {
        task_id: task_id.to_string(),
        train: conv(raw.train)?,
        test: conv(raw.test)?,
    })
}

/// Load a task file; the task id is the file stem.
pub fn load_task(path: &Path, table: &ColorTable) -> Result<TaskRecord, DataError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DataError::Malformed(format!("{}: {e}", path.display())))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_task(&id, &text, table)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        r#"{"train":[{"input":[[0]],"output":[[1]]}],"test":[{"input":[[0]],"output":[[1]]}]}"#;

    #[test]
    fn minimal_task() {
        let t = ColorTable::standard();
        let task = parse_task("min", MINIMAL, t).unwrap();
        assert_eq!(task.train.len(), 1);
        assert_eq!(task.test.len(), 1);
        assert_eq!(task.train[0].input.get(0, 0), t.by_name("BLACK").unwrap());
        assert_eq!(task.train[0].output.get(0, 0), t.by_name("BLUE").unwrap());
    }

    #[test]
    fn errors() {
        let t = ColorTable::standard();
        let ragged = r#"{"train":[{"input":[[0,0,0],[0,0]],"output":[[1]]}],"test":[{"input":[[0]],"output":[[1]]}]}"#;
        assert!(parse_task("x", ragged, t).unwrap_err().to_string().contains("ragged grid"));
        let digit = MINIMAL.replacen("[[1]]", "[[10]]", 1);
        assert!(matches!(parse_task("x", &digit, t), Err(DataError::BadDigit(10))));
        let neg = MINIMAL.replacen("[[1]]", "[[-1]]", 1);
        assert!(matches!(parse_task("x", &neg, t), Err(DataError::BadDigit(-1))));
        let big = format!(
            r#"{{"train":[{{"input":[{}],"output":[[1]]}}],"test":[{{"input":[[0]],"output":[[1]]}}]}}"#,
            vec!["[0]"; 31].join(",")
        );
        assert!(matches!(parse_task("x", &big, t), Err(DataError::Dimension { .. })));
        assert!(parse_task("x", "{", t).is_err());
        assert!(parse_task("x", r#"{"train":[],"test":[]}"#, t).is_err());
    }

    #[test]
    fn reserialise_is_identical() {
        let t = ColorTable::standard();
        let task = parse_task("min", MINIMAL, t).unwrap();
        let a: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        let b: serde_json::Value = serde_json::from_str(&task.to_json(t)).unwrap();
        assert_eq!(a, b);
    }
}
