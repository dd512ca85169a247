//! Parsing and checking four-part annotation responses, and the corpus
//! views built from accepted ones.

pub mod bundle;
pub mod commented;
pub mod corpus;
pub mod cross;
pub mod parts;
pub mod records;

pub use bundle::{evaluate_response, required_checks, GateContext, PartBundle, Parsed, ParsedParts, Verdict, GATE_CHECKS};
pub use commented::{check_code_drift, parse_commented_solver, CommentedSolver};
pub use corpus::{aggregate_tactics, corpus_jsonl, export_corpus, tactic_key, CorpusRecord, TacticGroup, UnitKind};
pub use cross::cross_index;
pub use parts::{split_parts, strip_fences, SplitConfig, SplitError, DEFAULT_HEADER};
pub use records::{parse_steps, parse_tactics, Step, StepsRecord, TacticRecord, MIN_TACTICS};

use crate::comments::IncompleteBlock;
use crate::script::ParseError;

#[derive(Debug, thiserror::Error)]
pub enum AnnotationError {
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Incomplete(#[from] IncompleteBlock),
    #[error("malformed document: {0}")]
    Document(String),
    #[error("Return 5 or more tactics: found {0} (minimum 5)")]
    TooFewTactics(usize),
}
