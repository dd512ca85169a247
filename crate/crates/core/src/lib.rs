pub mod annotate;
pub mod color;
pub mod diag;
pub mod dsl;
pub mod error;
pub mod comments;
pub mod grid;
pub mod refactor;
pub mod script;
pub mod task;

pub use color::{classify_integer, Color, ColorTable, IntClass};
pub use diag::{Diagnostic, Severity};
pub use error::DataError;
pub use grid::{Cell, Grid, Location};
pub use task::{load_task, parse_task, Pair, PairKind, TaskRecord};
