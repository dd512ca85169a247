//! Solver scripts: parsing, static checks, tracing interpretation and
//! validation against task data.

pub mod check;
pub mod interp;
pub mod solver;
pub mod syntax;
pub mod validate;

pub use check::{check_static, referenced_functions};
pub use interp::{interpret, interpret_lines, EvalError, Trace};
pub use solver::{
    load_solver, parse_solver, parse_solver_with, pretty_print, pretty_print_commented, Arg, ArgExpr, CallExpr,
    LoadError, ReturnStyle, ScriptLine, SolverScript,
};
pub use syntax::{join_continuations, ParseError};
pub use validate::{
    permute_colors_check, permute_colors_check_with, run_outputs, validate_all, validate_task, validate_task_with,
    PairVerdict, ValidationReport,
};
