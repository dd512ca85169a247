//! Chunked programs: sub-functions plus a `solver_virtual_chunked(I)` main,
//! and the checks a refactor must pass.

use std::cell::Cell;
use std::collections::{BTreeSet, HashMap, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::color::ColorTable;
use crate::comments::{parse_comment_block, CommentBlock};
use crate::diag::{Diagnostic, Severity};
use crate::dsl::{CallArg, DslError, Registry, Resolver, Value};
use crate::grid::Grid;
use crate::script::check::unknown_function;
use crate::script::interp::{eval_expr, interpret, interpret_lines, run_lines, EvalError, Trace};
use crate::script::solver::{lower_def, visit_functions, ArgExpr, Lowering, ScriptLine};
use crate::script::syntax::{parse_program, Def, Expr, ParseError, StmtKind};
use crate::script::SolverScript;
use crate::task::TaskRecord;
use crate::script::validate::mismatch_count;

pub const ENTRY_NAME: &str = "solver_virtual_chunked";

/// Nested sub-function calls deeper than this are treated as runaway recursion.
const MAX_CALL_DEPTH: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubParam {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubFunction {
    pub name: String,
    pub params: Vec<SubParam>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub returns: Option<String>,
    pub body: Vec<ScriptLine>,
    /// The returned expression.
    pub result: ArgExpr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment_block: Option<CommentBlock>,
    pub line: usize,
    /// The definition as written.
    pub source: String,
}

impl SubFunction {
    /// Every function name the sub-function mentions, in source order.
    pub fn mentioned_functions(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut push = |f: &str| {
            if !out.iter().any(|o: &String| o == f) {
                out.push(f.to_string());
            }
        };
        for line in &self.body {
            visit_functions(&line.function, &line.args, &mut push);
        }
        match &self.result {
            ArgExpr::Call(c) => visit_functions(&c.function, &c.args, &mut push),
            ArgExpr::Func(f) => push(f),
            _ => {}
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkedProgram {
    pub subfunctions: Vec<SubFunction>,
    pub main: SolverScript,
    pub entry_name: String,
}

impl ChunkedProgram {
    pub fn subfunction(&self, name: &str) -> Option<&SubFunction> {
        self.subfunctions.iter().find(|s| s.name == name)
    }
}

/// Parse a chunked program. Colour constants resolve against the standard table.
pub fn parse_chunked(text: &str) -> Result<ChunkedProgram, ParseError> {
    parse_chunked_with(text, ColorTable::standard())
}

pub fn parse_chunked_with(text: &str, table: &ColorTable) -> Result<ChunkedProgram, ParseError> {
    let defs = parse_program(text)?;
    let mut seen = HashSet::new();
    for d in &defs {
        if !seen.insert(d.name.as_str()) {
            return Err(ParseError::new(d.line, format!("duplicate definition `{}`", d.name)));
        }
    }
    let entry = defs.iter().find(|d| d.name == ENTRY_NAME).ok_or_else(|| {
        let line = defs.last().map_or(1, |d| d.line);
        ParseError::new(line, format!("entry point must be {ENTRY_NAME}"))
    })?;
    let main = lower_def(entry, table, false)?;
    let physical: Vec<&str> = text.lines().collect();
    let subfunctions = defs
        .iter()
        .filter(|d| d.name != ENTRY_NAME)
        .map(|d| lower_sub(d, table, &physical))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ChunkedProgram {
        subfunctions,
        main,
        entry_name: ENTRY_NAME.to_string(),
    })
}

fn lower_sub(def: &Def, table: &ColorTable, physical: &[&str]) -> Result<SubFunction, ParseError> {
    let mut scope: HashSet<String> = def.params.iter().map(|p| p.name.clone()).collect();
    for stmt in &def.body {
        if let StmtKind::Assign { target, .. } = &stmt.kind {
            scope.insert(target.clone());
        }
    }
    let lower = Lowering {
        scope,
        table,
        strict: false,
    };
    let mut body = Vec::new();
    let mut result = None;
    for stmt in &def.body {
        if result.is_some() {
            return Err(ParseError::new(stmt.line, "statement after return"));
        }
        match &stmt.kind {
            StmtKind::Assign { target, expr } => {
                let Expr::Call { function, args } = expr else {
                    return Err(ParseError::new(stmt.line, format!("right-hand side of `{target}` must be a call")));
                };
                let call = lower.call(function, args, stmt.line)?;
                body.push(ScriptLine {
                    target: target.clone(),
                    function: call.function,
                    args: call.args,
                    line: stmt.line,
                    comments: stmt.comments.clone(),
                });
            }
            StmtKind::Return(expr) => result = Some(lower.arg(expr, stmt.line)?),
        }
    }
    let result = result.ok_or_else(|| ParseError::new(def.end_line, format!("missing return in `{}`", def.name)))?;
    let first_comments = def.body.first().map(|s| s.comments.as_slice()).unwrap_or_default();
    let comment_block = parse_comment_block(first_comments).map_err(|e| {
        ParseError::new(def.line, format!("`{}`: {e}", def.name))
    })?;
    let source = physical[def.line - 1..def.end_line.min(physical.len())].join("\n");
    Ok(SubFunction {
        name: def.name.clone(),
        params: def
            .params
            .iter()
            .map(|p| SubParam {
                name: p.name.clone(),
                annotation: p.annotation.clone(),
            })
            .collect(),
        returns: def.returns.clone(),
        body,
        result,
        comment_block,
        line: def.line,
        source,
    })
}

/// Resolves catalog functions plus the program's own sub-functions.
pub struct ProgramResolver<'a> {
    registry: &'a Registry,
    subs: HashMap<&'a str, &'a SubFunction>,
    table: &'a ColorTable,
    depth: Cell<usize>,
}

impl<'a> ProgramResolver<'a> {
    pub fn new(program: &'a ChunkedProgram, registry: &'a Registry, table: &'a ColorTable) -> Self {
        ProgramResolver {
            registry,
            subs: program.subfunctions.iter().map(|s| (s.name.as_str(), s)).collect(),
            table,
            depth: Cell::new(0),
        }
    }

    fn call_sub(&self, sub: &SubFunction, args: Vec<CallArg>) -> Result<Value, DslError> {
        let n = sub.params.len();
        let arity = |got| DslError::Arity {
            function: sub.name.clone(),
            expected: n.to_string(),
            got,
        };
        let got = args.len();
        let mut slots: Vec<Option<Value>> = vec![None; n];
        let mut next = 0;
        for (keyword, value) in args {
            let idx = match keyword {
                Some(k) => sub.params.iter().position(|p| p.name == k).ok_or(DslError::UnknownKeyword {
                    function: sub.name.clone(),
                    keyword: k,
                })?,
                None => {
                    next += 1;
                    next - 1
                }
            };
            if idx >= n {
                return Err(arity(got));
            }
            if slots[idx].replace(value).is_some() {
                return Err(DslError::DuplicateArgument {
                    function: sub.name.clone(),
                    param: sub.params[idx].name.clone(),
                });
            }
        }
        let mut env = IndexMap::new();
        for (p, v) in sub.params.iter().zip(slots) {
            env.insert(p.name.clone(), v.ok_or_else(|| arity(got))?);
        }
        run_lines(&sub.body, &mut env, self, self.table).map_err(|e| match e.source {
            DslError::Recursion(_) => e.source,
            _ => DslError::domain(&sub.name, e.to_string()),
        })?;
        eval_expr(&sub.result, &env, self, self.table)
    }
}

impl Resolver for ProgramResolver<'_> {
    fn arity(&self, name: &str) -> Option<usize> {
        match self.subs.get(name) {
            Some(s) => Some(s.params.len()),
            None => self.registry.arity(name),
        }
    }

    fn call(&self, name: &str, args: Vec<CallArg>) -> Result<Value, DslError> {
        let Some(sub) = self.subs.get(name) else {
            return self.registry.invoke(self, name, args);
        };
        if self.depth.get() >= MAX_CALL_DEPTH {
            return Err(DslError::Recursion(name.to_string()));
        }
        self.depth.set(self.depth.get() + 1);
        let out = self.call_sub(sub, args);
        self.depth.set(self.depth.get() - 1);
        out
    }
}

/// Run the main function of a chunked program on one input.
pub fn interpret_chunked(
    program: &ChunkedProgram,
    input: &Grid,
    registry: &Registry,
    table: &ColorTable,
) -> Result<Trace, EvalError> {
    let resolver = ProgramResolver::new(program, registry, table);
    interpret_lines(&program.main.lines, input, &resolver, table)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallGraphConfig {
    /// Catalog functions each sub-function should use.
    pub min_dsl_calls: usize,
    pub min_dsl_calls_severity: Severity,
}

impl Default for CallGraphConfig {
    fn default() -> Self {
        CallGraphConfig {
            min_dsl_calls: 2,
            min_dsl_calls_severity: Severity::Warning,
        }
    }
}

/// Call-graph rules: sub-functions never mention each other, each uses
/// enough catalog functions, and every callee exists.
pub fn check_call_graph(program: &ChunkedProgram, registry: &Registry, config: &CallGraphConfig) -> Vec<Diagnostic> {
    let subs: HashSet<&str> = program.subfunctions.iter().map(|s| s.name.as_str()).collect();
    let mut diags = Vec::new();
    for sub in &program.subfunctions {
        let at = Some(sub.line);
        let mut dsl = 0;
        for f in sub.mentioned_functions() {
            if subs.contains(f.as_str()) {
                diags.push(Diagnostic::error(
                    "sub-calls-sub",
                    format!("sub-function calls sub-function: `{}` uses `{f}`", sub.name),
                    at,
                ));
            } else if registry.contains(&f) {
                dsl += 1;
            } else {
                diags.push(unknown_callee(registry, &sub.name, &f, at));
            }
        }
        if dsl < config.min_dsl_calls {
            let message = format!(
                "`{}` uses {dsl} DSL function(s); at least {} expected",
                sub.name, config.min_dsl_calls
            );
            diags.push(match config.min_dsl_calls_severity {
                Severity::Error => Diagnostic::error("min-dsl-calls", message, at),
                Severity::Warning => Diagnostic::warning("min-dsl-calls", message, at),
            });
        }
    }
    for line in &program.main.lines {
        let mut names = Vec::new();
        visit_functions(&line.function, &line.args, &mut |f| names.push(f.to_string()));
        for f in names {
            if !subs.contains(f.as_str()) && !registry.contains(&f) {
                diags.push(unknown_callee(registry, ENTRY_NAME, &f, Some(line.line)));
            }
        }
    }
    // Report order must not depend on the order of the definitions.
    diags.sort_by(|a, b| (&a.rule, &a.message).cmp(&(&b.rule, &b.message)));
    diags.dedup();
    diags
}

fn unknown_callee(registry: &Registry, caller: &str, name: &str, line: Option<usize>) -> Diagnostic {
    let base = unknown_function(registry, name, line);
    Diagnostic::error("unknown-callee", format!("`{caller}`: {}", base.message), line)
}

/// Every variable assigned in main must exist in the original script.
pub fn check_variable_consistency(program: &ChunkedProgram, original: &SolverScript) -> Vec<Diagnostic> {
    let known: HashSet<&str> = original.targets().chain(["I"]).collect();
    program
        .main
        .lines
        .iter()
        .filter(|l| !known.contains(l.target.as_str()))
        .map(|l| {
            Diagnostic::error(
                "unknown-main-variable",
                format!("unknown main variable {}", l.target),
                Some(l.line),
            )
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub diagnostics: Vec<Diagnostic>,
}

/// Run both programs on every train and test input and compare `O`.
/// Shared intermediate variables that differ are reported as warnings.
pub fn check_equivalence(
    program: &ChunkedProgram,
    original: &SolverScript,
    task: &TaskRecord,
    registry: &Registry,
    table: &ColorTable,
) -> EquivalenceReport {
    let mut diags = Vec::new();
    let mut equivalent = true;
    for (kind, index, pair) in task.pairs() {
        let label = format!("{kind} {index}");
        let a = interpret(original, &pair.input, registry, table);
        let b = interpret_chunked(program, &pair.input, registry, table);
        let (a, b) = match (a, b) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => {
                equivalent = false;
                for (who, r) in [("original", a.err()), ("refactored", b.err())] {
                    if let Some(e) = r {
                        diags.push(Diagnostic::error("runtime-error", format!("{who} failed on {label}: {e}"), None));
                    }
                }
                continue;
            }
        };
        match (a.output(), b.output()) {
            (Some(x), Some(y)) if x == y => {}
            (Some(x), Some(y)) => {
                equivalent = false;
                diags.push(Diagnostic::error(
                    "not-equivalent",
                    format!("O differs on {label} ({} cells)", mismatch_count(y, x)),
                    None,
                ));
            }
            _ => {
                equivalent = false;
                diags.push(Diagnostic::error("not-equivalent", format!("O is not a grid on {label}"), None));
            }
        }
        for name in shared_divergence(&a, &b) {
            diags.push(Diagnostic::warning(
                "trace-divergence",
                format!("{name} differs between the programs on {label}"),
                None,
            ));
        }
    }
    EquivalenceReport {
        equivalent,
        diagnostics: diags,
    }
}

/// Names bound in both traces (other than I and O) whose values differ.
pub fn shared_divergence(a: &Trace, b: &Trace) -> Vec<String> {
    let b_names: BTreeSet<&str> = b.names().collect();
    a.iter()
        .filter(|(n, _)| *n != "I" && *n != "O" && b_names.contains(n))
        .filter(|(n, v)| b.get(n) != Some(v))
        .map(|(n, _)| n.to_string())
        .collect()
}
