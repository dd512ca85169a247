//! Solver scripts: the straight-line `solver_virtual(I)` programs.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::color::ColorTable;

use super::syntax::{parse_program, Def, Expr, ParseError, StmtKind};

/// An argument expression inside a call.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ArgExpr {
    Var(String),
    /// A colour constant exactly as written (`COLOR_ZERO`, `BLACK`, ...).
    Color(String),
    Int(i64),
    Bool(bool),
    Func(String),
    /// Nested call; only allowed in chunked programs.
    Call(CallExpr),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arg {
    pub keyword: Option<String>,
    pub value: ArgExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallExpr {
    pub function: String,
    pub args: Vec<Arg>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScriptLine {
    pub target: String,
    pub function: String,
    pub args: Vec<Arg>,
    pub line: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub comments: Vec<String>,
}

/// Source position and comments are metadata, not part of the program.
impl PartialEq for ScriptLine {
    fn eq(&self, other: &Self) -> bool {
        self.target == other.target && self.function == other.function && self.args == other.args
    }
}

impl Eq for ScriptLine {}

impl ScriptLine {
    pub fn call(&self) -> CallExpr {
        CallExpr {
            function: self.function.clone(),
            args: self.args.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnStyle {
    /// `return dict(I=I, ..., O=O)`
    Dict,
    /// `return O`
    Single,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverScript {
    #[serde(default)]
    pub task_id: String,
    pub name: String,
    pub lines: Vec<ScriptLine>,
    pub returned_vars: Vec<String>,
    pub return_style: ReturnStyle,
}

impl PartialEq for SolverScript {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.lines == other.lines
            && self.returned_vars == other.returned_vars
            && self.return_style == other.return_style
    }
}

impl Eq for SolverScript {}

impl SolverScript {
    pub fn targets(&self) -> impl Iterator<Item = &str> {
        self.lines.iter().map(|l| l.target.as_str())
    }

    /// The script with only its first `k` lines, returning what it has.
    pub fn prefix(&self, k: usize) -> SolverScript {
        let lines: Vec<ScriptLine> = self.lines.iter().take(k).cloned().collect();
        let defined: HashSet<&str> = lines.iter().map(|l| l.target.as_str()).collect();
        SolverScript {
            returned_vars: self
                .returned_vars
                .iter()
                .filter(|v| *v == "I" || defined.contains(v.as_str()))
                .cloned()
                .collect(),
            lines,
            ..self.clone()
        }
    }
}

fn variable_like() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(I|O|x\d+)$").unwrap())
}

fn constant_like(name: &str) -> bool {
    name.chars().any(|c| c.is_ascii_uppercase())
        && name
            .chars()
            .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

/// Decide what a bare identifier in argument position denotes.
pub(crate) fn classify_name(
    name: &str,
    scope: &HashSet<String>,
    table: &ColorTable,
) -> Result<ArgExpr, String> {
    if scope.contains(name) || variable_like().is_match(name) {
        return Ok(ArgExpr::Var(name.to_string()));
    }
    match name {
        "True" => return Ok(ArgExpr::Bool(true)),
        "False" => return Ok(ArgExpr::Bool(false)),
        _ => {}
    }
    if table.resolve_constant(name).is_some() {
        return Ok(ArgExpr::Color(name.to_string()));
    }
    if constant_like(name) {
        return Err(format!("unknown literal token `{name}`"));
    }
    Ok(ArgExpr::Func(name.to_string()))
}

pub(crate) struct Lowering<'a> {
    pub scope: HashSet<String>,
    pub table: &'a ColorTable,
    /// Strict mode: keyword arguments only, no nested calls.
    pub strict: bool,
}

impl Lowering<'_> {
    pub fn call(&self, function: &str, args: &[(Option<String>, Expr)], line: usize) -> Result<CallExpr, ParseError> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(args.len());
        for (keyword, expr) in args {
            if self.strict && keyword.is_none() {
                return Err(ParseError::new(
                    line,
                    format!("positional argument in call to `{function}`; arguments must be keywords"),
                ));
            }
            if let Some(k) = keyword {
                if !seen.insert(k.clone()) {
                    return Err(ParseError::new(line, format!("keyword `{k}` repeated in call to `{function}`")));
                }
            }
            out.push(Arg {
                keyword: keyword.clone(),
                value: self.arg(expr, line)?,
            });
        }
        Ok(CallExpr {
            function: function.to_string(),
            args: out,
        })
    }

    pub fn arg(&self, expr: &Expr, line: usize) -> Result<ArgExpr, ParseError> {
        match expr {
            Expr::Int(n) => Ok(ArgExpr::Int(*n)),
            Expr::Name(n) => classify_name(n, &self.scope, self.table).map_err(|m| ParseError::new(line, m)),
            Expr::Call { function, args } => {
                if self.strict {
                    return Err(ParseError::new(line, "multiple calls on one line"));
                }
                Ok(ArgExpr::Call(self.call(function, args, line)?))
            }
        }
    }
}

/// Parse a solver script in the strict grammar, resolving colour constants
/// against the standard colour table.
pub fn parse_solver(text: &str) -> Result<SolverScript, ParseError> {
    parse_solver_with(text, ColorTable::standard())
}

pub fn parse_solver_with(text: &str, table: &ColorTable) -> Result<SolverScript, ParseError> {
    let defs = parse_program(text)?;
    match defs.as_slice() {
        [def] => lower_def(def, table, true),
        [] => Err(ParseError::new(1, "no function definition found")),
        [_, second, ..] => Err(ParseError::new(second.line, "expected exactly one function definition")),
    }
}

/// Read a solver file; the task id is the file stem.
pub fn load_solver(path: &Path) -> Result<SolverScript, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(path.display().to_string(), e))?;
    let mut script = parse_solver(&text).map_err(|e| LoadError::Parse(path.display().to_string(), e))?;
    script.task_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(script)
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("{0}: {1}")]
    Parse(String, ParseError),
}

/// Turn a parsed definition with parameter `I` into a script.
pub(crate) fn lower_def(def: &Def, table: &ColorTable, strict: bool) -> Result<SolverScript, ParseError> {
    if def.param_names() != ["I"] {
        return Err(ParseError::new(def.line, format!("`{}` must take exactly one parameter `I`", def.name)));
    }
    let mut scope: HashSet<String> = HashSet::from(["I".to_string()]);
    for stmt in &def.body {
        if let StmtKind::Assign { target, .. } = &stmt.kind {
            scope.insert(target.clone());
        }
    }
    let lower = Lowering { scope, table, strict };
    let mut lines = Vec::new();
    let mut ret = None;
    for stmt in &def.body {
        if ret.is_some() {
            return Err(ParseError::new(stmt.line, "statement after return"));
        }
        match &stmt.kind {
            StmtKind::Assign { target, expr } => {
                let Expr::Call { function, args } = expr else {
                    return Err(ParseError::new(stmt.line, format!("right-hand side of `{target}` must be a call")));
                };
                let call = lower.call(function, args, stmt.line)?;
                lines.push(ScriptLine {
                    target: target.clone(),
                    function: call.function,
                    args: call.args,
                    line: stmt.line,
                    comments: stmt.comments.clone(),
                });
            }
            StmtKind::Return(expr) => ret = Some(lower_return(expr, stmt.line)?),
        }
    }
    let (returned_vars, return_style) =
        ret.ok_or_else(|| ParseError::new(def.end_line, format!("missing return in `{}`", def.name)))?;
    Ok(SolverScript {
        task_id: String::new(),
        name: def.name.clone(),
        lines,
        returned_vars,
        return_style,
    })
}

fn lower_return(expr: &Expr, line: usize) -> Result<(Vec<String>, ReturnStyle), ParseError> {
    match expr {
        Expr::Name(n) => Ok((vec!["I".to_string(), n.clone()], ReturnStyle::Single)),
        Expr::Call { function, args } if function == "dict" => {
            let mut vars = Vec::new();
            for (k, v) in args {
                match (k, v) {
                    (Some(k), Expr::Name(n)) if k == n => vars.push(k.clone()),
                    _ => return Err(ParseError::new(line, "return dict entries must have the form `x=x`")),
                }
            }
            Ok((vars, ReturnStyle::Dict))
        }
        _ => Err(ParseError::new(line, "return must name a variable or build `dict(...)`")),
    }
}

/// Call `f` on every function name in a call, in source order: the callee
/// first, then callees and function references inside the arguments.
pub fn visit_functions(function: &str, args: &[Arg], f: &mut dyn FnMut(&str)) {
    f(function);
    for a in args {
        match &a.value {
            ArgExpr::Func(name) => f(name),
            ArgExpr::Call(c) => visit_functions(&c.function, &c.args, f),
            _ => {}
        }
    }
}

pub fn render_arg(value: &ArgExpr) -> String {
    match value {
        ArgExpr::Var(s) | ArgExpr::Color(s) | ArgExpr::Func(s) => s.clone(),
        ArgExpr::Int(n) => n.to_string(),
        ArgExpr::Bool(b) => if *b { "True" } else { "False" }.to_string(),
        ArgExpr::Call(c) => render_call(c),
    }
}

pub fn render_call(call: &CallExpr) -> String {
    render_call_parts(&call.function, &call.args)
}

pub(crate) fn render_call_parts(function: &str, args: &[Arg]) -> String {
    let args: Vec<String> = args
        .iter()
        .map(|a| match &a.keyword {
            Some(k) => format!("{k}={}", render_arg(&a.value)),
            None => render_arg(&a.value),
        })
        .collect();
    format!("{function}({})", args.join(", "))
}

pub fn render_line(line: &ScriptLine) -> String {
    format!("{} = {}", line.target, render_call_parts(&line.function, &line.args))
}

/// Canonical source text of a script.
pub fn pretty_print(script: &SolverScript) -> String {
    print_script(script, false)
}

/// Canonical source text including the comments attached to each line.
pub fn pretty_print_commented(script: &SolverScript) -> String {
    print_script(script, true)
}

fn print_script(script: &SolverScript, comments: bool) -> String {
    let mut out = format!("def {}(I):\n", script.name);
    for (i, line) in script.lines.iter().enumerate() {
        if comments && !line.comments.is_empty() {
            if i > 0 {
                out.push('\n');
            }
            for c in &line.comments {
                let _ = writeln!(out, "  # {c}");
            }
        }
        let _ = writeln!(out, "  {}", render_line(line));
    }
    out.push_str("  return ");
    out.push_str(&render_return(script));
    out.push('\n');
    out
}

pub(crate) fn render_return(script: &SolverScript) -> String {
    match script.return_style {
        ReturnStyle::Single => script.returned_vars.last().cloned().unwrap_or_default(),
        ReturnStyle::Dict => {
            let items: Vec<String> = script.returned_vars.iter().map(|v| format!("{v}={v}")).collect();
            format!("dict({})", items.join(","))
        }
    }
}
