//! Tracing interpreter for solver scripts.

use indexmap::IndexMap;
use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::color::ColorTable;
use crate::dsl::{render_value, Closure, DslError, Registry, Resolver, Value};
use crate::grid::Grid;

use super::solver::{Arg, ArgExpr, ScriptLine, SolverScript};

/// Every binding produced while running a script, in assignment order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    bindings: IndexMap<String, Value>,
}

impl Trace {
    pub fn new() -> Trace {
        Trace::default()
    }

    pub fn bind(&mut self, name: impl Into<String>, value: Value) {
        self.bindings.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.bindings.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// The output grid, if `O` is bound to a grid.
    pub fn output(&self) -> Option<&Grid> {
        match self.get("O") {
            Some(Value::Grid(g)) => Some(g),
            _ => None,
        }
    }

    /// Human-readable dump: one section per variable.
    pub fn render(&self, table: &ColorTable) -> String {
        let mut out = String::new();
        for (name, value) in self.iter() {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!("{name} ({}):\n{}\n", value.type_name(), render_value(value, table)));
        }
        out
    }

    /// JSON object mapping each variable to its rendered value.
    pub fn rendered<'a>(&'a self, table: &'a ColorTable) -> RenderedTrace<'a> {
        RenderedTrace { trace: self, table }
    }
}

pub struct RenderedTrace<'a> {
    trace: &'a Trace,
    table: &'a ColorTable,
}

impl Serialize for RenderedTrace<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.trace.len()))?;
        for (k, v) in self.trace.iter() {
            map.serialize_entry(k, &render_value(v, self.table))?;
        }
        map.end()
    }
}

/// A runtime failure, pinned to the script line that raised it.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: `{function}` failed: {source}")]
pub struct EvalError {
    pub line: usize,
    pub function: String,
    pub source: DslError,
}

/// Run a script on one input grid, recording every binding.
pub fn interpret(script: &SolverScript, input: &Grid, registry: &Registry, table: &ColorTable) -> Result<Trace, EvalError> {
    interpret_lines(&script.lines, input, registry, table)
}

/// Run a sequence of script lines through any resolver.
pub fn interpret_lines(
    lines: &[ScriptLine],
    input: &Grid,
    resolver: &dyn Resolver,
    table: &ColorTable,
) -> Result<Trace, EvalError> {
    let mut trace = Trace::new();
    trace.bind("I", Value::Grid(input.clone()));
    run_lines(lines, &mut trace.bindings, resolver, table)?;
    Ok(trace)
}

pub(crate) fn run_lines(
    lines: &[ScriptLine],
    env: &mut IndexMap<String, Value>,
    resolver: &dyn Resolver,
    table: &ColorTable,
) -> Result<(), EvalError> {
    for line in lines {
        let value = eval_call(&line.function, &line.args, env, resolver, table).map_err(|source| EvalError {
            line: line.line,
            function: line.function.clone(),
            source,
        })?;
        env.insert(line.target.clone(), value);
    }
    Ok(())
}

pub(crate) fn eval_call(
    function: &str,
    args: &[Arg],
    env: &IndexMap<String, Value>,
    resolver: &dyn Resolver,
    table: &ColorTable,
) -> Result<Value, DslError> {
    let values = args
        .iter()
        .map(|a| Ok((a.keyword.clone(), eval_expr(&a.value, env, resolver, table)?)))
        .collect::<Result<Vec<_>, DslError>>()?;
    resolver.call(function, values)
}

pub(crate) fn eval_expr(
    expr: &ArgExpr,
    env: &IndexMap<String, Value>,
    resolver: &dyn Resolver,
    table: &ColorTable,
) -> Result<Value, DslError> {
    match expr {
        ArgExpr::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| DslError::UndefinedVariable(v.clone())),
        ArgExpr::Color(c) => table
            .resolve_constant(c)
            .map(Value::Color)
            .ok_or_else(|| DslError::UnknownConstant(c.clone())),
        ArgExpr::Int(n) => Ok(Value::Int(*n)),
        ArgExpr::Bool(b) => Ok(Value::Bool(*b)),
        ArgExpr::Func(f) => match resolver.arity(f) {
            Some(_) => Ok(Value::Closure(Closure::Function(f.clone()))),
            None => Err(DslError::UnknownFunction {
                name: f.clone(),
                renamed_to: None,
            }),
        },
        ArgExpr::Call(c) => eval_call(&c.function, &c.args, env, resolver, table),
    }
}
