//! Static checks over a parsed solver script.

use std::collections::{HashMap, HashSet};

use crate::diag::Diagnostic;
use crate::dsl::{FunctionSpec, Registry, SemType};

use super::solver::{ArgExpr, ScriptLine, SolverScript};

/// What the checker knows about a variable.
#[derive(Clone, Copy, Debug)]
struct StaticType {
    ty: SemType,
    /// Remaining arity for callable values, when it can be worked out.
    arity: Option<usize>,
}

const ANY: StaticType = StaticType {
    ty: SemType::Any,
    arity: None,
};

/// Check SSA form, function names, keywords, argument types and closure
/// arities. An empty result means the script is clean.
pub fn check_static(script: &SolverScript, registry: &Registry) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let assigned_at: HashMap<&str, usize> = script
        .lines
        .iter()
        .enumerate()
        .rev()
        .map(|(i, l)| (l.target.as_str(), i))
        .collect();
    let mut env: HashMap<String, StaticType> = HashMap::from([(
        "I".to_string(),
        StaticType {
            ty: SemType::Grid,
            arity: None,
        },
    )]);

    if script.lines.is_empty() {
        diags.push(Diagnostic::error("empty-script", "script has no assignments", None));
    }
    for (i, line) in script.lines.iter().enumerate() {
        let at = Some(line.line);
        for v in referenced_vars(line) {
            if env.contains_key(v) {
                continue;
            }
            if assigned_at.get(v).is_some_and(|j| *j >= i) {
                diags.push(Diagnostic::error("use-before-def", format!("use before definition: {v}"), at));
            } else {
                diags.push(Diagnostic::error("undefined-variable", format!("undefined variable {v}"), at));
            }
        }
        let result = check_call(line, registry, &env, &mut diags);
        if line.target == "I" || env.contains_key(&line.target) {
            diags.push(Diagnostic::error(
                "ssa",
                format!("variable {} assigned more than once", line.target),
                at,
            ));
        } else {
            env.insert(line.target.clone(), result);
        }
    }
    if let Some(last) = script.lines.last() {
        if last.target != "O" {
            diags.push(Diagnostic::error(
                "last-target",
                format!("last assignment targets {}, expected O", last.target),
                Some(last.line),
            ));
        }
    }
    for required in ["I", "O"] {
        if !script.returned_vars.iter().any(|v| v == required) {
            diags.push(Diagnostic::error("return-vars", format!("return does not include {required}"), None));
        }
    }
    for v in &script.returned_vars {
        if !env.contains_key(v) && v != "I" {
            diags.push(Diagnostic::error("return-vars", format!("returned variable {v} is never assigned"), None));
        }
    }
    diags
}

fn referenced_vars(line: &ScriptLine) -> Vec<&str> {
    fn walk<'a>(e: &'a ArgExpr, out: &mut Vec<&'a str>) {
        match e {
            ArgExpr::Var(v) => out.push(v),
            ArgExpr::Call(c) => c.args.iter().for_each(|a| walk(&a.value, out)),
            _ => {}
        }
    }
    let mut out = Vec::new();
    line.args.iter().for_each(|a| walk(&a.value, &mut out));
    out
}

/// Diagnostic for a name that is not in the catalog.
pub fn unknown_function(registry: &Registry, name: &str, line: Option<usize>) -> Diagnostic {
    let message = match registry.renamed_to(name) {
        Some(new) => format!("unknown function `{name}`: it was renamed to `{new}`"),
        None => format!("unknown function `{name}`"),
    };
    Diagnostic::error("unknown-function", message, line)
}

fn check_call(
    line: &ScriptLine,
    registry: &Registry,
    env: &HashMap<String, StaticType>,
    diags: &mut Vec<Diagnostic>,
) -> StaticType {
    let at = Some(line.line);
    let Some(spec) = registry.spec(&line.function) else {
        diags.push(unknown_function(registry, &line.function, at));
        return ANY;
    };
    if !registry.is_implemented(&spec.name) {
        diags.push(Diagnostic::warning(
            "not-implemented",
            format!("`{}` has no implementation yet", spec.name),
            at,
        ));
    }

    let mut bound: Vec<Option<&ArgExpr>> = vec![None; spec.params.len()];
    let mut next_positional = 0;
    for arg in &line.args {
        let idx = match &arg.keyword {
            Some(k) => match spec.param_index(k) {
                Some(i) => i,
                None => {
                    let names: Vec<&str> = spec.params.iter().map(|p| p.name.as_str()).collect();
                    diags.push(Diagnostic::error(
                        "unknown-keyword",
                        format!("`{}` has no parameter `{k}` (parameters: {})", spec.name, names.join(", ")),
                        at,
                    ));
                    continue;
                }
            },
            None => {
                next_positional += 1;
                next_positional - 1
            }
        };
        if idx >= bound.len() {
            diags.push(Diagnostic::error(
                "arity",
                format!("`{}` takes at most {} arguments", spec.name, spec.params.len()),
                at,
            ));
            continue;
        }
        if bound[idx].is_some() {
            diags.push(Diagnostic::error(
                "duplicate-argument",
                format!("`{}`: argument `{}` given more than once", spec.name, spec.params[idx].name),
                at,
            ));
        }
        bound[idx] = Some(&arg.value);
    }

    for (param, arg) in spec.params.iter().zip(&bound) {
        let Some(arg) = arg else {
            if param.default.is_none() {
                diags.push(Diagnostic::error(
                    "missing-argument",
                    format!("`{}` is missing argument `{}`", spec.name, param.name),
                    at,
                ));
            }
            continue;
        };
        let found = arg_type(arg, registry, env);
        if let ArgExpr::Func(f) = arg {
            if !registry.contains(f) {
                diags.push(unknown_function(registry, f, at));
            }
        }
        if !found.ty.unifies_with(param.ty) {
            diags.push(Diagnostic::error(
                "type-mismatch",
                format!(
                    "`{}`: argument `{}` expects {}, got {}",
                    spec.name, param.name, param.ty, found.ty
                ),
                at,
            ));
        }
    }

    let arity_of = |name: &str| -> Option<usize> {
        spec.param_index(name)
            .and_then(|i| bound[i])
            .and_then(|a| arg_type(a, registry, env).arity)
    };
    let mut result = StaticType {
        ty: spec.returns,
        arity: None,
    };
    let mut want = |param: &str, expected: usize, what: &str| {
        if let Some(n) = arity_of(param) {
            if n != expected {
                diags.push(Diagnostic::error(
                    "closure-arity",
                    format!("`{}`: `{param}` must be {what}, but takes {n} argument(s)", spec.name),
                    at,
                ));
            }
        }
    };
    match spec.name.as_str() {
        "fix_last_argument" | "fix_first_argument" => {
            if let Some(n) = arity_of("function") {
                if n == 0 {
                    diags.push(Diagnostic::error(
                        "closure-arity",
                        format!("`{}`: function has no free parameter to fix", spec.name),
                        at,
                    ));
                }
                result.arity = Some(n.saturating_sub(1));
            }
        }
        "compose" => {
            want("outer", 1, "unary");
            result.arity = arity_of("inner");
        }
        "combine_two_function_results" => {
            want("outer", 2, "binary");
            result.arity = arity_of("a");
        }
        "keep_if_condition" | "keep_if_condition_and_flatten" | "extract_first_matching" => {
            want("condition", 1, "unary")
        }
        "transform" | "transform_and_flatten" => want("function", 1, "unary"),
        _ => {}
    }
    result
}

fn arg_type(arg: &ArgExpr, registry: &Registry, env: &HashMap<String, StaticType>) -> StaticType {
    let plain = |ty| StaticType { ty, arity: None };
    match arg {
        ArgExpr::Var(v) => env.get(v).copied().unwrap_or(ANY),
        ArgExpr::Color(_) => plain(SemType::Color),
        ArgExpr::Int(_) => plain(SemType::Integer),
        ArgExpr::Bool(_) => plain(SemType::Boolean),
        ArgExpr::Func(f) => StaticType {
            ty: SemType::Callable,
            arity: registry.spec(f).map(FunctionSpec::required),
        },
        ArgExpr::Call(c) => StaticType {
            ty: registry.spec(&c.function).map_or(SemType::Any, |s| s.returns),
            arity: None,
        },
    }
}

/// Names of catalog functions a script refers to, in first-use order.
pub fn referenced_functions(lines: &[ScriptLine]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for line in lines {
        super::solver::visit_functions(&line.function, &line.args, &mut |f| {
            if seen.insert(f.to_string()) {
                out.push(f.to_string());
            }
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::parse_solver;

    fn diags(body: &str) -> Vec<Diagnostic> {
        let src = format!("def solver_virtual(I):\n{body}  return dict(I=I,O=O)\n");
        check_static(&parse_solver(&src).unwrap(), Registry::standard())
    }

    fn rules(body: &str) -> Vec<String> {
        diags(body).into_iter().map(|d| d.rule).collect()
    }

    #[test]
    fn clean_script() {
        assert!(diags("  x1 = rot90(grid=I)\n  O = rot180(grid=x1)\n").is_empty());
    }

    #[test]
    fn dataflow_rules() {
        assert_eq!(rules("  x1 = rot90(grid=x5)\n  x5 = rot90(grid=I)\n  O = rot90(grid=x1)\n"), ["use-before-def"]);
        assert_eq!(rules("  O = rot90(grid=x9)\n"), ["undefined-variable"]);
        assert_eq!(rules("  O = rot90(grid=I)\n  O = rot90(grid=I)\n"), ["ssa"]);
        assert_eq!(rules("  O = rot90(grid=I)\n  x1 = rot90(grid=I)\n"), ["last-target"]);
    }

    #[test]
    fn call_rules() {
        assert_eq!(rules("  O = rot90(grd=I)\n"), ["unknown-keyword", "missing-argument"]);
        assert_eq!(rules("  O = fill(grid=I, color=3, patch=I)\n"), ["type-mismatch", "type-mismatch"]);
        let d = diags("  O = dmirror(grid=I)\n");
        assert_eq!(d[0].rule, "unknown-function");
        assert!(d[0].message.contains("diagonal_mirror"));
        let d = diags("  x1 = fix_last_argument(function=fork, fixed_arg=I)\n  O = rot90(grid=I)\n");
        assert!(d[0].message.contains("combine_two_function_results"));
    }

    #[test]
    fn closure_arity() {
        let r = rules("  x1 = fix_last_argument(function=bordering, fixed_arg=I)\n  x2 = fix_last_argument(function=x1, fixed_arg=I)\n  x3 = fix_last_argument(function=x2, fixed_arg=I)\n  O = rot90(grid=I)\n");
        assert_eq!(r, ["closure-arity"]);
        let r = rules("  x1 = compose(outer=bordering, inner=logical_not)\n  O = rot90(grid=I)\n");
        assert_eq!(r, ["closure-arity"]);
    }
}
