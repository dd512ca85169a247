use std::collections::HashMap;
use std::sync::OnceLock;

use thiserror::Error;

use super::builtins;
use super::catalog::{parse_catalog, CatalogError, FunctionSpec, STANDARD_CATALOG};
use super::value::{Closure, Value};

/// Nested closure applications deeper than this are treated as runaway.
const MAX_DEPTH: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("unknown function `{name}`{}", renamed_to.as_ref().map(|n| format!(" (renamed to `{n}`)")).unwrap_or_default())]
    UnknownFunction {
        name: String,
        renamed_to: Option<String>,
    },
    #[error("`{function}` expects {expected} argument(s), got {got}")]
    Arity {
        function: String,
        expected: String,
        got: usize,
    },
    #[error("`{function}` has no parameter named `{keyword}`")]
    UnknownKeyword { function: String, keyword: String },
    #[error("`{function}`: argument `{param}` given more than once")]
    DuplicateArgument { function: String, param: String },
    #[error("`{function}`: argument `{param}` expects {expected}, got {found}")]
    Type {
        function: String,
        param: String,
        expected: String,
        found: String,
    },
    #[error("`{function}`: {message}")]
    Domain { function: String, message: String },
    #[error("`{0}` is in the catalog but not yet implemented")]
    NotImplemented(String),
    #[error("call depth limit exceeded in `{0}`")]
    Recursion(String),
    #[error("undefined variable `{0}`")]
    UndefinedVariable(String),
    #[error("unknown colour constant `{0}`")]
    UnknownConstant(String),
}

impl DslError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            DslError::UnknownFunction { .. } => "unknown-function",
            DslError::Arity { .. } => "arity",
            DslError::UnknownKeyword { .. } => "unknown-keyword",
            DslError::DuplicateArgument { .. } => "duplicate-argument",
            DslError::Type { .. } => "type",
            DslError::Domain { .. } => "domain",
            DslError::NotImplemented(_) => "not-implemented",
            DslError::Recursion(_) => "recursion",
            DslError::UndefinedVariable(_) => "undefined-variable",
            DslError::UnknownConstant(_) => "unknown-constant",
        }
    }

    pub(crate) fn domain(function: &str, message: impl Into<String>) -> DslError {
        DslError::Domain {
            function: function.to_string(),
            message: message.into(),
        }
    }
}

/// An argument as written at a call site.
pub type CallArg = (Option<String>, Value);

/// Something that can call functions by name: the registry itself, or a
/// program that adds its own sub-functions on top of it.
pub trait Resolver {
    /// Number of required arguments, if `name` is callable.
    fn arity(&self, name: &str) -> Option<usize>;
    fn call(&self, name: &str, args: Vec<CallArg>) -> Result<Value, DslError>;
}

pub type BuiltinFn = fn(&dyn Resolver, &[Value]) -> Result<Value, DslError>;

/// The catalog of DSL functions plus their implementations. Built once and
/// read-only afterwards.
pub struct Registry {
    specs: Vec<FunctionSpec>,
    by_name: HashMap<String, usize>,
    by_legacy: HashMap<String, usize>,
    impls: HashMap<String, BuiltinFn>,
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registry")
            .field("functions", &self.specs.len())
            .finish()
    }
}

impl Registry {
    pub fn standard() -> &'static Registry {
        static REGISTRY: OnceLock<Registry> = OnceLock::new();
        REGISTRY.get_or_init(|| {
            Registry::from_catalog(STANDARD_CATALOG).expect("bundled catalog is valid")
        })
    }

    pub fn from_catalog(text: &str) -> Result<Registry, CatalogError> {
        let specs = parse_catalog(text)?;
        let mut by_name = HashMap::new();
        let mut by_legacy = HashMap::new();
        for (i, s) in specs.iter().enumerate() {
            let dup = |what: &str, n: &str| CatalogError {
                line: 0,
                message: format!("duplicate {what} `{n}`"),
            };
            if by_name.insert(s.name.clone(), i).is_some() {
                return Err(dup("name", &s.name));
            }
            if let Some(l) = &s.legacy_name {
                if by_legacy.insert(l.clone(), i).is_some() {
                    return Err(dup("legacy name", l));
                }
            }
        }
        let impls = specs
            .iter()
            .filter_map(|s| builtins::lookup(&s.name).map(|f| (s.name.clone(), f)))
            .collect();
        Ok(Registry {
            specs,
            by_name,
            by_legacy,
            impls,
        })
    }

    pub fn specs(&self) -> &[FunctionSpec] {
        &self.specs
    }

    pub fn spec(&self, name: &str) -> Option<&FunctionSpec> {
        self.by_name.get(name).map(|i| &self.specs[*i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    /// Current name for a legacy (pre-rename) function name.
    pub fn renamed_to(&self, legacy: &str) -> Option<&str> {
        self.by_legacy
            .get(legacy)
            .map(|i| self.specs[*i].name.as_str())
            .filter(|n| *n != legacy)
    }

    pub fn is_implemented(&self, name: &str) -> bool {
        self.impls.contains_key(name)
    }

    pub fn unknown(&self, name: &str) -> DslError {
        DslError::UnknownFunction {
            name: name.to_string(),
            renamed_to: self.renamed_to(name).map(str::to_string),
        }
    }

    /// Call a catalog function with positional arguments.
    pub fn evaluate_builtin(&self, name: &str, args: Vec<Value>) -> Result<Value, DslError> {
        self.invoke(self, name, args.into_iter().map(|v| (None, v)).collect())
    }

    /// Call a catalog function; closures it receives are applied through
    /// `resolver`, so they may refer to functions outside the catalog.
    pub fn invoke(&self, resolver: &dyn Resolver, name: &str, args: Vec<CallArg>) -> Result<Value, DslError> {
        let spec = self.spec(name).ok_or_else(|| self.unknown(name))?;
        let imp = self
            .impls
            .get(name)
            .ok_or_else(|| DslError::NotImplemented(name.to_string()))?;
        let values = bind_arguments(spec, args)?;
        imp(resolver, &values)
    }
}

impl Resolver for Registry {
    fn arity(&self, name: &str) -> Option<usize> {
        self.spec(name).map(FunctionSpec::required)
    }

    fn call(&self, name: &str, args: Vec<CallArg>) -> Result<Value, DslError> {
        self.invoke(self, name, args)
    }
}

/// Map call-site arguments onto parameter slots, fill defaults and check
/// every value against its parameter type.
pub fn bind_arguments(spec: &FunctionSpec, args: Vec<CallArg>) -> Result<Vec<Value>, DslError> {
    let n = spec.params.len();
    let arity_err = |got| DslError::Arity {
        function: spec.name.clone(),
        expected: if spec.required() == n {
            n.to_string()
        } else {
            format!("{}..={}", spec.required(), n)
        },
        got,
    };
    let got = args.len();
    if got > n {
        return Err(arity_err(got));
    }
    let mut slots: Vec<Option<Value>> = vec![None; n];
    let mut next_positional = 0;
    for (keyword, value) in args {
        let idx = match keyword {
            Some(k) => spec.param_index(&k).ok_or_else(|| DslError::UnknownKeyword {
                function: spec.name.clone(),
                keyword: k.clone(),
            })?,
            None => {
                let i = next_positional;
                next_positional += 1;
                i
            }
        };
        if slots[idx].is_some() {
            return Err(DslError::DuplicateArgument {
                function: spec.name.clone(),
                param: spec.params[idx].name.clone(),
            });
        }
        slots[idx] = Some(value);
    }
    let mut values = Vec::with_capacity(n);
    for (slot, param) in slots.into_iter().zip(&spec.params) {
        let v = match slot.or_else(|| param.default.clone()) {
            Some(v) => v,
            None => return Err(arity_err(got)),
        };
        if !v.kinds().intersects(param.ty.kinds()) {
            return Err(DslError::Type {
                function: spec.name.clone(),
                param: param.name.clone(),
                expected: param.ty.to_string(),
                found: v.type_name().to_string(),
            });
        }
        values.push(v);
    }
    Ok(values)
}

/// Number of arguments a closure still needs.
pub fn closure_arity(resolver: &dyn Resolver, closure: &Closure) -> Result<usize, DslError> {
    Ok(match closure {
        Closure::Function(name) => resolver.arity(name).ok_or_else(|| DslError::UnknownFunction {
            name: name.clone(),
            renamed_to: None,
        })?,
        Closure::FixFirst { function, .. } | Closure::FixLast { function, .. } => {
            closure_arity(resolver, function)?.saturating_sub(1)
        }
        Closure::Compose { inner, .. } => closure_arity(resolver, inner)?,
        Closure::Combine { first, .. } => closure_arity(resolver, first)?,
    })
}

/// Apply a closure to positional arguments.
pub fn apply(resolver: &dyn Resolver, closure: &Closure, args: Vec<Value>) -> Result<Value, DslError> {
    apply_at(resolver, closure, args, 0)
}

fn apply_at(resolver: &dyn Resolver, closure: &Closure, mut args: Vec<Value>, depth: usize) -> Result<Value, DslError> {
    if depth > MAX_DEPTH {
        return Err(DslError::Recursion(render_head(closure)));
    }
    match closure {
        Closure::Function(name) => resolver.call(name, args.into_iter().map(|v| (None, v)).collect()),
        Closure::FixFirst { function, arg } => {
            args.insert(0, (**arg).clone());
            apply_at(resolver, function, args, depth + 1)
        }
        Closure::FixLast { function, arg } => {
            args.push((**arg).clone());
            apply_at(resolver, function, args, depth + 1)
        }
        Closure::Compose { outer, inner } => {
            let mid = apply_at(resolver, inner, args, depth + 1)?;
            apply_at(resolver, outer, vec![mid], depth + 1)
        }
        Closure::Combine {
            outer,
            first,
            second,
        } => {
            let a = apply_at(resolver, first, args.clone(), depth + 1)?;
            let b = apply_at(resolver, second, args, depth + 1)?;
            apply_at(resolver, outer, vec![a, b], depth + 1)
        }
    }
}

fn render_head(c: &Closure) -> String {
    match c {
        Closure::Function(n) => n.clone(),
        Closure::FixFirst { .. } => "fix_first_argument".into(),
        Closure::FixLast { .. } => "fix_last_argument".into(),
        Closure::Compose { .. } => "compose".into(),
        Closure::Combine { .. } => "combine_two_function_results".into(),
    }
}
