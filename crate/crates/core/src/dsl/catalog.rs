//! The function catalog: signatures, legacy names and one-line docs.

use serde::{Deserialize, Serialize};

use super::types::SemType;
use super::value::Value;

pub(crate) const STANDARD_CATALOG: &str = include_str!("../../assets/catalog.txt");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub ty: SemType,
    #[serde(skip)]
    pub default: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub name: String,
    pub legacy_name: Option<String>,
    pub params: Vec<Param>,
    pub returns: SemType,
    pub doc: String,
}

impl FunctionSpec {
    /// Number of parameters without a default.
    pub fn required(&self) -> usize {
        self.params.iter().filter(|p| p.default.is_none()).count()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    /// `name(p: T, ...) -> R`
    pub fn signature(&self) -> String {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|p| match &p.default {
                Some(Value::Bool(b)) => format!("{}: {} = {}", p.name, p.ty, if *b { "True" } else { "False" }),
                Some(Value::Int(n)) => format!("{}: {} = {n}", p.name, p.ty),
                _ => format!("{}: {}", p.name, p.ty),
            })
            .collect();
        format!("{}({}) -> {}", self.name, params.join(", "), self.returns)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("catalog line {line}: {message}")]
pub struct CatalogError {
    pub line: usize,
    pub message: String,
}

/// Parse catalog text into function specs.
pub fn parse_catalog(text: &str) -> Result<Vec<FunctionSpec>, CatalogError> {
    let mut specs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| CatalogError {
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.splitn(5, '|').map(str::trim).collect();
        let [name, legacy, params, returns, doc] = fields[..] else {
            return Err(err(format!("expected 5 fields, found {}", fields.len())));
        };
        if name.is_empty() {
            return Err(err("empty name".into()));
        }
        let params = if params.is_empty() || params == "-" {
            Vec::new()
        } else {
            params
                .split(',')
                .map(|p| parse_param(p).map_err(&err))
                .collect::<Result<Vec<_>, _>>()?
        };
        let mut seen_default = false;
        for p in &params {
            if p.default.is_some() {
                seen_default = true;
            } else if seen_default {
                return Err(err(format!("required parameter `{}` after a default", p.name)));
            }
        }
        specs.push(FunctionSpec {
            name: name.to_string(),
            legacy_name: (legacy != "-" && !legacy.is_empty()).then(|| legacy.to_string()),
            params,
            returns: returns.parse().map_err(&err)?,
            doc: doc.to_string(),
        });
    }
    Ok(specs)
}

fn parse_param(text: &str) -> Result<Param, String> {
    let (decl, default) = match text.split_once('=') {
        Some((d, v)) => (d, Some(parse_default(v.trim())?)),
        None => (text, None),
    };
    let (name, ty) = decl
        .split_once(':')
        .ok_or_else(|| format!("parameter `{}` lacks a type", decl.trim()))?;
    Ok(Param {
        name: name.trim().to_string(),
        ty: ty.parse()?,
        default,
    })
}

fn parse_default(v: &str) -> Result<Value, String> {
    match v {
        "True" => Ok(Value::Bool(true)),
        "False" => Ok(Value::Bool(false)),
        _ => v
            .parse::<i64>()
            .map(Value::Int)
            .map_err(|_| format!("unsupported default `{v}`")),
    }
}
