use std::collections::BTreeSet;

use crate::color::{Color, ColorTable};
use crate::grid::{render_grid, Cell, Grid, Location};

use super::types::Kinds;

/// A runtime value flowing through DSL evaluation.
///
/// Sets are `BTreeSet`s so iteration order is the canonical order: locations
/// by (row, col), cells by (colour code, row, col).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Color(Color),
    Location(Location),
    Cell(Cell),
    Grid(Grid),
    /// Non-empty set of cells with distinct locations.
    Object(BTreeSet<Cell>),
    Indices(BTreeSet<Location>),
    Set(BTreeSet<Value>),
    Tuple(Vec<Value>),
    Closure(Closure),
}

/// A function value: a catalog (or program) function, possibly with some
/// arguments already bound, or built by one of the combinators.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Closure {
    Function(String),
    FixFirst {
        function: Box<Closure>,
        arg: Box<Value>,
    },
    FixLast {
        function: Box<Closure>,
        arg: Box<Value>,
    },
    Compose {
        outer: Box<Closure>,
        inner: Box<Closure>,
    },
    Combine {
        outer: Box<Closure>,
        first: Box<Closure>,
        second: Box<Closure>,
    },
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "Integer",
            Value::Bool(_) => "Boolean",
            Value::Color(_) => "Color",
            Value::Location(_) => "Location",
            Value::Cell(_) => "Cell",
            Value::Grid(_) => "Grid",
            Value::Object(_) => "Object",
            Value::Indices(_) => "Indices",
            Value::Set(s) if !s.is_empty() && s.iter().all(|v| matches!(v, Value::Object(_))) => {
                "Objects"
            }
            Value::Set(_) => "FrozenSet",
            Value::Tuple(_) => "Tuple",
            Value::Closure(_) => "Callable",
        }
    }

    /// Which semantic kinds this value can stand for.
    pub fn kinds(&self) -> Kinds {
        match self {
            Value::Int(_) => Kinds::INTEGER,
            Value::Bool(_) => Kinds::BOOLEAN,
            Value::Color(_) => Kinds::COLOR,
            Value::Location(_) => Kinds::LOCATION,
            Value::Cell(_) => Kinds::CELL,
            Value::Grid(_) => Kinds::GRID,
            Value::Object(_) => Kinds::OBJECT,
            Value::Indices(s) if s.is_empty() => Kinds::OBJECT | Kinds::INDICES,
            Value::Indices(_) => Kinds::INDICES,
            Value::Set(s) if s.is_empty() => Kinds::SETS,
            Value::Set(s) if s.iter().all(|v| matches!(v, Value::Object(_))) => Kinds::OBJECTS,
            Value::Set(_) => Kinds::OTHER_SET,
            Value::Tuple(_) => Kinds::TUPLE,
            Value::Closure(_) => Kinds::CALLABLE,
        }
    }

    /// Build the most specific set value for a collection of elements:
    /// all cells become an Object, all locations Indices, otherwise a Set.
    /// An empty collection becomes empty Indices.
    pub fn set_of(items: impl IntoIterator<Item = Value>) -> Value {
        let items: BTreeSet<Value> = items.into_iter().collect();
        if items.is_empty() {
            return Value::Indices(BTreeSet::new());
        }
        if items.iter().all(|v| matches!(v, Value::Cell(_))) {
            let cells = items
                .into_iter()
                .map(|v| match v {
                    Value::Cell(c) => c,
                    _ => unreachable!(),
                })
                .collect();
            return Value::Object(cells);
        }
        if items.iter().all(|v| matches!(v, Value::Location(_))) {
            let locs = items
                .into_iter()
                .map(|v| match v {
                    Value::Location(l) => l,
                    _ => unreachable!(),
                })
                .collect();
            return Value::Indices(locs);
        }
        Value::Set(items)
    }

    /// Elements of a container value in canonical order.
    pub fn elements(&self) -> Option<Vec<Value>> {
        Some(match self {
            Value::Object(cells) => cells.iter().copied().map(Value::Cell).collect(),
            Value::Indices(locs) => locs.iter().copied().map(Value::Location).collect(),
            Value::Set(s) => s.iter().cloned().collect(),
            Value::Tuple(t) => t.clone(),
            _ => return None,
        })
    }

    /// Locations covered by a patch (Object or Indices).
    pub fn locations(&self) -> Option<BTreeSet<Location>> {
        match self {
            Value::Object(cells) => Some(cells.iter().map(|c| c.loc).collect()),
            Value::Indices(locs) => Some(locs.clone()),
            Value::Set(s) if s.is_empty() => Some(BTreeSet::new()),
            _ => None,
        }
    }
}

/// Render a value for humans and prompts. Grids at top level are multi-line;
/// everything else is a single line.
pub fn render_value(value: &Value, table: &ColorTable) -> String {
    match value {
        Value::Grid(g) => render_grid(g, table),
        other => render_inline(other, table),
    }
}

fn render_inline(value: &Value, table: &ColorTable) -> String {
    let join = |items: Vec<String>| items.join(", ");
    match value {
        Value::Int(n) => n.to_string(),
        Value::Bool(true) => "True".into(),
        Value::Bool(false) => "False".into(),
        Value::Color(c) => table.name(*c).to_string(),
        Value::Location(l) => l.to_string(),
        Value::Cell(c) => format!("({},{})", table.name(c.color), c.loc),
        Value::Grid(g) => {
            let rows: Vec<String> = g
                .rows()
                .map(|r| {
                    let names: Vec<&str> = r.iter().map(|c| table.name(*c)).collect();
                    format!("[{}]", names.join(", "))
                })
                .collect();
            format!("[{}]", rows.join(", "))
        }
        Value::Object(cells) => format!(
            "{{{}}}",
            join(
                cells
                    .iter()
                    .map(|c| format!("({},{})", table.name(c.color), c.loc))
                    .collect()
            )
        ),
        Value::Indices(locs) => {
            format!("{{{}}}", join(locs.iter().map(|l| l.to_string()).collect()))
        }
        Value::Set(s) => format!(
            "{{{}}}",
            join(s.iter().map(|v| render_inline(v, table)).collect())
        ),
        Value::Tuple(t) => format!(
            "({})",
            join(t.iter().map(|v| render_inline(v, table)).collect())
        ),
        Value::Closure(c) => render_closure(c, table),
    }
}

fn render_closure(c: &Closure, table: &ColorTable) -> String {
    let arg = |v: &Value| match v {
        Value::Grid(g) => format!("<Grid {}x{}>", g.height(), g.width()),
        other => render_inline(other, table),
    };
    match c {
        Closure::Function(name) => name.clone(),
        Closure::FixFirst { function, arg: a } => format!(
            "fix_first_argument(function={}, fixed_arg={})",
            render_closure(function, table),
            arg(a)
        ),
        Closure::FixLast { function, arg: a } => format!(
            "fix_last_argument(function={}, fixed_arg={})",
            render_closure(function, table),
            arg(a)
        ),
        Closure::Compose { outer, inner } => format!(
            "compose(outer={}, inner={})",
            render_closure(outer, table),
            render_closure(inner, table)
        ),
        Closure::Combine {
            outer,
            first,
            second,
        } => format!(
            "combine_two_function_results(outer={}, a={}, b={})",
            render_closure(outer, table),
            render_closure(first, table),
            render_closure(second, table)
        ),
    }
}
