//! Executable semantics of the catalog functions.
//!
//! Every function receives its arguments already bound to parameter order
//! and kind-checked against the catalog, so the accessors below only fail on
//! values that slipped through a loose union type.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::color::{classify_integer, Color, IntClass};
use crate::grid::{Cell, Grid, Location};

use super::registry::{apply, closure_arity, BuiltinFn, DslError, Resolver};
use super::value::{Closure, Value};

pub(crate) fn lookup(name: &str) -> Option<BuiltinFn> {
    Some(match name {
        "as_objects" => as_objects,
        "partition" => partition,
        "color_filter" => color_filter,
        "size_filter" => size_filter,
        "bordering" => bordering,
        "adjacent" => adjacent,
        "manhattan_distance" => manhattan_distance,
        "fill" => fill,
        "recolor" => recolor,
        "paint_onto_grid" => paint_onto_grid,
        "rot90" => rot90,
        "rot180" => rot180,
        "rot270" => rot270,
        "horizontal_mirror" => horizontal_mirror,
        "vertical_mirror" => vertical_mirror,
        "diagonal_mirror" => diagonal_mirror,
        "upscale" => upscale,
        "downscale" => downscale,
        "most_common_color" => most_common_color,
        "palette" => palette,
        "get_color" => get_color,
        "size" => size,
        "other" => other,
        "equals" => equals,
        "logical_not" => logical_not,
        "add" => add,
        "multiply" => multiply,
        "get_first" => get_first,
        "get_last" => get_last,
        "smallest_subgrid_containing" => smallest_subgrid_containing,
        "cartesian_product" => cartesian_product,
        "as_generic_tuple" => as_generic_tuple,
        "make_cell" => make_cell,
        "compose" => compose,
        "fix_last_argument" => fix_last_argument,
        "fix_first_argument" => fix_first_argument,
        "combine_two_function_results" => combine_two_function_results,
        "keep_if_condition" => keep_if_condition,
        "keep_if_condition_and_flatten" => keep_if_condition_and_flatten,
        "extract_first_matching" => extract_first_matching,
        "transform" => transform,
        "transform_and_flatten" => transform_and_flatten,
        _ => return None,
    })
}

// ---------------------------------------------------------------- accessors

fn type_err(function: &str, expected: &str, v: &Value) -> DslError {
    DslError::Type {
        function: function.to_string(),
        param: String::new(),
        expected: expected.to_string(),
        found: v.type_name().to_string(),
    }
}

fn as_grid<'a>(f: &str, v: &'a Value) -> Result<&'a Grid, DslError> {
    match v {
        Value::Grid(g) => Ok(g),
        _ => Err(type_err(f, "Grid", v)),
    }
}

fn as_int(f: &str, v: &Value) -> Result<i64, DslError> {
    match v {
        Value::Int(n) => Ok(*n),
        _ => Err(type_err(f, "Integer", v)),
    }
}

/// Integers entering arithmetic must be small quantities, never colour codes.
fn small_int(f: &str, v: &Value) -> Result<i64, DslError> {
    let n = as_int(f, v)?;
    match classify_integer(n.abs()) {
        Ok(IntClass::SmallInt(_)) => Ok(n),
        _ => Err(DslError::domain(
            f,
            format!("{n} is not a small integer (colour/number confusion?)"),
        )),
    }
}

fn as_bool(f: &str, v: &Value) -> Result<bool, DslError> {
    match v {
        Value::Bool(b) => Ok(*b),
        _ => Err(type_err(f, "Boolean", v)),
    }
}

fn as_color(f: &str, v: &Value) -> Result<Color, DslError> {
    match v {
        Value::Color(c) => Ok(*c),
        _ => Err(type_err(f, "Color", v)),
    }
}

fn as_closure<'a>(f: &str, v: &'a Value) -> Result<&'a Closure, DslError> {
    match v {
        Value::Closure(c) => Ok(c),
        _ => Err(type_err(f, "Callable", v)),
    }
}

fn as_locations(f: &str, v: &Value) -> Result<BTreeSet<Location>, DslError> {
    v.locations().ok_or_else(|| type_err(f, "Patch", v))
}

fn as_elements(f: &str, v: &Value) -> Result<Vec<Value>, DslError> {
    v.elements().ok_or_else(|| type_err(f, "Container", v))
}

fn as_object<'a>(f: &str, v: &'a Value) -> Result<&'a BTreeSet<Cell>, DslError> {
    match v {
        Value::Object(cells) => Ok(cells),
        _ => Err(type_err(f, "Object", v)),
    }
}

/// The single colour of an object, or an error if it has several.
fn uniform_color(f: &str, cells: &BTreeSet<Cell>) -> Result<Color, DslError> {
    let first = cells
        .iter()
        .next()
        .ok_or_else(|| DslError::domain(f, "empty object"))?
        .color;
    if cells.iter().any(|c| c.color != first) {
        return Err(DslError::domain(f, "object has more than one colour"));
    }
    Ok(first)
}

fn grid_result(f: &str, height: usize, width: usize, cells: Vec<Color>) -> Result<Value, DslError> {
    Grid::from_cells(height, width, cells)
        .map(Value::Grid)
        .map_err(|e| DslError::domain(f, e.to_string()))
}

fn predicate(f: &str, r: &dyn Resolver, cond: &Closure, v: Value) -> Result<bool, DslError> {
    match apply(r, cond, vec![v])? {
        Value::Bool(b) => Ok(b),
        other => Err(DslError::domain(
            f,
            format!("condition returned {}, expected Boolean", other.type_name()),
        )),
    }
}

/// Rebuild a container of the same shape as `original` from `items`.
fn same_shape(original: &Value, items: Vec<Value>) -> Value {
    match original {
        Value::Tuple(_) => Value::Tuple(items),
        Value::Set(_) if items.is_empty() => Value::Set(BTreeSet::new()),
        _ => Value::set_of(items),
    }
}

/// Union of several set-valued values.
fn flatten(f: &str, sets: Vec<Value>) -> Result<Value, DslError> {
    let mut all = Vec::new();
    for s in sets {
        all.extend(as_elements(f, &s)?);
    }
    Ok(Value::set_of(all))
}

pub(crate) fn most_common(colors: impl Iterator<Item = Color>) -> Option<Color> {
    let mut counts: BTreeMap<Color, usize> = BTreeMap::new();
    for c in colors {
        *counts.entry(c).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by_key(|(c, n)| (*n, Reverse(*c)))
        .map(|(c, _)| c)
}

// ---------------------------------------------------------------- objects

fn as_objects(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "as_objects";
    let grid = as_grid(F, &a[0])?;
    let discard = as_bool(F, &a[1])?;
    let diagonal = as_bool(F, &a[2])?;
    let multicolor = as_bool(F, &a[3])?;
    let background = most_common(grid.colors().iter().copied());
    let (h, w) = (grid.height() as i32, grid.width() as i32);
    let skip = |c: Color| discard && Some(c) == background;

    let mut seen = vec![false; (h * w) as usize];
    let mut objects = BTreeSet::new();
    for start in grid.cells() {
        let idx = (start.loc.row * w + start.loc.col) as usize;
        if seen[idx] || skip(start.color) {
            continue;
        }
        seen[idx] = true;
        let mut cells = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        while let Some(cell) = queue.pop_front() {
            cells.insert(cell);
            for n in neighbours(cell.loc, diagonal) {
                let Some(color) = grid.at(n) else { continue };
                let nidx = (n.row * w + n.col) as usize;
                if seen[nidx] || skip(color) || (!multicolor && color != cell.color) {
                    continue;
                }
                seen[nidx] = true;
                queue.push_back(Cell::new(color, n));
            }
        }
        objects.insert(Value::Object(cells));
    }
    Ok(Value::Set(objects))
}

pub(crate) fn neighbours(l: Location, diagonal: bool) -> impl Iterator<Item = Location> {
    const ORTHO: [(i32, i32); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
    const DIAG: [(i32, i32); 4] = [(-1, -1), (-1, 1), (1, -1), (1, 1)];
    let extra: &'static [(i32, i32)] = if diagonal { &DIAG } else { &[] };
    ORTHO
        .iter()
        .chain(extra)
        .map(move |(dr, dc)| Location::new(l.row + dr, l.col + dc))
}

fn partition(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    let grid = as_grid("partition", &a[0])?;
    let mut by_color: BTreeMap<Color, BTreeSet<Cell>> = BTreeMap::new();
    for cell in grid.cells() {
        by_color.entry(cell.color).or_default().insert(cell);
    }
    Ok(Value::Set(by_color.into_values().map(Value::Object).collect()))
}

fn color_filter(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "color_filter";
    let color = as_color(F, &a[1])?;
    let mut kept = BTreeSet::new();
    for obj in as_elements(F, &a[0])? {
        if uniform_color(F, as_object(F, &obj)?)? == color {
            kept.insert(obj);
        }
    }
    Ok(Value::Set(kept))
}

fn size_filter(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "size_filter";
    let n = as_int(F, &a[1])?;
    let kept = as_elements(F, &a[0])?
        .into_iter()
        .filter(|v| v.elements().is_some_and(|e| e.len() as i64 == n))
        .collect();
    Ok(Value::Set(kept))
}

fn bordering(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "bordering";
    let locs = as_locations(F, &a[0])?;
    let grid = as_grid(F, &a[1])?;
    let (h, w) = (grid.height() as i32, grid.width() as i32);
    Ok(Value::Bool(locs.iter().any(|l| {
        l.row == 0 || l.col == 0 || l.row == h - 1 || l.col == w - 1
    })))
}

fn min_distance(f: &str, a: &Value, b: &Value) -> Result<i64, DslError> {
    let (la, lb) = (as_locations(f, a)?, as_locations(f, b)?);
    la.iter()
        .flat_map(|x| {
            lb.iter()
                .map(move |y| ((x.row - y.row).abs() + (x.col - y.col).abs()) as i64)
        })
        .min()
        .ok_or_else(|| DslError::domain(f, "empty patch"))
}

fn adjacent(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    Ok(Value::Bool(min_distance("adjacent", &a[0], &a[1])? == 1))
}

fn manhattan_distance(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    Ok(Value::Int(min_distance("manhattan_distance", &a[0], &a[1])?))
}

// ---------------------------------------------------------------- painting

fn fill(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "fill";
    let grid = as_grid(F, &a[0])?;
    let color = as_color(F, &a[1])?;
    let mut cells = grid.colors().to_vec();
    for l in as_locations(F, &a[2])? {
        if !grid.contains(l) {
            return Err(DslError::domain(
                F,
                format!("location {l} outside {}x{} grid", grid.height(), grid.width()),
            ));
        }
        cells[l.row as usize * grid.width() + l.col as usize] = color;
    }
    grid_result(F, grid.height(), grid.width(), cells)
}

fn recolor(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "recolor";
    let color = as_color(F, &a[0])?;
    let locs = as_locations(F, &a[1])?;
    Ok(Value::set_of(
        locs.into_iter().map(|l| Value::Cell(Cell::new(color, l))),
    ))
}

fn paint_onto_grid(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "paint_onto_grid";
    let grid = as_grid(F, &a[0])?;
    let mut cells = grid.colors().to_vec();
    if let Value::Object(obj) = &a[1] {
        for c in obj.iter().filter(|c| grid.contains(c.loc)) {
            cells[c.loc.row as usize * grid.width() + c.loc.col as usize] = c.color;
        }
    } else if !as_locations(F, &a[1])?.is_empty() {
        return Err(type_err(F, "Object", &a[1]));
    }
    grid_result(F, grid.height(), grid.width(), cells)
}

// ---------------------------------------------------------------- geometry

fn remap(f: &str, g: &Grid, height: usize, width: usize, src: impl Fn(usize, usize) -> (usize, usize)) -> Result<Value, DslError> {
    let mut cells = Vec::with_capacity(height * width);
    for r in 0..height {
        for c in 0..width {
            let (sr, sc) = src(r, c);
            cells.push(g.get(sr, sc));
        }
    }
    grid_result(f, height, width, cells)
}

fn rot90(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    let g = as_grid("rot90", &a[0])?;
    let h = g.height();
    remap("rot90", g, g.width(), h, |r, c| (h - 1 - c, r))
}

fn rot180(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    let g = as_grid("rot180", &a[0])?;
    let (h, w) = (g.height(), g.width());
    remap("rot180", g, h, w, |r, c| (h - 1 - r, w - 1 - c))
}

fn rot270(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    let g = as_grid("rot270", &a[0])?;
    let w = g.width();
    remap("rot270", g, w, g.height(), |r, c| (c, w - 1 - r))
}

fn horizontal_mirror(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    let g = as_grid("horizontal_mirror", &a[0])?;
    let (h, w) = (g.height(), g.width());
    remap("horizontal_mirror", g, h, w, |r, c| (h - 1 - r, c))
}

fn vertical_mirror(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    let g = as_grid("vertical_mirror", &a[0])?;
    let (h, w) = (g.height(), g.width());
    remap("vertical_mirror", g, h, w, |r, c| (r, w - 1 - c))
}

fn diagonal_mirror(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    let g = as_grid("diagonal_mirror", &a[0])?;
    remap("diagonal_mirror", g, g.width(), g.height(), |r, c| (c, r))
}

fn factor(f: &str, v: &Value) -> Result<usize, DslError> {
    let n = small_int(f, v)?;
    if n < 1 {
        return Err(DslError::domain(f, format!("factor must be at least 1, got {n}")));
    }
    Ok(n as usize)
}

fn upscale(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "upscale";
    let g = as_grid(F, &a[0])?;
    let k = factor(F, &a[1])?;
    remap(F, g, g.height() * k, g.width() * k, |r, c| (r / k, c / k))
}

fn downscale(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "downscale";
    let g = as_grid(F, &a[0])?;
    let k = factor(F, &a[1])?;
    if g.height() % k != 0 || g.width() % k != 0 {
        return Err(DslError::domain(
            F,
            format!("factor {k} does not divide {}x{}", g.height(), g.width()),
        ));
    }
    remap(F, g, g.height() / k, g.width() / k, |r, c| (r * k, c * k))
}

fn smallest_subgrid_containing(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "smallest_subgrid_containing";
    let locs = as_locations(F, &a[0])?;
    let g = as_grid(F, &a[1])?;
    let inside: Vec<Location> = locs.into_iter().filter(|l| g.contains(*l)).collect();
    if inside.is_empty() {
        return Err(DslError::domain(F, "patch has no location inside the grid"));
    }
    let r0 = inside.iter().map(|l| l.row).min().unwrap() as usize;
    let r1 = inside.iter().map(|l| l.row).max().unwrap() as usize;
    let c0 = inside.iter().map(|l| l.col).min().unwrap() as usize;
    let c1 = inside.iter().map(|l| l.col).max().unwrap() as usize;
    remap(F, g, r1 - r0 + 1, c1 - c0 + 1, |r, c| (r + r0, c + c0))
}

// ---------------------------------------------------------------- colours

fn piece_colors(f: &str, v: &Value) -> Result<Vec<Color>, DslError> {
    match v {
        Value::Grid(g) => Ok(g.colors().to_vec()),
        Value::Object(cells) => Ok(cells.iter().map(|c| c.color).collect()),
        other => Err(type_err(f, "Grid or Object", other)),
    }
}

fn most_common_color(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "most_common_color";
    most_common(piece_colors(F, &a[0])?.into_iter())
        .map(Value::Color)
        .ok_or_else(|| DslError::domain(F, "no colours"))
}

fn palette(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    let colors: BTreeSet<Value> = piece_colors("palette", &a[0])?
        .into_iter()
        .map(Value::Color)
        .collect();
    Ok(Value::Set(colors))
}

fn get_color(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "get_color";
    uniform_color(F, as_object(F, &a[0])?).map(Value::Color)
}

// ---------------------------------------------------------------- scalars

fn size(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    Ok(Value::Int(as_elements("size", &a[0])?.len() as i64))
}

fn other(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "other";
    as_elements(F, &a[0])?
        .into_iter()
        .find(|v| *v != a[1])
        .ok_or_else(|| DslError::domain(F, "no other element"))
}

fn equals(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    Ok(Value::Bool(a[0] == a[1]))
}

fn logical_not(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    Ok(Value::Bool(!as_bool("logical_not", &a[0])?))
}

fn add(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    Ok(Value::Int(small_int("add", &a[0])? + small_int("add", &a[1])?))
}

fn multiply(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    Ok(Value::Int(
        small_int("multiply", &a[0])? * small_int("multiply", &a[1])?,
    ))
}

fn get_first(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    as_elements("get_first", &a[0])?
        .into_iter()
        .next()
        .ok_or_else(|| DslError::domain("get_first", "empty container"))
}

fn get_last(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    as_elements("get_last", &a[0])?
        .into_iter()
        .last()
        .ok_or_else(|| DslError::domain("get_last", "empty container"))
}

fn cartesian_product(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "cartesian_product";
    let xs = as_elements(F, &a[0])?;
    let ys = as_elements(F, &a[1])?;
    let pairs: BTreeSet<Value> = xs
        .iter()
        .flat_map(|x| ys.iter().map(move |y| Value::Tuple(vec![x.clone(), y.clone()])))
        .collect();
    Ok(Value::Set(pairs))
}

fn as_generic_tuple(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    Ok(Value::Tuple(vec![a[0].clone(), a[1].clone()]))
}

fn make_cell(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "make_cell";
    let color = as_color(F, &a[0])?;
    match &a[1] {
        Value::Location(l) => Ok(Value::Cell(Cell::new(color, *l))),
        other => Err(type_err(F, "Location", other)),
    }
}

// ---------------------------------------------------------------- combinators

fn compose(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "compose";
    Ok(Value::Closure(Closure::Compose {
        outer: Box::new(as_closure(F, &a[0])?.clone()),
        inner: Box::new(as_closure(F, &a[1])?.clone()),
    }))
}

fn fix_argument(f: &str, r: &dyn Resolver, a: &[Value], last: bool) -> Result<Value, DslError> {
    let function = as_closure(f, &a[0])?.clone();
    if closure_arity(r, &function)? == 0 {
        return Err(DslError::domain(f, "function has no unbound argument left to fix"));
    }
    let function = Box::new(function);
    let arg = Box::new(a[1].clone());
    Ok(Value::Closure(if last {
        Closure::FixLast { function, arg }
    } else {
        Closure::FixFirst { function, arg }
    }))
}

fn fix_last_argument(r: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    fix_argument("fix_last_argument", r, a, true)
}

fn fix_first_argument(r: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    fix_argument("fix_first_argument", r, a, false)
}

fn combine_two_function_results(_: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "combine_two_function_results";
    Ok(Value::Closure(Closure::Combine {
        outer: Box::new(as_closure(F, &a[0])?.clone()),
        first: Box::new(as_closure(F, &a[1])?.clone()),
        second: Box::new(as_closure(F, &a[2])?.clone()),
    }))
}

fn keep_if_condition(r: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "keep_if_condition";
    let cond = as_closure(F, &a[1])?;
    let mut kept = Vec::new();
    for v in as_elements(F, &a[0])? {
        if predicate(F, r, cond, v.clone())? {
            kept.push(v);
        }
    }
    Ok(same_shape(&a[0], kept))
}

fn keep_if_condition_and_flatten(r: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "keep_if_condition_and_flatten";
    let cond = as_closure(F, &a[1])?;
    let mut kept = Vec::new();
    for v in as_elements(F, &a[0])? {
        if predicate(F, r, cond, v.clone())? {
            kept.push(v);
        }
    }
    flatten(F, kept)
}

fn extract_first_matching(r: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "extract_first_matching";
    let cond = as_closure(F, &a[1])?;
    for v in as_elements(F, &a[0])? {
        if predicate(F, r, cond, v.clone())? {
            return Ok(v);
        }
    }
    Err(DslError::domain(F, "no element satisfies the condition"))
}

fn transform(r: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "transform";
    let f = as_closure(F, &a[0])?;
    let out = as_elements(F, &a[1])?
        .into_iter()
        .map(|v| apply(r, f, vec![v]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(same_shape(&a[1], out))
}

fn transform_and_flatten(r: &dyn Resolver, a: &[Value]) -> Result<Value, DslError> {
    const F: &str = "transform_and_flatten";
    let f = as_closure(F, &a[0])?;
    let out = as_elements(F, &a[1])?
        .into_iter()
        .map(|v| apply(r, f, vec![v]))
        .collect::<Result<Vec<_>, _>>()?;
    flatten(F, out)
}
