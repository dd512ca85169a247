//! Semantic type names used by the catalog and the static checker.
//!
//! Each type name denotes a set of concrete kinds; two types unify when their
//! kind sets intersect. That is deliberately loose for union types such as
//! `Patch` or `Container` but still rejects e.g. a set of objects where a
//! patch is expected.

use std::fmt;
use std::str::FromStr;

use bitflags::bitflags;
use serde::{Deserialize, Serialize};

bitflags! {
    #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
    pub struct Kinds: u16 {
        const INTEGER = 1;
        const BOOLEAN = 1 << 1;
        const COLOR = 1 << 2;
        const LOCATION = 1 << 3;
        const CELL = 1 << 4;
        const GRID = 1 << 5;
        const OBJECT = 1 << 6;
        const INDICES = 1 << 7;
        const OBJECTS = 1 << 8;
        const OTHER_SET = 1 << 9;
        const TUPLE = 1 << 10;
        const CALLABLE = 1 << 11;

        const PATCH = Self::OBJECT.bits() | Self::INDICES.bits();
        const SETS = Self::PATCH.bits() | Self::OBJECTS.bits() | Self::OTHER_SET.bits();
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SemType {
    Any,
    Integer,
    Boolean,
    Color,
    Location,
    Cell,
    Grid,
    Object,
    Indices,
    Patch,
    Piece,
    Objects,
    FrozenSet,
    Tuple,
    Container,
    Callable,
}

impl SemType {
    pub const ALL: [SemType; 16] = [
        SemType::Any,
        SemType::Integer,
        SemType::Boolean,
        SemType::Color,
        SemType::Location,
        SemType::Cell,
        SemType::Grid,
        SemType::Object,
        SemType::Indices,
        SemType::Patch,
        SemType::Piece,
        SemType::Objects,
        SemType::FrozenSet,
        SemType::Tuple,
        SemType::Container,
        SemType::Callable,
    ];

    pub fn kinds(self) -> Kinds {
        match self {
            SemType::Any => Kinds::all(),
            SemType::Integer => Kinds::INTEGER,
            SemType::Boolean => Kinds::BOOLEAN,
            SemType::Color => Kinds::COLOR,
            SemType::Location => Kinds::LOCATION,
            SemType::Cell => Kinds::CELL,
            SemType::Grid => Kinds::GRID,
            SemType::Object => Kinds::OBJECT,
            SemType::Indices => Kinds::INDICES,
            SemType::Patch => Kinds::PATCH,
            SemType::Piece => Kinds::PATCH | Kinds::GRID,
            SemType::Objects => Kinds::OBJECTS,
            SemType::FrozenSet => Kinds::SETS,
            SemType::Tuple => Kinds::TUPLE,
            SemType::Container => Kinds::SETS | Kinds::TUPLE,
            SemType::Callable => Kinds::CALLABLE,
        }
    }

    pub fn unifies_with(self, other: SemType) -> bool {
        self.kinds().intersects(other.kinds())
    }

    pub fn name(self) -> &'static str {
        match self {
            SemType::Any => "Any",
            SemType::Integer => "Integer",
            SemType::Boolean => "Boolean",
            SemType::Color => "Color",
            SemType::Location => "Location",
            SemType::Cell => "Cell",
            SemType::Grid => "Grid",
            SemType::Object => "Object",
            SemType::Indices => "Indices",
            SemType::Patch => "Patch",
            SemType::Piece => "Piece",
            SemType::Objects => "Objects",
            SemType::FrozenSet => "FrozenSet",
            SemType::Tuple => "Tuple",
            SemType::Container => "Container",
            SemType::Callable => "Callable",
        }
    }
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SemType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(t) = SemType::ALL.iter().find(|t| t.name() == s) {
            return Ok(*t);
        }
        // Spellings seen in type hints of generated code.
        Ok(match s {
            "Numerical" | "int" => SemType::Integer,
            "bool" => SemType::Boolean,
            "IntegerTuple" => SemType::Location,
            "Element" => SemType::Piece,
            "Callable[..., Any]" => SemType::Callable,
            _ => return Err(format!("unknown semantic type `{s}`")),
        })
    }
}
