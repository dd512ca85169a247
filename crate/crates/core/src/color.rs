//! Colour codes and the colour table.
//!
//! At runtime a [`Color`] is nothing more than its numeric code in
//! `1009..=1019`. Names and ARC digits live in a [`ColorTable`], which can be
//! permuted to check that solvers never depend on the numeric value of a
//! colour.

use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DataError;

const STANDARD_TABLE: &str = include_str!("../assets/colors.tsv");

/// Largest integer that is still treated as a plain number.
pub const SMALL_INT_MAX: i64 = 20;

/// A colour, identified by its numeric code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Color(u16);

impl Color {
    pub const MIN_CODE: u16 = 1009;
    pub const MAX_CODE: u16 = 1019;

    /// Sentinel that sorts below every palette colour. Never appears in a grid.
    pub const BELOW: Color = Color(Self::MIN_CODE);

    pub fn from_code(code: u16) -> Option<Color> {
        (Self::MIN_CODE..=Self::MAX_CODE)
            .contains(&code)
            .then_some(Color(code))
    }

    pub fn code(self) -> u16 {
        self.0
    }

    pub fn is_below(self) -> bool {
        self == Self::BELOW
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match ColorTable::standard().entry(*self) {
            Some(e) => f.write_str(&e.name),
            None => write!(f, "COLOR#{}", self.0),
        }
    }
}

/// Result of [`classify_integer`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntClass {
    SmallInt(i64),
    Color(Color),
}

/// Decide whether a raw integer is a small quantity or a colour code.
///
/// `0..=20` are quantities, `1009..=1019` are colours, anything else means a
/// solver has mixed up colours and numbers somewhere.
pub fn classify_integer(n: i64) -> Result<IntClass, DataError> {
    if (0..=SMALL_INT_MAX).contains(&n) {
        return Ok(IntClass::SmallInt(n));
    }
    u16::try_from(n)
        .ok()
        .and_then(Color::from_code)
        .map(IntClass::Color)
        .ok_or(DataError::NotSmallOrColor(n))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorEntry {
    pub name: String,
    pub code: u16,
    pub digit: Option<u8>,
    pub aliases: Vec<String>,
}

/// Name / code / ARC-digit triples for all eleven colours, in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorTable {
    entries: Vec<ColorEntry>,
}

const DIGIT_WORDS: [&str; 10] = [
    "ZERO", "ONE", "TWO", "THREE", "FOUR", "FIVE", "SIX", "SEVEN", "EIGHT", "NINE",
];

impl ColorTable {
    /// The table shipped in `assets/colors.tsv`.
    pub fn standard() -> &'static ColorTable {
        static TABLE: OnceLock<ColorTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            ColorTable::parse(STANDARD_TABLE).expect("bundled colour table is valid")
        })
    }

    /// Parse a table file: `name code digit [aliases...]`, whitespace separated,
    /// `-` for "no digit", `#` comments.
    pub fn parse(text: &str) -> Result<ColorTable, DataError> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| DataError::ColorTable(format!("line {}: {msg}", idx + 1));
            let mut fields = line.split_whitespace();
            let name = fields.next().ok_or_else(|| bad("missing name"))?;
            let code = fields
                .next()
                .and_then(|c| c.parse::<u16>().ok())
                .ok_or_else(|| bad("missing or invalid code"))?;
            let digit = match fields.next().ok_or_else(|| bad("missing digit"))? {
                "-" => None,
                d => Some(d.parse::<u8>().map_err(|_| bad("invalid digit"))?),
            };
            entries.push(ColorEntry {
                name: name.to_string(),
                code,
                digit,
                aliases: fields.map(str::to_string).collect(),
            });
        }
        let table = ColorTable { entries };
        table.check()?;
        Ok(table)
    }

    fn check(&self) -> Result<(), DataError> {
        let err = |m: String| Err(DataError::ColorTable(m));
        if self.entries.len() != 11 {
            return err(format!("expected 11 colours, found {}", self.entries.len()));
        }
        let mut codes = HashSet::new();
        let mut digits = HashSet::new();
        let mut names = HashSet::new();
        for e in &self.entries {
            if Color::from_code(e.code).is_none() {
                return err(format!("code {} for {} outside 1009..=1019", e.code, e.name));
            }
            if !codes.insert(e.code) {
                return err(format!("duplicate code {}", e.code));
            }
            for n in std::iter::once(&e.name).chain(&e.aliases) {
                if !names.insert(n.clone()) {
                    return err(format!("duplicate name {n}"));
                }
            }
            match e.digit {
                None if e.code != Color::BELOW.code() => {
                    return err(format!("{} has no digit but is not BELOW", e.name))
                }
                Some(d) if d > 9 || !digits.insert(d) => {
                    return err(format!("bad or duplicate digit {d}"))
                }
                Some(_) if e.code == Color::BELOW.code() => {
                    return err("BELOW must not map to a digit".into())
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> &[ColorEntry] {
        &self.entries
    }

    pub fn entry(&self, c: Color) -> Option<&ColorEntry> {
        self.entries.iter().find(|e| e.code == c.code())
    }

    pub fn name(&self, c: Color) -> &str {
        self.entry(c).map(|e| e.name.as_str()).unwrap_or("?")
    }

    /// Look up a colour by primary name or alias.
    pub fn by_name(&self, name: &str) -> Option<Color> {
        self.entries
            .iter()
            .find(|e| e.name == name || e.aliases.iter().any(|a| a == name))
            .map(|e| Color(e.code))
    }

    /// Look up a colour by its primary name only (the grid token alphabet).
    pub fn by_token(&self, token: &str) -> Option<Color> {
        self.entries
            .iter()
            .find(|e| e.name == token)
            .map(|e| Color(e.code))
    }

    pub fn by_digit(&self, digit: u8) -> Option<Color> {
        self.entries
            .iter()
            .find(|e| e.digit == Some(digit))
            .map(|e| Color(e.code))
    }

    pub fn digit(&self, c: Color) -> Option<u8> {
        self.entry(c).and_then(|e| e.digit)
    }

    /// Resolve a colour constant as written in a solver script.
    ///
    /// Accepted spellings: `COLOR_ZERO`..`COLOR_NINE`, `COLOR_<NAME>`,
    /// `COLOR_BELOW`, and the bare colour name (`BLACK`).
    pub fn resolve_constant(&self, token: &str) -> Option<Color> {
        let rest = token.strip_prefix("COLOR_").unwrap_or(token);
        if let Some(d) = DIGIT_WORDS.iter().position(|w| *w == rest) {
            if token.starts_with("COLOR_") {
                return self.by_digit(d as u8);
            }
            return None;
        }
        self.by_name(rest)
    }

    /// The ARC digit a colour constant denotes, if any. Used to compare code
    /// written with different constant spellings (`COLOR_FOUR` vs `YELLOW`).
    pub fn constant_digit(&self, token: &str) -> Option<Option<u8>> {
        self.resolve_constant(token).map(|c| self.digit(c))
    }

    /// The `COLOR_<DIGIT>` spelling of a constant (`COLOR_BELOW` for BELOW).
    pub fn canonical_constant(&self, token: &str) -> Option<String> {
        Some(match self.constant_digit(token)? {
            Some(d) => format!("COLOR_{}", DIGIT_WORDS[d as usize]),
            None => "COLOR_BELOW".to_string(),
        })
    }

    /// A copy of this table with the ten palette codes shuffled. BELOW keeps
    /// the smallest code; names and digits stay attached to their entries.
    pub fn permuted(&self, seed: u64) -> ColorTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut codes: Vec<u16> = (Color::MIN_CODE + 1..=Color::MAX_CODE).collect();
        codes.shuffle(&mut rng);
        self.with_palette_codes(&codes)
    }

    /// Assign `codes` to the palette entries (everything except BELOW) in
    /// canonical order.
    pub fn with_palette_codes(&self, codes: &[u16]) -> ColorTable {
        let mut it = codes.iter();
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let mut e = e.clone();
                if e.digit.is_some() {
                    e.code = *it.next().expect("ten palette codes");
                }
                e
            })
            .collect();
        ColorTable { entries }
    }

    /// Map a colour from this table to the colour with the same digit in `other`.
    pub fn translate(&self, c: Color, other: &ColorTable) -> Color {
        match self.digit(c) {
            Some(d) => other.by_digit(d).unwrap_or(c),
            None => c,
        }
    }
}
