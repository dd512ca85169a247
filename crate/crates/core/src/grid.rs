//! Locations, cells and rectangular colour grids, plus the one-token-per-pixel
//! text rendering used in prompts and traces.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::color::{Color, ColorTable};
use crate::error::DataError;

pub const MAX_DIM: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub row: i32,
    pub col: i32,
}

impl Location {
    pub fn new(row: i32, col: i32) -> Self {
        Location { row, col }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// A coloured location. Orders by colour code first, then location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub color: Color,
    pub loc: Location,
}

impl Cell {
    pub fn new(color: Color, loc: Location) -> Self {
        Cell { color, loc }
    }
}

/// Rectangular matrix of colours, at most 30x30, never containing BELOW.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Grid {
    height: usize,
    width: usize,
    cells: Vec<Color>,
}

impl Grid {
    pub fn new(rows: Vec<Vec<Color>>) -> Result<Grid, DataError> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != width {
                return Err(DataError::Ragged {
                    row,
                    expected: width,
                    found: r.len(),
                });
            }
        }
        Grid::from_cells(height, width, rows.into_iter().flatten().collect())
    }

    /// Build from row-major cells.
    pub fn from_cells(height: usize, width: usize, cells: Vec<Color>) -> Result<Grid, DataError> {
        if !(1..=MAX_DIM).contains(&height) || !(1..=MAX_DIM).contains(&width) {
            return Err(DataError::Dimension { height, width });
        }
        assert_eq!(cells.len(), height * width, "cell count must match dimensions");
        if cells.iter().any(|c| c.is_below()) {
            return Err(DataError::BelowInGrid);
        }
        Ok(Grid {
            height,
            width,
            cells,
        })
    }

    pub fn filled(height: usize, width: usize, color: Color) -> Result<Grid, DataError> {
        Grid::from_cells(height, width, vec![color; height * width])
    }

    pub fn from_digits(rows: &[Vec<i64>], table: &ColorTable) -> Result<Grid, DataError> {
        let mut out = Vec::with_capacity(rows.len());
        for r in rows {
            let mut row = Vec::with_capacity(r.len());
            for &d in r {
                let digit = u8::try_from(d).map_err(|_| DataError::BadDigit(d))?;
                row.push(table.by_digit(digit).ok_or(DataError::BadDigit(d))?);
            }
            out.push(row);
        }
        Grid::new(out)
    }

    pub fn to_digits(&self, table: &ColorTable) -> Vec<Vec<u8>> {
        self.rows()
            .map(|r| r.iter().map(|c| table.digit(*c).unwrap_or(0)).collect())
            .collect()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, row: usize, col: usize) -> Color {
        self.cells[row * self.width + col]
    }

    /// Colour at a possibly out-of-bounds location.
    pub fn at(&self, loc: Location) -> Option<Color> {
        self.contains(loc)
            .then(|| self.get(loc.row as usize, loc.col as usize))
    }

    pub fn contains(&self, loc: Location) -> bool {
        loc.row >= 0
            && loc.col >= 0
            && (loc.row as usize) < self.height
            && (loc.col as usize) < self.width
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Color]> {
        self.cells.chunks(self.width)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells.iter().enumerate().map(move |(i, c)| {
            Cell::new(
                *c,
                Location::new((i / self.width) as i32, (i % self.width) as i32),
            )
        })
    }

    pub fn colors(&self) -> &[Color] {
        &self.cells
    }

    /// Re-express the grid under another colour table (digit preserving).
    pub fn translate(&self, from: &ColorTable, to: &ColorTable) -> Grid {
        Grid {
            height: self.height,
            width: self.width,
            cells: self.cells.iter().map(|c| from.translate(*c, to)).collect(),
        }
    }
}

/// One line per row, one whitespace-delimited colour name per cell.
pub fn render_grid(grid: &Grid, table: &ColorTable) -> String {
    grid.rows()
        .map(|r| {
            r.iter()
                .map(|c| table.name(*c))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Inverse of [`render_grid`].
pub fn parse_rendered_grid(text: &str, table: &ColorTable) -> Result<Grid, DataError> {
    let mut rows = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let row = line
            .split_whitespace()
            .map(|tok| {
                table
                    .by_token(tok)
                    .ok_or_else(|| DataError::UnknownToken(tok.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Grid::new(rows)
}
