use thiserror::Error;

/// Errors raised while loading or rendering colours, grids and tasks.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("malformed task document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed task document: {0}")]
    Malformed(String),
    #[error("ragged grid: row {row} has {found} cells, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("digit {0} outside 0..9")]
    BadDigit(i64),
    #[error("grid dimensions {height}x{width} outside 1..=30")]
    Dimension { height: usize, width: usize },
    #[error("grid contains the BELOW sentinel colour")]
    BelowInGrid,
    #[error("unknown colour token `{0}`")]
    UnknownToken(String),
    #[error("invalid colour table: {0}")]
    ColorTable(String),
    #[error("value {0} is neither small integer nor color code")]
    NotSmallOrColor(i64),
}
