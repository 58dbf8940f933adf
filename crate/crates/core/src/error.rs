use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is the origin; angular coordinates are undefined")]
    ZeroPoint,

    #[error("point ({x1}, {x2}) has a non-finite coordinate")]
    NonFinitePoint { x1: f64, x2: f64 },

    #[error("angles must satisfy 0 < theta_l <= theta_u < 1, got ({theta_l}, {theta_u})")]
    OutOfRangeAngle { theta_l: f64, theta_u: f64 },

    #[error("wedge slopes must satisfy 0 < a_l <= a_u < inf, got ({a_l}, {a_u})")]
    InvalidWedge { a_l: f64, a_u: f64 },

    #[error("point ({x1}, {x2}) lies inside or on the boundary of the forbidden wedge")]
    InsideForbiddenZone { x1: f64, x2: f64 },

    #[error("point ({x1}, {x2}) is outside the domain handled by wedge geometry")]
    OutsideDomain { x1: f64, x2: f64 },

    #[error("insufficient data: need {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("need {needed} strictly positive values for the tail estimate, got {got}")]
    NonPositiveTail { needed: usize, got: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("no angles to fit a wedge from")]
    EmptyAngles,

    #[error("need {needed} points outside the wedge, got {got}")]
    InsufficientExceedances { needed: usize, got: usize },

    #[error("no points at distance >= {0} from the wedge")]
    NothingBeyondThreshold(f64),

    #[error("no points on the {0} side of the wedge")]
    EmptyBranch(crate::geometry::Branch),

    #[error("half-plane slope c = {c} does not exceed the wedge upper slope a_u = {a_u}")]
    WedgeConflict { c: f64, a_u: f64 },

    #[error("threshold must be positive, got {0}")]
    NonPositiveThreshold(f64),

    #[error("tail index must be positive, got {0}")]
    NonPositiveAlpha(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("input contains no data rows")]
    EmptyFile,

    #[error("price at position {index} is not positive: {value}")]
    NonPositivePrice { index: usize, value: f64 },

    #[error("need at least {needed} prices, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
