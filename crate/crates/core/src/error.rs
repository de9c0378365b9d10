use core::fmt;

/// Errors returned by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A marker pattern or pyramid level below the 16×16 minimum.
    DimensionTooSmall { width: usize, height: usize },
    /// Two grids that must agree in size do not.
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// Requested pyramid depth would shrink the coarsest level below 16×16.
    TooManyLevels { levels: usize, coarsest: (usize, usize) },
    /// Parameter set violates its documented invariants.
    InvalidParams(&'static str),
    /// Region of interest does not fit inside the grid.
    RoiOutOfBounds,
    /// Region of interest contains no cells.
    EmptyRoi,
    /// Schedule timestamps are not strictly increasing.
    NonMonotonicSchedule { index: usize },
    /// Time series timestamps are not strictly increasing.
    NonMonotonicSeries { index: usize },
    /// The two time series do not overlap in time.
    NoOverlap,
    /// Fewer than three distinct abscissae for a three-term fit.
    RankDeficient { distinct: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionTooSmall { width, height } => {
                write!(f, "dimensions {width}x{height} are below the 16x16 minimum")
            }
            Error::DimensionMismatch { expected, found } => write!(
                f,
                "dimension mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::TooManyLevels { levels, coarsest } => write!(
                f,
                "{levels} pyramid levels would shrink the coarsest level to {}x{}",
                coarsest.0, coarsest.1
            ),
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::RoiOutOfBounds => f.write_str("region of interest does not fit inside the grid"),
            Error::EmptyRoi => f.write_str("region of interest is empty"),
            Error::NonMonotonicSchedule { index } => {
                write!(f, "schedule time at entry {index} is not strictly increasing")
            }
            Error::NonMonotonicSeries { index } => {
                write!(f, "series timestamp at sample {index} is not strictly increasing")
            }
            Error::NoOverlap => f.write_str("time series do not overlap"),
            Error::RankDeficient { distinct } => write!(
                f,
                "cubic fit needs at least 3 distinct displacement values, got {distinct}"
            ),
        }
    }
}

impl core::error::Error for Error {}
