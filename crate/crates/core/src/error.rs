use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid size {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("grid has {0} points along an axis, at least 4 are required")]
    TooFewPoints(usize),

    #[error("only 1 and 2 dimensional grids are supported, got {0}")]
    UnsupportedDimension(usize),

    #[error("invalid domain [{start}, {end})")]
    InvalidDomain { start: f64, end: f64 },

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("value at index {0} is not finite")]
    NonFinite(usize),

    #[error("grids are incompatible: {0}")]
    IncompatibleGrids(String),

    #[error("homogeneous negative norm needs mean-zero data: mean component {mean_l2:e} vs L2 norm {l2:e}")]
    NotMeanZero { mean_l2: f64, l2: f64 },

    #[error("radius {radius} is below the minimum resolvable radius {min_radius}")]
    RadiusBelowResolution { radius: f64, min_radius: f64 },

    #[error("resolution exponent {got} is too small, {required} required")]
    InsufficientResolution { required: u32, got: u32 },

    #[error("scale index {j} exceeds signal resolution {resolution}")]
    ScaleAboveResolution { j: u32, resolution: u32 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no admissible radius in the grid satisfies r >= {eps0}")]
    EmptyRadiusSet { eps0: f64 },

    #[error("field is identically zero")]
    ZeroField,

    #[error("support touches the boundary of the box (margin {margin} < {required})")]
    SupportTouchesBoundary { margin: f64, required: f64 },

    #[error("time step {dt} exceeds the stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
