use thiserror::Error;

/// Failure modes of polygon construction, gauge fixing, the map itself, and
/// the spectral machinery. Domain errors map to CLI exit code 1; usage
/// problems are rejected before any of these can occur.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("failed to generate a regular polygon after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("polygon is not regular: frame {index} has |det| ratio {det_mag:e}")]
    NotRegular { index: usize, det_mag: f64 },

    #[error("N = {n_gon} and m = {m} must be coprime")]
    NotCoprime { n_gon: usize, m: usize },

    #[error("zero value at position {0} where a nonzero scalar is required")]
    ZeroInput(usize),

    #[error("non-generic gauge: {0}")]
    NonGenericGauge(String),

    #[error("degenerate syzygy data: {0}")]
    DegenerateSyzygy(String),

    #[error("intersection at vertex {index} has dimension {dim}, expected {expected}")]
    NonGenericIntersection {
        index: usize,
        dim: usize,
        expected: usize,
    },

    #[error("coefficient matrix N_{index} is singular")]
    SingularN { index: usize },

    #[error("frame matrix is singular")]
    SingularFrame,

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("degenerate short diagonals at vertex {index}")]
    DegenerateDiagonals { index: usize },

    #[error("scaling parameter mu must be nonzero")]
    ZeroMu,

    #[error("spectral interpolation is ill-conditioned: holdout residual {residual:e}")]
    InterpolationIllConditioned { residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("invalid input: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDims(_) => "invalid_dims",
            Error::GenerationFailed { .. } => "generation_failed",
            Error::NotRegular { .. } => "not_regular",
            Error::NotCoprime { .. } => "not_coprime",
            Error::ZeroInput(_) => "zero_input",
            Error::NonGenericGauge(_) => "non_generic_gauge",
            Error::DegenerateSyzygy(_) => "degenerate_syzygy",
            Error::NonGenericIntersection { .. } => "non_generic_intersection",
            Error::SingularN { .. } => "singular_n",
            Error::SingularFrame => "singular_frame",
            Error::SingularMatrix => "singular_matrix",
            Error::DegenerateDiagonals { .. } => "degenerate_diagonals",
            Error::ZeroMu => "zero_mu",
            Error::InterpolationIllConditioned { .. } => "interpolation_ill_conditioned",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
